#ifndef MVLRT_SPECTRAL_HPP
#define MVLRT_SPECTRAL_HPP

// Sample moments, the Fisher-type matrix spectrum and the Hotelling-type
// quadratic form of two samples.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <utility>

#include "mvlrt/errors.hpp"

namespace mvlrt {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// N x p observations of one population, one row per observation.
template <typename Scalar = double>
struct SampleSet {
  Matrix<Scalar> observations;
  std::string label;

  Index size() const { return observations.rows(); }
  Index dim() const { return observations.cols(); }
};

template <typename Scalar = double>
struct SampleMoments {
  Vector<Scalar> mean;
  Matrix<Scalar> scatter;     // sum of centered outer products
  Index df = 0;               // N - 1
  Matrix<Scalar> covariance;  // scatter / df

  Index dim() const { return mean.size(); }
};

/// Eigenvalues of B = A1 (A1 + A2)^{-1}, split into the rank-forced zeros and
/// ones and the interior values that carry information.
template <typename Scalar = double>
struct FisherSpectrum {
  Vector<Scalar> interior;  // ascending, strictly inside (tol, 1 - tol)
  Index zero_count = 0;
  Index one_count = 0;
  Scalar clamp_tolerance = 0;
  Vector<Scalar> raw;  // all p eigenvalues before classification, ascending

  Index dim() const { return interior.size() + zero_count + one_count; }
};

template <typename Scalar = double>
struct QuadraticTerm {
  Scalar t_n = 0;
  Scalar limit = 0;  // r_n / (1 - r_n)
};

template <typename Scalar>
SampleMoments<Scalar> compute_moments(const SampleSet<Scalar>& sample) {
  const auto& x = sample.observations;
  const Index n_obs = x.rows();
  const Index p = x.cols();
  if (n_obs < 2) {
    throw Error(ErrorKind::Degenerate, "sample '" + sample.label + "' has " +
                                           std::to_string(n_obs) +
                                           " observations; at least 2 are required");
  }
  if (p < 1) {
    throw Error(ErrorKind::Input, "sample '" + sample.label + "' has no variables");
  }
  if (!x.allFinite()) {
    throw Error(ErrorKind::Input, "sample '" + sample.label + "' contains non-finite entries");
  }

  SampleMoments<Scalar> m;
  m.mean = x.colwise().mean().transpose();
  const Matrix<Scalar> centered = x.rowwise() - m.mean.transpose();
  m.scatter = Matrix<Scalar>::Zero(p, p);
  m.scatter.template selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  m.scatter = m.scatter.template selfadjointView<Eigen::Lower>();
  m.df = n_obs - 1;
  m.covariance = m.scatter / static_cast<Scalar>(m.df);
  return m;
}

/// Cholesky factor of the diagonally equilibrated pooled scatter
/// D (A1 + A2) D = L L'. Both the spectrum and T_n are invariant under the
/// joint congruence by D, so all downstream work happens in scaled
/// coordinates.
template <typename Scalar = double>
class PooledScatter {
 public:
  PooledScatter(const SampleMoments<Scalar>& m1, const SampleMoments<Scalar>& m2)
      : n1_(m1.df), n2_(m2.df), p_(m1.dim()) {
    if (m2.dim() != p_) {
      std::ostringstream os;
      os << "samples have different dimensions: " << p_ << " vs " << m2.dim();
      throw Error(ErrorKind::Input, os.str());
    }
    if (p_ >= n1_ + n2_) {
      std::ostringstream os;
      os << "p = " << p_ << " must be smaller than n1 + n2 = " << n1_ + n2_;
      throw Error(ErrorKind::Dimension, os.str());
    }
    const Matrix<Scalar> pooled = m1.scatter + m2.scatter;
    scale_ = pooled.diagonal();
    for (Index i = 0; i < p_; ++i) {
      if (!(scale_(i) > Scalar(0))) {
        throw Error(ErrorKind::Conditioning,
                    "pooled scatter has a zero diagonal entry at variable " + std::to_string(i));
      }
      scale_(i) = Scalar(1) / std::sqrt(scale_(i));
    }
    llt_.compute(scale_.asDiagonal() * pooled * scale_.asDiagonal());
    if (llt_.info() != Eigen::Success) {
      throw Error(ErrorKind::Conditioning, "pooled scatter is not numerically positive definite");
    }
    const auto diag = llt_.matrixLLT().diagonal().cwiseAbs();
    const Scalar ratio = diag.minCoeff() / diag.maxCoeff();
    const Scalar floor =
        Scalar(1000) * static_cast<Scalar>(p_) * std::numeric_limits<Scalar>::epsilon();
    if (!(ratio * ratio > floor)) {
      throw Error(ErrorKind::Conditioning, "pooled scatter is numerically singular");
    }
  }

  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  Index dim() const { return p_; }

  /// L^{-1} D v
  Vector<Scalar> whiten(const Vector<Scalar>& v) const {
    return llt_.matrixL().solve(scale_.cwiseProduct(v));
  }

  /// L^{-1} D M, column by column.
  Matrix<Scalar> whiten_columns(const Matrix<Scalar>& m) const {
    return llt_.matrixL().solve(scale_.asDiagonal() * m);
  }

  /// L^{-1} D S D L^{-T}, symmetrized.
  Matrix<Scalar> whiten(const Matrix<Scalar>& s) const {
    const Matrix<Scalar> scaled = scale_.asDiagonal() * s * scale_.asDiagonal();
    const Matrix<Scalar> half = llt_.matrixL().solve(scaled);
    Matrix<Scalar> full = llt_.matrixL().solve(half.transpose());
    return (full + full.transpose()) / Scalar(2);
  }

 private:
  Index n1_;
  Index n2_;
  Index p_;
  Vector<Scalar> scale_;
  Eigen::LLT<Matrix<Scalar>> llt_;
};

/// Classification tolerance for eigenvalues at 0 and 1.
template <typename Scalar>
Scalar clamp_tolerance(Index p, Scalar largest_magnitude) {
  const Scalar tol =
      static_cast<Scalar>(p) * std::numeric_limits<Scalar>::epsilon() * largest_magnitude;
  return std::max(tol, Scalar(1e-10));
}

template <typename Scalar>
FisherSpectrum<Scalar> fisher_spectrum(const SampleMoments<Scalar>& m1,
                                       const PooledScatter<Scalar>& pooled) {
  const Index p = pooled.dim();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(pooled.whiten(m1.scatter),
                                                       Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Conditioning, "eigenvalue iteration did not converge");
  }

  FisherSpectrum<Scalar> spec;
  spec.raw = solver.eigenvalues();
  spec.clamp_tolerance = clamp_tolerance<Scalar>(p, spec.raw.cwiseAbs().maxCoeff());
  const Scalar tol = spec.clamp_tolerance;

  Index lo = 0;
  while (lo < p && spec.raw(lo) <= tol) ++lo;
  Index hi = p;
  while (hi > lo && spec.raw(hi - 1) >= Scalar(1) - tol) --hi;
  spec.zero_count = lo;
  spec.one_count = p - hi;
  spec.interior = spec.raw.segment(lo, hi - lo);

  const Index expected_zero = std::max<Index>(p - pooled.n1(), 0);
  const Index expected_one = std::max<Index>(p - pooled.n2(), 0);
  if (spec.zero_count != expected_zero || spec.one_count != expected_one) {
    std::ostringstream os;
    os << "Fisher spectrum has " << spec.zero_count << " zero and " << spec.one_count
       << " unit eigenvalues, expected " << expected_zero << " and " << expected_one
       << " from the sample ranks (duplicated or collinear observations?)";
    throw Error(ErrorKind::Degenerate, os.str());
  }
  return spec;
}

template <typename Scalar>
FisherSpectrum<Scalar> fisher_spectrum(const SampleMoments<Scalar>& m1,
                                       const SampleMoments<Scalar>& m2) {
  return fisher_spectrum(m1, PooledScatter<Scalar>(m1, m2));
}

/// T_n = (n1 n2 / n) d' (A1 + A2)^{-1} d with d = mean1 - mean2.
template <typename Scalar>
QuadraticTerm<Scalar> hotelling_term(const SampleMoments<Scalar>& m1,
                                     const SampleMoments<Scalar>& m2,
                                     const PooledScatter<Scalar>& pooled) {
  const Scalar n1 = static_cast<Scalar>(pooled.n1());
  const Scalar n2 = static_cast<Scalar>(pooled.n2());
  const Scalar n = n1 + n2;
  const Vector<Scalar> w = pooled.whiten(Vector<Scalar>(m1.mean - m2.mean));
  const Scalar r = static_cast<Scalar>(pooled.dim()) / n;
  return {n1 * n2 / n * w.squaredNorm(), r / (Scalar(1) - r)};
}

template <typename Scalar>
QuadraticTerm<Scalar> hotelling_term(const SampleMoments<Scalar>& m1,
                                     const SampleMoments<Scalar>& m2) {
  return hotelling_term(m1, m2, PooledScatter<Scalar>(m1, m2));
}

}  // namespace mvlrt

#endif  // MVLRT_SPECTRAL_HPP
