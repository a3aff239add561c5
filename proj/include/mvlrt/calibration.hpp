#ifndef MVLRT_CALIBRATION_HPP
#define MVLRT_CALIBRATION_HPP

// Null calibration of the modified LRT: dimension ratios and the centering
// and scaling constants l_n, mu_n, nu_n^2 of its normal limit.
//
// All logarithms are natural. Finite-sample ratios (p/n1, p/n2, p/n) are used
// throughout. The helpers ell/u_term/v_term/psi recompute c1 = yb/(ya+yb) and
// c2 = ya/(ya+yb) from their own arguments, so ell(y2, y1) sees c2 in the c1
// slot.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mvlrt/errors.hpp"
#include "mvlrt/spectral.hpp"

namespace mvlrt {

/// |y - 1| below this raises the near-unity warning.
inline constexpr double kNearUnityThreshold = 0.05;

template <typename Scalar = double>
struct DimensionRatios {
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  Index n = 0;
  Scalar y1 = 0;
  Scalar y2 = 0;
  Scalar r_n = 0;
  Scalar h = 0;
  Scalar c1 = 0;
  Scalar c2 = 0;
  bool y1_gt_1 = false;
  bool y2_gt_1 = false;
  bool near_unity = false;
};

enum class MomentSource { Known, Estimated };

inline const char* to_string(MomentSource s) {
  return s == MomentSource::Known ? "known" : "estimated";
}

/// Fourth cumulants E z^4 - 3 of the standardized entries.
template <typename Scalar = double>
struct MomentParams {
  Scalar beta1 = 0;
  Scalar beta2 = 0;
  MomentSource source = MomentSource::Known;
};

template <typename Scalar = double>
struct CenteringTerms {
  Scalar l_n = 0;
  Scalar mu_n = 0;
  Scalar nu_n2 = 0;
  Scalar nu_n = 0;
};

template <typename Scalar = double>
DimensionRatios<Scalar> dimension_ratios(Index n1, Index n2, Index p) {
  if (n1 < 2 || n2 < 2 || p < 1) {
    std::ostringstream os;
    os << "invalid sizes (n1, n2, p) = (" << n1 << ", " << n2 << ", " << p
       << "); need n1, n2 >= 2 and p >= 1";
    throw Error(ErrorKind::Input, os.str());
  }
  if (p >= n1 + n2) {
    std::ostringstream os;
    os << "p = " << p << " must be smaller than n1 + n2 = " << n1 + n2;
    throw Error(ErrorKind::Dimension, os.str());
  }
  if (p == n1 || p == n2) {
    std::ostringstream os;
    os << "p = " << p << " equals a degrees-of-freedom count (n1 = " << n1 << ", n2 = " << n2
       << "); y1 and y2 must differ from 1";
    throw Error(ErrorKind::Assumption, os.str());
  }

  DimensionRatios<Scalar> r;
  r.n1 = n1;
  r.n2 = n2;
  r.p = p;
  r.n = n1 + n2;
  const Scalar sp = static_cast<Scalar>(p);
  r.y1 = sp / static_cast<Scalar>(n1);
  r.y2 = sp / static_cast<Scalar>(n2);
  r.r_n = sp / static_cast<Scalar>(r.n);
  r.h = std::sqrt(r.y1 + r.y2 - r.y1 * r.y2);
  // The larger share is computed by division and the smaller as its exact
  // complement, so c1 + c2 == 1 and the pair swaps cleanly with (n1, n2).
  if (n1 >= n2) {
    r.c1 = static_cast<Scalar>(n1) / static_cast<Scalar>(r.n);
    r.c2 = Scalar(1) - r.c1;
  } else {
    r.c2 = static_cast<Scalar>(n2) / static_cast<Scalar>(r.n);
    r.c1 = Scalar(1) - r.c2;
  }
  r.y1_gt_1 = p > n1;
  r.y2_gt_1 = p > n2;
  using std::abs;
  r.near_unity = std::min(abs(r.y1 - Scalar(1)), abs(r.y2 - Scalar(1))) <
                 static_cast<Scalar>(kNearUnityThreshold);
  return r;
}

namespace detail {

template <typename Scalar>
struct PairTerms {
  Scalar h2;
  Scalar h;
  Scalar c1;
  Scalar c2;
};

template <typename Scalar>
PairTerms<Scalar> pair_terms(Scalar ya, Scalar yb) {
  if (!(ya > Scalar(0)) || !(yb > Scalar(0))) {
    throw Error(ErrorKind::Input, "dimension ratios must be positive");
  }
  if (ya == Scalar(1) || yb == Scalar(1)) {
    throw Error(ErrorKind::Assumption, "dimension ratio equal to 1");
  }
  const Scalar h2 = ya + yb - ya * yb;
  if (!(h2 > Scalar(0))) {
    throw Error(ErrorKind::Dimension, "ratios imply p >= n1 + n2 (h^2 <= 0)");
  }
  return {h2, std::sqrt(h2), yb / (ya + yb), ya / (ya + yb)};
}

}  // namespace detail

template <typename Scalar>
Scalar ell(Scalar ya, Scalar yb) {
  const auto t = detail::pair_terms(ya, yb);
  if (!(ya > Scalar(1))) return Scalar(0);
  using std::log;
  return Scalar(2) * t.c1 * t.h2 / (ya * yb) * log(t.h) -
         t.c1 * (Scalar(1) + yb) / yb * log(ya) - t.c1 * (Scalar(1) - ya) / ya * log(yb);
}

template <typename Scalar>
Scalar u_term(Scalar ya, Scalar yb) {
  const auto t = detail::pair_terms(ya, yb);
  if (!(ya > Scalar(1))) return Scalar(0);
  using std::log;
  return t.c1 * (log(ya) - log(t.h));
}

template <typename Scalar>
Scalar v_term(Scalar ya, Scalar yb) {
  const auto t = detail::pair_terms(ya, yb);
  if (!(ya > Scalar(1))) return Scalar(0);
  using std::log;
  return Scalar(2) * t.c1 * log(ya) - Scalar(2) * t.c1 * (t.c1 + Scalar(2) * t.c2) * log(t.h);
}

template <typename Scalar>
Scalar psi(Scalar ya, Scalar yb) {
  const auto t = detail::pair_terms(ya, yb);
  const Scalar ya2 = ya * ya;
  const Scalar yb2 = yb * yb;
  const Scalar first = yb < Scalar(1) ? yb2 * yb2 : t.h2 * (Scalar(2) * yb2 - t.h2);
  const Scalar second = ya < Scalar(1) ? ya2 * ya * (ya + Scalar(2) * yb)
                                       : t.h2 * (ya + yb + ya * yb);
  return t.c2 * ya2 * first - t.c1 * yb2 * second;
}

/// Centering and scaling constants of the null limit
/// (L - p l_n - mu_n - log(1 - r_n)) / nu_n -> N(0, 1).
template <typename Scalar>
CenteringTerms<Scalar> centering(const DimensionRatios<Scalar>& r,
                                 const MomentParams<Scalar>& m) {
  using std::abs;
  using std::log;
  const Scalar y1 = r.y1, y2 = r.y2, c1 = r.c1, c2 = r.c2, h = r.h;
  const Scalar h2 = h * h;
  const Scalar ys = y1 + y2;
  const Scalar yy = y1 * y2;
  const Scalar a1 = abs(Scalar(1) - y1);
  const Scalar a2 = abs(Scalar(1) - y2);
  const Scalar log_h = log(h);
  const Scalar one = Scalar(1);

  CenteringTerms<Scalar> c;
  c.l_n = c2 * log(y1) + c1 * log(y2) + Scalar(2) * h2 / yy * log_h - ys / yy * log(ys) -
          c1 * a1 / y1 * log(a1) - c2 * a2 / y2 * log(a2) - ell(y1, y2) - ell(y2, y1);

  c.mu_n = log(ys) / Scalar(2) + c1 / Scalar(2) * log(a1) + c2 / Scalar(2) * log(a2) - log_h -
           u_term(y1, y2) - u_term(y2, y1) +
           m.beta1 * psi(y1, y2) / (Scalar(2) * y1 * y2 * y2 * ys * ys) +
           m.beta2 * psi(y2, y1) / (Scalar(2) * y2 * y1 * y1 * ys * ys);

  const Scalar both = (r.y1_gt_1 && r.y2_gt_1) ? Scalar(4) * c1 * c2 * log_h : Scalar(0);
  const Scalar b1 = r.y1_gt_1 ? (y1 - one) * y2 * y2 : Scalar(0);
  const Scalar b2 = r.y2_gt_1 ? (y2 - one) * y1 * y1 : Scalar(0);
  const Scalar bracket = b1 - b2;
  c.nu_n2 = Scalar(4) * log_h - Scalar(2) * c1 * c1 * log(a1) - Scalar(2) * c2 * c2 * log(a2) -
            Scalar(2) * log(ys) + Scalar(2) * (v_term(y1, y2) + v_term(y2, y1) + both) +
            (y1 * m.beta1 + y2 * m.beta2) / (yy * yy * ys * ys) * bracket * bracket;

  if (!(c.nu_n2 > Scalar(0)) || !std::isfinite(static_cast<double>(c.nu_n2))) {
    std::ostringstream os;
    os << "null variance nu_n^2 = " << static_cast<double>(c.nu_n2) << " is not positive for (n1, n2, p) = ("
       << r.n1 << ", " << r.n2 << ", " << r.p << ")";
    throw Error(ErrorKind::Calibration, os.str());
  }
  c.nu_n = std::sqrt(c.nu_n2);
  return c;
}

}  // namespace mvlrt

#endif  // MVLRT_CALIBRATION_HPP
