#ifndef MVLRT_NORMAL_HPP
#define MVLRT_NORMAL_HPP

#include <cmath>

namespace mvlrt {

template <typename Scalar>
Scalar normal_cdf(Scalar x) {
  using std::erfc;
  using std::sqrt;
  return erfc(-x / sqrt(Scalar(2))) / Scalar(2);
}

/// 2 (1 - Phi(|z|)), evaluated without cancellation.
template <typename Scalar>
Scalar two_sided_p_value(Scalar z) {
  using std::abs;
  using std::erfc;
  using std::sqrt;
  return erfc(abs(z) / sqrt(Scalar(2)));
}

/// 1 - Phi(z)
template <typename Scalar>
Scalar upper_p_value(Scalar z) {
  using std::erfc;
  using std::sqrt;
  return erfc(z / sqrt(Scalar(2))) / Scalar(2);
}

}  // namespace mvlrt

#endif  // MVLRT_NORMAL_HPP
