#pragma once

namespace cmasop {

/// Standard normal cumulative distribution function.
double normal_cdf(double x);

/// Inverse of normal_cdf on (0, 1). Returns -inf / +inf at 0 / 1 and NaN
/// outside [0, 1].
double normal_ppf(double p);

}  // namespace cmasop
