#pragma once

namespace combcast {

inline constexpr double kPi = 3.14159265358979323846;

double normal_pdf(double z);
double normal_cdf(double z);
/// Inverse of the standard normal CDF for p in (0, 1).
double normal_quantile(double p);

}  // namespace combcast
