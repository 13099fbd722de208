#pragma once

#include <span>
#include <variant>
#include <vector>

#include "combcast/pso.hpp"
#include "combcast/types.hpp"

namespace combcast {

struct SkewNormalParams {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;
};

double skewnormal_pdf(const SkewNormalParams& params, double x);

/// F(x) = Phi(z) - 2 T(z, shape) with z = (x - location) / scale, where Owen's
/// T comes from boost::math::owens_t.
double skewnormal_cdf(const SkewNormalParams& params, double x);

/// Inverts skewnormal_cdf to |F(x) - alpha| < 1e-10 with a bracketed
/// Newton iteration that falls back to bisection.
double skewnormal_quantile(const SkewNormalParams& params, double alpha);

struct SkewNormalFit {
  SkewNormalParams params;
  /// Root mean square of (fitted quantile - reported value) over the reported levels.
  double rms_residual;
};

/// Settings used by fit_skewnormal when none are given.
PsoConfig default_skewnormal_fit_settings();

/// Least-squares fit of a skew-normal to reported quantiles, minimized by PSO
/// in standardized units. Requires at least 3 levels; with fewer, throws
/// std::invalid_argument (use PiecewiseLinearQuantiles instead).
SkewNormalFit fit_skewnormal(const QuantileForecast& forecast,
                             const PsoConfig& settings = default_skewnormal_fit_settings());

/// Adds any `targets` level missing from `forecast`, filled from a fitted
/// skew-normal. Reported pairs are kept verbatim and filled values are
/// clamped between their reported neighbours so the result stays monotone.
QuantileForecast complete_quantiles(const QuantileForecast& forecast, std::span<const double> targets,
                                    const PsoConfig& settings = default_skewnormal_fit_settings());

/// Piecewise-linear quantile function through the reported points with
/// exponential tails whose density matches the outermost segments. A single
/// reported point (or a zero-width outer segment) gives a point mass.
class PiecewiseLinearQuantiles {
 public:
  PiecewiseLinearQuantiles(std::vector<double> levels, std::vector<double> values);
  explicit PiecewiseLinearQuantiles(const QuantileForecast& forecast);

  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double alpha) const;

 private:
  std::vector<double> levels_;
  std::vector<double> values_;
  double lower_tail_scale_ = 0.0;
  double upper_tail_scale_ = 0.0;
};

/// One mixture component: either a fitted skew-normal or a raw quantile set.
class ComponentDistribution {
 public:
  explicit ComponentDistribution(SkewNormalParams params) : dist_(params) {}
  explicit ComponentDistribution(PiecewiseLinearQuantiles quantiles) : dist_(std::move(quantiles)) {}

  static ComponentDistribution from_forecast(const QuantileForecast& forecast) {
    return ComponentDistribution(PiecewiseLinearQuantiles(forecast));
  }

  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double alpha) const;

 private:
  std::variant<SkewNormalParams, PiecewiseLinearQuantiles> dist_;
};

/// Quantiles of the mixture sum_k w_k F_k at each target level, found by
/// bisection on the mixture CDF. Output is non-decreasing in the target level.
std::vector<double> mixture_quantiles(std::span<const ComponentDistribution> components, std::span<const double> weights,
                                      std::span<const double> targets);

double mixture_cdf(std::span<const ComponentDistribution> components, std::span<const double> weights, double x);

}  // namespace combcast
