#pragma once

#include <functional>
#include <span>
#include <vector>

namespace chemostat::stats {

struct KsResult {
  double statistic = 0.0;  ///< sup |F_n - F|
  double p_value = 1.0;    ///< asymptotic Kolmogorov p-value
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_survival(double x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = intercept + slope * x (needs >= 2 points).
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> v);

}  // namespace chemostat::stats
