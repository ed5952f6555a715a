#pragma once

#include <span>
#include <string>
#include <utility>

namespace spmoran {

/// One hypothesis-test result.
struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::string target;
};

/// One-sample Kolmogorov-Smirnov test of `samples` against the exponential
/// distribution with the given rate. The p-value uses the asymptotic
/// Kolmogorov series (100 terms), accurate for the n >= 500 used here.
/// Samples must be positive; empty input is a domain error.
TestReport ks_exponential(std::span<const double> samples, double rate);

/// Normal-approximation confidence interval for the mean.
struct MeanCi {
  double mean;
  double half_width;
};
MeanCi mean_ci(std::span<const double> samples, double level);

/// Least-squares slope of log(y) against log(x). Needs >= 2 distinct
/// positive abscissae.
double loglog_slope(std::span<const std::pair<double, double>> points);

/// Inverse standard normal CDF (Acklam's rational approximation, relative
/// error ~1e-9).
double normal_quantile(double p);

}  // namespace spmoran
