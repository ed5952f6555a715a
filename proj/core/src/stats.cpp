#include "spmoran/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spmoran {

namespace {

// P(K > t) for the Kolmogorov distribution, truncated at 100 terms. The
// series 2 sum (-1)^{k-1} exp(-2 k^2 t^2) converges almost immediately for
// the t values a test ever sees.
double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

TestReport ks_exponential(std::span<const double> samples, double rate) {
  if (samples.empty()) throw std::domain_error("ks_exponential: empty sample");
  if (!(rate > 0.0)) throw std::domain_error("ks_exponential: rate must be positive");
  std::vector<double> sorted(samples.begin(), samples.end());
  for (double x : sorted)
    if (!(x > 0.0)) throw std::domain_error("ks_exponential: samples must be positive");
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = -std::expm1(-rate * sorted[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max({d, cdf - lo, hi - cdf});
  }
  TestReport report;
  report.statistic = d;
  report.p_value = kolmogorov_tail(std::sqrt(static_cast<double>(n)) * d);
  report.n = n;
  report.target = "exponential(rate=" + std::to_string(rate) + ")";
  return report;
}

MeanCi mean_ci(std::span<const double> samples, double level) {
  if (samples.empty()) throw std::domain_error("mean_ci: empty sample");
  if (!(level > 0.0) || !(level < 1.0)) throw std::domain_error("mean_ci: level must lie in (0, 1)");
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double stderr_ = samples.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  const double z = normal_quantile(0.5 + level / 2.0);
  return {mean, z * stderr_};
}

double loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw std::domain_error("loglog_slope: need at least 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("loglog_slope: points must be positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const auto n = static_cast<double>(points.size());
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::domain_error("loglog_slope: abscissae must be distinct");
  return (n * sxy - sx * sy) / denom;
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  // Acklam's rational approximation with one Halley refinement step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double dd[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                  3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // Halley step against erfc for full double precision.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace spmoran
