#include "spmoran/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spmoran {

namespace {

constexpr double kAirySeriesCut = 8.0;
constexpr double kAiryMaxX = 40.0;

void check_u(double u) {
  if (!(u > 0.0) || !(u < 1.0)) throw std::domain_error("mutation rate u must lie in (0, 1)");
}

// Maclaurin series for Ai and Ai' accumulated in long double: at x = 8 the
// two series halves cancel ~13 decimal digits, so 64-bit mantissas are needed
// to keep the absolute error below 1e-10.
struct AirySeries {
  long double ai, aip;
};

AirySeries airy_series(double xd) {
  const long double x = xd;
  const long double x3 = x * x * x;
  // f = sum c_k x^{3k},   c_k = c_{k-1} / (3k (3k-1))   (x^3 folded in)
  // g = sum d_k x^{3k+1}, d_k = d_{k-1} / ((3k+1) 3k)
  long double cf = 1.0L, f = 1.0L, fp = 0.0L;
  long double cg = x, g = x, gp = 1.0L;
  for (int k = 1; k < 80; ++k) {
    cf *= x3 / static_cast<long double>((3 * k) * (3 * k - 1));
    cg *= x3 / static_cast<long double>((3 * k + 1) * (3 * k));
    f += cf;
    g += cg;
    if (x > 0.0L) {
      fp += cf * (3.0L * k) / x;
      gp += cg * (3.0L * k + 1.0L) / x;
    }
    if (cf < 1e-25L * f && cg < 1e-25L * (std::abs(static_cast<double>(g)) + 1.0L)) break;
  }
  const long double ai0 = 0.355028053887817239260063186004L;   // 3^{-2/3}/Gamma(2/3)
  const long double aip0 = -0.258819403792806798405183560189L;  // -3^{-1/3}/Gamma(1/3)
  return {ai0 * f + aip0 * g, ai0 * fp + aip0 * gp};
}

// Asymptotic expansion for x > 8, truncated at the first non-decreasing term.
AirySeries airy_asymptotic(double xd) {
  const long double x = xd;
  const long double zeta = (2.0L / 3.0L) * x * std::sqrt(x);
  long double term_u = 1.0L, sum_u = 1.0L;
  long double sum_v = 1.0L;
  long double prev = 1.0L;
  for (int k = 0; k < 60; ++k) {
    const long double ratio = static_cast<long double>((6 * k + 1)) * (6 * k + 3) * (6 * k + 5) /
                              (216.0L * (k + 1) * (2 * k + 1));
    term_u *= -ratio / zeta;
    if (std::abs(term_u) >= prev) break;  // divergent tail reached
    prev = std::abs(term_u);
    sum_u += term_u;
    const long double term_v = term_u * (6.0L * (k + 1) + 1.0L) / (1.0L - 6.0L * (k + 1));
    sum_v += term_v;
    if (prev < 1e-20L) break;
  }
  const long double sqrt_pi = 1.772453850905516027298167483L;
  const long double x14 = std::pow(x, 0.25L);
  const long double pre = std::exp(-zeta) / (2.0L * sqrt_pi);
  return {pre / x14 * sum_u, -pre * x14 * sum_v};
}

AirySeries airy_eval(double x) {
  if (!(x >= 0.0) || x > kAiryMaxX)
    throw std::domain_error("airy_ai: argument must lie in [0, 40]");
  return x <= kAirySeriesCut ? airy_series(x) : airy_asymptotic(x);
}

}  // namespace

double h_d(int d, double u) {
  check_u(u);
  if (d == 1) return std::cbrt(u);
  if (d == 2) return std::sqrt(u * std::log(1.0 / u));
  if (d >= 3) return std::sqrt(u);
  throw std::domain_error("h_d: dimension must be >= 1");
}

double g_d(int d, double u) {
  check_u(u);
  if (d == 1) return std::cbrt(u);
  if (d == 2) return 1.0 / std::sqrt(std::log(1.0 / u));
  if (d >= 3) return 1.0;
  throw std::domain_error("g_d: dimension must be >= 1");
}

double a_n(int d, double n) {
  if (!(n > 0.0)) throw std::domain_error("a_n: n must be positive");
  if (d == 1) return n * n;
  if (d == 2) return 2.0 * n * std::log(n);
  if (d >= 3) return n;
  throw std::domain_error("a_n: dimension must be >= 1");
}

double airy_ai(double x) { return static_cast<double>(airy_eval(x).ai); }

double airy_ai_prime(double x) { return static_cast<double>(airy_eval(x).aip); }

double gamma_d(int d, double beta) {
  if (d == 1) {
    // 3^{1/3} Gamma(2/3)/Gamma(1/3) = -Ai'(0)/Ai(0)
    return std::cbrt(3.0) * std::tgamma(2.0 / 3.0) / std::tgamma(1.0 / 3.0);
  }
  if (d >= 2) {
    if (!(beta > 0.0)) throw std::domain_error("gamma_d: beta must be positive for d >= 2");
    return 1.0 / std::sqrt(beta);
  }
  throw std::domain_error("gamma_d: dimension must be >= 1");
}

double v_of_x(int d, double x, double beta) {
  if (!(x >= 0.0)) throw std::domain_error("v_of_x: x must be >= 0");
  if (d == 1) return airy_ai(x) / kAiryAi0;
  if (d >= 2) {
    if (!(beta > 0.0)) throw std::domain_error("v_of_x: beta must be positive for d >= 2");
    return std::exp(-x / std::sqrt(beta));
  }
  throw std::domain_error("v_of_x: dimension must be >= 1");
}

Tau2RatePrediction tau2_rate(double N, double u1, double u2, int d, double beta) {
  if (!(N > 0.0)) throw std::domain_error("tau2_rate: N must be positive");
  if (u1 < 0.0) throw std::domain_error("tau2_rate: u1 must be >= 0");
  const double h = h_d(d, u2);
  const double g = g_d(d, u2);
  Tau2RatePrediction out;
  out.rate = N * u1 * gamma_d(d, beta) * h;
  out.inv_h = 1.0 / h;
  out.g_over_u1 = u1 > 0.0 ? g / u1 : std::numeric_limits<double>::infinity();
  out.regime_ok = out.inv_h < N && N < out.g_over_u1;
  return out;
}

double hit_prob(double lambda, std::int64_t x, std::int64_t a, std::int64_t b) {
  if (!(lambda > 0.0)) throw std::domain_error("hit_prob: lambda must be positive");
  if (!(a < x && x < b)) throw std::domain_error("hit_prob: need a < x < b");
  if (std::abs(lambda - 1.0) < 1e-8)
    return static_cast<double>(x - a) / static_cast<double>(b - a);
  // (th^x - th^a)/(th^b - th^a) = expm1((x-a) ln th)/expm1((b-a) ln th)
  const double log_theta = -std::log(lambda);
  return std::expm1(static_cast<double>(x - a) * log_theta) /
         std::expm1(static_cast<double>(b - a) * log_theta);
}

double uniform_neutrality_gap(double lambda, double C, double h) {
  if (!(C > 0.0) || !(h > 0.0)) throw std::domain_error("uniform_neutrality_gap: C and h must be positive");
  const auto M = static_cast<std::int64_t>(C / h);
  if (M < 1) throw std::domain_error("uniform_neutrality_gap: C/h must be >= 1");
  double gap = 0.0;
  for (std::int64_t a = -1; a >= -M; --a) {
    for (std::int64_t b = 1; b <= M; ++b) {
      const double p = hit_prob(lambda, 0, a, b);
      const double neutral = static_cast<double>(-a) / static_cast<double>(b - a);
      gap = std::max(gap, std::abs(p / neutral - 1.0));
    }
  }
  return gap;
}

Predictions make_predictions(int d, double N, double u1, double u2, double beta) {
  Predictions p;
  p.d = d;
  p.h = h_d(d, u2);
  p.g = g_d(d, u2);
  p.n_scale = 1.0 / p.h;
  p.a_n_scale = a_n(d, p.n_scale);
  p.beta = d == 1 ? 0.0 : beta;
  p.gamma = gamma_d(d, beta);
  p.nu_pred = p.gamma * p.h;
  const auto r = tau2_rate(N, u1, u2, d, beta);
  p.rate = r.rate;
  p.inv_h = r.inv_h;
  p.g_over_u1 = r.g_over_u1;
  p.regime_ok = r.regime_ok;
  return p;
}

}  // namespace spmoran
