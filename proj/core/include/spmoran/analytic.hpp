#pragma once

#include <cstdint>

namespace spmoran {

/// Dimension-dependent tunneling scale: u^{1/3} in d=1,
/// sqrt(u * ln(1/u)) in d=2, sqrt(u) in d>=3. Natural logarithm throughout.
/// Requires 0 < u < 1.
double h_d(int d, double u);

/// Companion scale for the regime condition: u^{1/3} in d=1,
/// 1/sqrt(ln(1/u)) in d=2, 1 in d>=3. Requires 0 < u < 1.
double g_d(int d, double u);

/// Time scale over which a family of size n evolves: n^2 (d=1),
/// 2 n ln n (d=2), n (d>=3).
double a_n(int d, double n);

/// Airy function Ai on [0, 40]: Maclaurin series up to x = 8, asymptotic
/// expansion beyond. Absolute error below 1e-10 over the whole range.
double airy_ai(double x);
double airy_ai_prime(double x);

/// Ai(0) and Ai'(0): 3^{-2/3}/Gamma(2/3) and -3^{-1/3}/Gamma(1/3).
inline constexpr double kAiryAi0 = 0.3550280538878172392600632;
inline constexpr double kAiryAiPrime0 = -0.2588194037928067983552456;

/// The tunneling constant gamma_d: 3^{1/3} Gamma(2/3)/Gamma(1/3) in d=1
/// (beta ignored), 1/sqrt(beta_d) in d>=2.
double gamma_d(int d, double beta = 0.0);

/// v(x) = E_x exp(-int_0^{T0} Y_s ds) for the size-limit diffusion:
/// Ai(x)/Ai(0) in d=1, exp(-x/sqrt(beta_d)) in d>=2. v(0)=1, decreasing.
double v_of_x(int d, double x, double beta = 0.0);

/// Predicted waiting-time rate for tau_2 plus the regime diagnostics of the
/// double inequality 1/h_d(u2) << N << g_d(u2)/u1.
struct Tau2RatePrediction {
  double rate;        // N * u1 * gamma_d * h_d(u2)
  double inv_h;       // 1/h_d(u2); should be << N
  double g_over_u1;   // g_d(u2)/u1; should be >> N
  bool regime_ok;     // inv_h < N && N < g_over_u1
};
Tau2RatePrediction tau2_rate(double N, double u1, double u2, int d, double beta = 0.0);

/// Biased-walk hitting probability P_x(T_b < T_a) = (th^x - th^a)/(th^b - th^a)
/// with th = 1/lambda, for integers a < x < b. Switches to the neutral form
/// (x-a)/(b-a) when |lambda-1| < 1e-8 to avoid catastrophic cancellation.
double hit_prob(double lambda, std::int64_t x, std::int64_t a, std::int64_t b);

/// sup over integers 0 < -a, b <= C/h of |P_0^lambda(T_b < T_a)/(-a/(b-a)) - 1|,
/// the uniform measure of how far the biased hitting law strays from the
/// neutral one on the scale C/h. Zero exactly at lambda = 1.
double uniform_neutrality_gap(double lambda, double C, double h);

/// Every closed-form quantity for one parameter set, in engine time units.
struct Predictions {
  int d;
  double h;          // h_d(u2)
  double g;          // g_d(u2)
  double n_scale;    // 1/h_d(u2), size reached by the successful family
  double a_n_scale;  // a_n at n = n_scale
  double beta;       // boundary constant used (ignored in d=1)
  double gamma;      // gamma_d
  double nu_pred;    // gamma_d * h_d(u2)
  double rate;       // N * u1 * nu_pred
  double inv_h;      // regime diagnostics, condition (1/h << N << g/u1)
  double g_over_u1;
  bool regime_ok;
};
Predictions make_predictions(int d, double N, double u1, double u2, double beta = 0.0);

}  // namespace spmoran
