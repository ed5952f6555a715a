#include "spmoran/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spmoran/errors.hpp"

namespace spmoran {

namespace {

constexpr int kMaxDenseLevel = 1024;
constexpr double kRouteTolerance = 1e-10;

// Partial-pivot Gaussian elimination, in place. The chains here are tiny
// (M <= 1024) and tridiagonal, so a dense direct solve is plenty.
void dense_solve(std::vector<double>& A, std::vector<double>& b, int n) {
  const auto at = [&](int r, int c) -> double& { return A[static_cast<std::size_t>(r) * n + c]; };
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(at(col, col));
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(at(r, col)) > best) {
        best = std::abs(at(r, col));
        pivot = r;
      }
    }
    if (best == 0.0) throw InternalError("oracle: singular linear system for a valid chain");
    if (pivot != col) {
      for (int j = col; j < n; ++j) std::swap(at(pivot, j), at(col, j));
      std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
    }
    const double inv = 1.0 / at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = at(r, col) * inv;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) at(r, j) -= f * at(col, j);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<std::size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= at(r, j) * b[static_cast<std::size_t>(j)];
    b[static_cast<std::size_t>(r)] = s / at(r, r);
  }
}

void require_neutral(const SizeChain& chain, const char* op) {
  if (chain.lambda != 1.0)
    throw std::domain_error(std::string(op) + ": closed forms hold for the neutral chain only");
}

void validate_for_dense(const SizeChain& chain, const char* op) {
  if (chain.max_level < 2) throw std::domain_error(std::string(op) + ": max_level must be >= 2");
  if (chain.max_level > kMaxDenseLevel)
    throw std::invalid_argument(std::string(op) + ": dense solves support max_level <= 1024");
}

// One-step probabilities of the conditioned embedded walk on {0..M}:
// Doob transform of the neutral walk by h(j) = (M-j)/M (die before M) or
// h(j) = j/M (reach M before 0).
struct CondChain {
  int M;
  bool reach;
  double up(int k) const {
    return reach ? 0.5 * (k + 1.0) / k : 0.5 * (M - k - 1.0) / (M - k);
  }
  double down(int k) const {
    return reach ? 0.5 * (k - 1.0) / k : 0.5 * (M - k + 1.0) / (M - k);
  }
};

// Expected visits to each transient level 1..M-1 starting from 1:
// (I - Q^T) N = e_1 on the conditioned chain. Visits count the initial state.
std::vector<double> occupation_solve(const CondChain& c) {
  const int n = c.M - 1;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k <= n; ++k) {
    A[static_cast<std::size_t>(k - 1) * n + (k - 1)] = 1.0;
    if (k + 1 <= n) A[static_cast<std::size_t>(k) * n + (k - 1)] -= c.up(k);
    if (k - 1 >= 1) A[static_cast<std::size_t>(k - 2) * n + (k - 1)] -= c.down(k);
  }
  b[0] = 1.0;
  dense_solve(A, b, n);
  return b;
}

// P(hit `target` before absorption at 0 | start `from`), 1 <= from <= target.
// Paths cannot pass target from below, so states 1..target-1 close the system.
double hit_up(const CondChain& c, int from, int target) {
  if (from == target) return 1.0;
  const int n = target - 1;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (int j = 1; j <= n; ++j) {
    const int r = j - 1;
    A[static_cast<std::size_t>(r) * n + r] = 1.0;
    if (j + 1 < target)
      A[static_cast<std::size_t>(r) * n + (r + 1)] = -c.up(j);
    else
      b[static_cast<std::size_t>(r)] += c.up(j);  // f(target) = 1
    if (j >= 2) A[static_cast<std::size_t>(r) * n + (r - 1)] = -c.down(j);
  }
  dense_solve(A, b, n);
  return b[static_cast<std::size_t>(from - 1)];
}

// P(hit M before returning to `taboo` | start taboo+1) on the reach chain.
// States taboo+1..M-1 with f(taboo) = 0 and f(M) = 1.
double escape_to_top(const CondChain& c, int taboo) {
  if (taboo == c.M - 1) return 1.0;  // degenerate: the caller starts at M
  const int n = c.M - 1 - taboo;
  std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  for (int j = taboo + 1; j <= c.M - 1; ++j) {
    const int r = j - taboo - 1;
    A[static_cast<std::size_t>(r) * n + r] = 1.0;
    if (j + 1 <= c.M - 1)
      A[static_cast<std::size_t>(r) * n + (r + 1)] = -c.up(j);
    else
      b[static_cast<std::size_t>(r)] += c.up(j);  // f(M) = 1
    if (j - 1 > taboo) A[static_cast<std::size_t>(r) * n + (r - 1)] = -c.down(j);
  }
  dense_solve(A, b, n);
  return b[0];
}

double checked_pair(double a, double b, const char* op) {
  if (std::abs(a - b) > kRouteTolerance * std::max(1.0, std::abs(a)))
    throw InternalError(std::string(op) + ": closed-form sum and linear solve disagree");
  return a;
}

}  // namespace

double SizeChain::q(int k) const {
  if (k < 1) throw std::domain_error("SizeChain::q: level must be >= 1");
  if (d == 1) return 2.0;
  if (d == 2) {
    // ln k vanishes at k = 1; substitute ln(k+1) there (the boundary law is
    // asymptotic and the small-k bracket C k^{1/d} <= |bdry| <= 2dk allows it).
    const double log_k = k == 1 ? std::log(2.0) : std::log(static_cast<double>(k));
    return 4.0 * beta * k / log_k;
  }
  return 2.0 * d * beta * k;
}

SizeChain make_size_chain(int d, int max_level, double beta, double lambda) {
  if (d < 1 || d > 3) throw std::domain_error("make_size_chain: d must be 1, 2 or 3");
  if (max_level < 2) throw std::domain_error("make_size_chain: max_level must be >= 2");
  if (d >= 2 && !(beta > 0.0)) throw std::domain_error("make_size_chain: beta must be positive for d >= 2");
  if (!(lambda > 0.0)) throw std::domain_error("make_size_chain: lambda must be positive");
  return SizeChain{d, max_level, beta, lambda};
}

double conditioned_manhours_die_sum(const SizeChain& chain) {
  require_neutral(chain, "conditioned_manhours_die");
  const int M = chain.max_level;
  if (M < 2) throw std::domain_error("conditioned_manhours_die: max_level must be >= 2");
  double sum = 0.0;
  for (int k = 1; k < M; ++k) {
    const double frac = 1.0 - static_cast<double>(k) / M;
    sum += 2.0 * frac * frac / (1.0 - 1.0 / M) * k / chain.q(k);
  }
  return sum;
}

double conditioned_manhours_die_solve(const SizeChain& chain) {
  require_neutral(chain, "conditioned_manhours_die");
  validate_for_dense(chain, "conditioned_manhours_die");
  const CondChain c{chain.max_level, false};
  const auto visits = occupation_solve(c);
  double sum = 0.0;
  for (int k = 1; k < chain.max_level; ++k)
    sum += visits[static_cast<std::size_t>(k - 1)] * k / chain.q(k);
  return sum;
}

double conditioned_manhours_reach_sum(const SizeChain& chain) {
  require_neutral(chain, "conditioned_manhours_reach");
  const int M = chain.max_level;
  if (M < 2) throw std::domain_error("conditioned_manhours_reach: max_level must be >= 2");
  double sum = 0.0;
  for (int k = 1; k < M; ++k)
    sum += 2.0 * (M - k) * static_cast<double>(k) * k / (static_cast<double>(M) * chain.q(k));
  return sum;
}

double conditioned_manhours_reach_solve(const SizeChain& chain) {
  require_neutral(chain, "conditioned_manhours_reach");
  validate_for_dense(chain, "conditioned_manhours_reach");
  const CondChain c{chain.max_level, true};
  const auto visits = occupation_solve(c);
  double sum = 0.0;
  for (int k = 1; k < chain.max_level; ++k)
    sum += visits[static_cast<std::size_t>(k - 1)] * k / chain.q(k);
  return sum;
}

double conditioned_manhours_die(const SizeChain& chain) {
  validate_for_dense(chain, "conditioned_manhours_die");
  return checked_pair(conditioned_manhours_die_sum(chain), conditioned_manhours_die_solve(chain),
                      "conditioned_manhours_die");
}

double conditioned_manhours_reach(const SizeChain& chain) {
  validate_for_dense(chain, "conditioned_manhours_reach");
  return checked_pair(conditioned_manhours_reach_sum(chain), conditioned_manhours_reach_solve(chain),
                      "conditioned_manhours_reach");
}

std::vector<HitStats> hitting_and_visits(const SizeChain& chain) {
  require_neutral(chain, "hitting_and_visits");
  const int M = chain.max_level;
  if (M < 2) throw std::domain_error("hitting_and_visits: max_level must be >= 2");
  std::vector<HitStats> out;
  out.reserve(static_cast<std::size_t>(M - 1));
  for (int k = 1; k < M; ++k) {
    HitStats s;
    s.k = k;
    const double kd = k, Md = M;
    s.pbar_hit = (1.0 / kd) * (1.0 - kd / Md) / (1.0 - 1.0 / Md);
    s.pbar_noreturn = 0.5 * (1.0 / kd) / (1.0 - kd / Md);
    s.phat_noreturn = 0.5 * (1.0 / (Md - kd)) / (kd / Md);
    s.visits_die = s.pbar_hit / s.pbar_noreturn;
    s.visits_reach = 1.0 / s.phat_noreturn;
    out.push_back(s);
  }
  return out;
}

std::vector<HitStats> hitting_and_visits_solved(const SizeChain& chain) {
  require_neutral(chain, "hitting_and_visits");
  validate_for_dense(chain, "hitting_and_visits");
  const int M = chain.max_level;
  const CondChain die{M, false};
  const CondChain reach{M, true};
  const auto visits_die = occupation_solve(die);
  const auto visits_reach = occupation_solve(reach);
  std::vector<HitStats> out;
  out.reserve(static_cast<std::size_t>(M - 1));
  for (int k = 1; k < M; ++k) {
    HitStats s;
    s.k = k;
    s.pbar_hit = hit_up(die, 1, k);
    // Never returning to k requires the first step to go toward the absorbing
    // end, then avoiding k from there.
    s.pbar_noreturn = die.down(k) * (k == 1 ? 1.0 : 1.0 - hit_up(die, k - 1, k));
    s.phat_noreturn = reach.up(k) * escape_to_top(reach, k);
    s.visits_die = visits_die[static_cast<std::size_t>(k - 1)];
    s.visits_reach = visits_reach[static_cast<std::size_t>(k - 1)];
    out.push_back(s);
  }
  return out;
}

SmallFamilyBounds small_family_bounds(int d, double u2, double eps, double beta) {
  if (!(u2 > 0.0) || !(u2 < 1.0)) throw std::domain_error("small_family_bounds: u2 must lie in (0,1)");
  if (!(eps > 0.0)) throw std::domain_error("small_family_bounds: eps must be positive");
  SmallFamilyBounds out;
  if (d == 1) {
    const double s = std::cbrt(u2);
    out.n_scale = 1.0 / s;
    out.rate_die = s * eps * eps / 12.0;
    out.rate_notyet = s * eps * eps / 6.0;
  } else if (d == 2) {
    if (!(beta > 0.0)) throw std::domain_error("small_family_bounds: beta must be positive for d >= 2");
    const double s = std::sqrt(u2 * std::log(1.0 / u2));
    out.n_scale = 1.0 / s;
    out.rate_die = s * eps / (4.0 * beta);
    out.rate_notyet = s * eps / (24.0 * beta);
  } else if (d == 3) {
    if (!(beta > 0.0)) throw std::domain_error("small_family_bounds: beta must be positive for d >= 2");
    const double s = std::sqrt(u2);
    out.n_scale = 1.0 / s;
    out.rate_die = s * eps / (3.0 * d * beta);
    out.rate_notyet = s * eps / (6.0 * d * beta);
  } else {
    throw std::domain_error("small_family_bounds: d must be 1, 2 or 3");
  }
  out.total = out.rate_die + out.rate_notyet;
  return out;
}

double nu_exact(const SizeChain& chain, double u2, int truncation) {
  if (!(u2 >= 0.0)) throw std::domain_error("nu_exact: u2 must be >= 0");
  if (truncation < 2) throw std::domain_error("nu_exact: truncation must be >= 2");
  if (u2 == 0.0) return 0.0;
  const int K = truncation;
  // Generator equation with killing at rate u2*k, v(0) = 1, v(K) = 0:
  //   up(k) v(k+1) + down(k) v(k-1) - (up + down + u2 k) v(k) = 0,
  // up(k) = lambda q(k)/2, down(k) = q(k)/2 (neutral total rate q(k)).
  const int n = K - 1;
  std::vector<double> diag(static_cast<std::size_t>(n)), lower(static_cast<std::size_t>(n)),
      upper(static_cast<std::size_t>(n)), rhs(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < K; ++k) {
    const double up = chain.lambda * chain.q(k) / 2.0;
    const double down = chain.q(k) / 2.0;
    const auto i = static_cast<std::size_t>(k - 1);
    diag[i] = -(up + down + u2 * k);
    lower[i] = down;
    upper[i] = up;
  }
  rhs[0] = -lower[0];  // v(0) = 1 moved to the right-hand side
  // Thomas algorithm; strictly diagonally dominant, no pivoting needed.
  for (int i = 1; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    const double w = lower[s] / diag[s - 1];
    diag[s] -= w * upper[s - 1];
    rhs[s] -= w * rhs[s - 1];
  }
  std::vector<double> v(static_cast<std::size_t>(n));
  v[static_cast<std::size_t>(n - 1)] = rhs[static_cast<std::size_t>(n - 1)] / diag[static_cast<std::size_t>(n - 1)];
  for (int i = n - 2; i >= 0; --i) {
    const auto s = static_cast<std::size_t>(i);
    v[s] = (rhs[s] - upper[s] * v[s + 1]) / diag[s];
  }
  return 1.0 - v[0];
}

}  // namespace spmoran
