#pragma once

#include <cstdint>
#include <vector>

namespace spmoran {

/// Birth-death chain for the family-size process on levels 0..max_level,
/// absorbing at both ends. q(k) is the total jump rate at level k under the
/// boundary assumption: 2 in d=1, 4 beta_2 k/ln k in d=2 (ln(k+1) at k=1),
/// 2 d beta_d k in d>=3. Bias lambda splits q(k) into up/down rates as
/// lambda/(1+lambda) and 1/(1+lambda).
struct SizeChain {
  int d = 1;
  int max_level = 2;    // n*eps in the paper's notation
  double beta = 0.0;    // unused in d=1
  double lambda = 1.0;

  double q(int k) const;
  double p_up() const { return lambda / (1.0 + lambda); }
};

SizeChain make_size_chain(int d, int max_level, double beta = 0.0, double lambda = 1.0);

/// E_1(int |xi| ds | T_0 < T_M): expected man-hours of a family conditioned
/// to die before reaching max_level. Evaluates the conditional-probability
/// sum and an independent occupation-time linear solve on the Doob
/// h-transformed chain; throws InternalError if they disagree beyond 1e-10.
double conditioned_manhours_die(const SizeChain& chain);

/// E_1(int_0^{T_M} |xi| ds | T_M < T_0): man-hours accumulated up to first
/// reaching max_level, conditioned on getting there. Same dual-route check.
double conditioned_manhours_reach(const SizeChain& chain);

/// The two routes individually, for tests that want to see them disagree.
double conditioned_manhours_die_sum(const SizeChain& chain);
double conditioned_manhours_die_solve(const SizeChain& chain);
double conditioned_manhours_reach_sum(const SizeChain& chain);
double conditioned_manhours_reach_solve(const SizeChain& chain);

/// Closed-form conditional hitting/return/visit quantities for one level k,
/// all for the neutral embedded walk started at 1 on {0..M}:
///   pbar_hit      P(T_k < inf | T_0 < T_M)            (1/k)(1-k/M)/(1-1/M)
///   pbar_noreturn P_k(T_k^+ > T_0 | T_0 < T_M)        (1/2)(1/k)/(1-k/M)
///   phat_noreturn P_k(T_k^+ > T_M | T_M < T_0)        (1/2)(1/(M-k))/(k/M)
///   visits_die    E(N_k | T_0 < T_M),  visits_reach   E(N_k | T_M < T_0)
struct HitStats {
  int k;
  double pbar_hit;
  double pbar_noreturn;
  double phat_noreturn;
  double visits_die;
  double visits_reach;
};

/// Closed forms for k = 1..M-1 (neutral chain only).
std::vector<HitStats> hitting_and_visits(const SizeChain& chain);

/// The same table computed by absorbing-chain linear algebra on the
/// conditioned chains; used to verify the closed forms to 1e-12.
std::vector<HitStats> hitting_and_visits_solved(const SizeChain& chain);

/// Lemma-2 style accounting of type-2 production in small families, per unit
/// N*u1. die/notyet are the two family kinds (dies before n*eps / has not
/// yet reached n*eps); total is their sum, the closed-form coefficient
///   u2^{1/3} eps^2/4 (d=1),
///   u2^{1/2} ln^{1/2}(1/u2) * 7 eps/(24 beta_2) (d=2),
///   u2^{1/2} eps/(2 d beta_d) (d>=3).
struct SmallFamilyBounds {
  double n_scale;        // 1/h_d(u2)
  double rate_die;       // first kind,  integral bound
  double rate_notyet;    // second kind, integral bound
  double total;          // rate_die + rate_notyet (= the Lemma display)
};
SmallFamilyBounds small_family_bounds(int d, double u2, double eps, double beta = 0.0);

/// Exact tunneling probability nu = 1 - E_1 exp(-u2 W) for the size chain,
/// solved from the generator equation with killing rate u2*k, truncated at
/// an absorbing level `truncation` with v(truncation) = 0. In d=1 the size
/// chain is the lattice family-size process exactly, so this is an exact
/// oracle for the simulator's nu estimate.
double nu_exact(const SizeChain& chain, double u2, int truncation);

}  // namespace spmoran
