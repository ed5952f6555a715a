// Batch experiment runner for the spatial Moran / biased voter toolkit.
// Subcommands map one-to-one onto the library: estimate-nu, tau2, boundary,
// predict, diffusion, oracle, beta. Records are JSON lines, summaries a
// single JSON object; every output begins with a schema-version header
// carrying the resolved configuration.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spmoran/analytic.hpp"
#include "spmoran/diffusion.hpp"
#include "spmoran/engine.hpp"
#include "spmoran/errors.hpp"
#include "spmoran/oracle.hpp"
#include "spmoran/stats.hpp"

using nlohmann::json;
using namespace spmoran;

namespace {

constexpr int kSchemaVersion = 1;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapExhausted = 3;
constexpr int kExitInternal = 4;

int default_threads() {
  if (const char* env = std::getenv("SPMORAN_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Routes records and summaries to --out (JSON lines) and keeps the summary
/// on stdout so interactive runs stay readable.
class Output {
 public:
  Output(const std::string& path, const std::string& command, json config) : command_(command) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file: " + path);
    }
    json header{{"schema_version", kSchemaVersion}, {"tool", "spmoran"}, {"command", command}};
    header["config"] = std::move(config);
    line(header);
  }

  void record(const json& j) { line(j); }

  void summary(json j) {
    line(json{{"summary", j}});
    if (file_) std::cout << json{{"summary", j}}.dump(2) << "\n";
  }

 private:
  void line(const json& j) {
    if (file_)
      *file_ << j.dump() << "\n";
    else
      std::cout << j.dump() << "\n";
  }
  std::string command_;
  std::unique_ptr<std::ofstream> file_;
};

Dynamics parse_dynamics(const std::string& name) {
  if (name == "biased-voter") return Dynamics::BiasedVoter;
  if (name == "komarova") return Dynamics::Komarova;
  throw CLI::ValidationError("--dynamics", "must be biased-voter or komarova");
}

json regime_json(const Tau2RatePrediction& r, double N) {
  return json{{"inv_h", r.inv_h}, {"N", N}, {"g_over_u1", r.g_over_u1}, {"regime_ok", r.regime_ok}};
}

/// beta_d used by predictions: pi in d=2 (exact in the boundary law), a
/// Monte Carlo estimate in d=3 unless the user supplied one.
double resolve_beta(int dim, std::optional<double> flag, std::uint64_t seed, int threads,
                    json* note = nullptr) {
  if (dim == 1) return 0.0;
  if (flag) return *flag;
  if (dim == 2) return M_PI;
  const auto est = estimate_beta(3, 4000, 20'000, seed ^ 0xbeefULL, threads);
  if (note) (*note)["beta_estimate"] = {{"beta", est.beta}, {"stderr", est.stderr_}, {"reps", est.reps}};
  return est.beta;
}

struct CommonFlags {
  int dim = 1;
  double lambda = 1.0;
  std::uint64_t seed = 1;
  int threads = default_threads();
  std::string out;
  std::string dynamics = "biased-voter";
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_dynamics = true) {
  cmd->add_option("--dim", f.dim, "lattice dimension (1, 2 or 3)")->required()->check(CLI::Range(1, 3));
  cmd->add_option("--seed", f.seed, "base RNG seed; replica r uses stream (seed, r)")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads for replica-level parallelism")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "write JSON-lines output to this path");
  if (with_dynamics)
    cmd->add_option("--dynamics", f.dynamics, "biased-voter or komarova")->capture_default_str();
}

int cmd_estimate_nu(const CommonFlags& f, double u2, std::uint64_t reps, bool per_family,
                    std::uint64_t size_cap, double log_cap) {
  const auto t0 = std::chrono::steady_clock::now();
  SimParams p;
  p.geometry = Geometry::unbounded(f.dim);
  p.lambda = f.lambda;
  p.u2 = u2;
  p.dynamics = parse_dynamics(f.dynamics);
  p.seed = f.seed;
  p.validate();

  json config{{"dim", f.dim},        {"lambda", f.lambda}, {"u2", u2},
              {"reps", reps},        {"seed", f.seed},     {"threads", f.threads},
              {"size_cap", size_cap}, {"log_cap", log_cap}, {"dynamics", f.dynamics},
              {"per_family", per_family}};
  Output out(f.out, "estimate-nu", config);

  if (per_family) {
    SimParams runp = p;
    runp.u2 = 0.0;
    FamilyCaps caps;
    caps.size_cap = size_cap;
    caps.man_hours_cap = u2 > 0.0 ? log_cap / u2 : std::numeric_limits<double>::infinity();
    for (std::uint64_t rep = 0; rep < reps; ++rep) {
      RngStream rng(p.seed, rep);
      const auto fam = run_family(runp, caps, rng);
      out.record(json{{"rep", rep},
                      {"fate", static_cast<int>(fam.fate)},
                      {"man_hours", fam.man_hours},
                      {"max_size", fam.max_size},
                      {"t_end", fam.t_end},
                      {"n_up", fam.up_jumps},
                      {"n_down", fam.down_jumps}});
    }
  }
  const auto est = estimate_nu(p, reps, f.threads, log_cap, size_cap);
  json summary{{"nu_hat", est.nu_hat},
               {"stderr", est.stderr_},
               {"capped_families", est.capped_families},
               {"reps", est.reps},
               {"runtime_sec", elapsed_seconds(t0)}};
  out.summary(summary);
  return kExitOk;
}

int cmd_tau2(const CommonFlags& f, std::int32_t side, double u1, double u2, std::uint64_t reps,
             std::uint64_t budget) {
  const auto t0 = std::chrono::steady_clock::now();
  SimParams p;
  p.geometry = Geometry::torus(f.dim, side);
  p.lambda = f.lambda;
  p.u1 = u1;
  p.u2 = u2;
  p.dynamics = parse_dynamics(f.dynamics);
  p.seed = f.seed;
  p.validate();
  if (!(u1 > 0.0)) throw std::invalid_argument("tau2: u1 must be positive (no families can start)");
  if (!(u2 > 0.0)) throw std::invalid_argument("tau2: u2 must be positive (no type 2 can appear)");

  json config{{"dim", f.dim},   {"side", side},   {"lambda", f.lambda}, {"u1", u1},
              {"u2", u2},       {"reps", reps},   {"seed", f.seed},     {"threads", f.threads},
              {"budget", budget}, {"dynamics", f.dynamics}};
  Output out(f.out, "tau2", config);

  const auto samples = tau2_batch(p, reps, f.threads, budget);
  std::vector<double> taus, rhos;
  taus.reserve(samples.size());
  rhos.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    out.record(json{{"rep", i}, {"tau2", s.tau2}, {"rho2", s.rho2}, {"n_families", s.n_families}});
    taus.push_back(s.tau2);
    rhos.push_back(s.rho2);
  }

  const auto N = static_cast<double>(p.geometry.site_count());
  const double beta = f.dim == 1 ? 0.0 : (f.dim == 2 ? M_PI : 0.66);
  const auto rate = tau2_rate(N, u1, u2, f.dim, beta);
  const auto ci = mean_ci(taus, 0.95);
  double mean_rho = 0.0;
  for (const double r : rhos) mean_rho += r;
  mean_rho /= static_cast<double>(rhos.size());
  const auto ks = ks_exponential(taus, rate.rate);

  json summary{{"n", samples.size()},
               {"mean_tau2", ci.mean},
               {"mean_ci95_half_width", ci.half_width},
               {"rate_analytic", rate.rate},
               {"mean_pred", 1.0 / rate.rate},
               {"ks_statistic", ks.statistic},
               {"ks_p_value", ks.p_value},
               {"mean_rho2", mean_rho},
               {"excess_ratio", (ci.mean - mean_rho) / mean_rho},
               {"regime", regime_json(rate, N)},
               {"runtime_sec", elapsed_seconds(t0)}};
  out.summary(summary);
  return kExitOk;
}

int cmd_boundary(const CommonFlags& f, const std::vector<std::uint64_t>& levels, std::uint64_t reps,
                 bool csv) {
  const auto t0 = std::chrono::steady_clock::now();
  SimParams p;
  p.geometry = Geometry::unbounded(f.dim);
  p.seed = f.seed;
  p.validate();

  json config{{"dim", f.dim},     {"levels", levels},   {"reps", reps},
              {"seed", f.seed},   {"threads", f.threads}, {"csv", csv}};
  const auto rows = boundary_profile(p, levels, reps, f.threads);

  auto implied_beta = [&](const BoundaryRow& r) -> double {
    const auto k = static_cast<double>(r.level);
    if (f.dim == 2) return r.mean_pairs * std::log(k) / (4.0 * k);
    if (f.dim == 3) return r.mean_pairs / (2.0 * 3.0 * k);
    return 0.0;
  };

  if (csv) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!f.out.empty()) {
      file.open(f.out);
      if (!file) throw std::invalid_argument("cannot open output file: " + f.out);
      os = &file;
    }
    *os << "# schema_version=" << kSchemaVersion << " command=boundary config=" << config.dump()
        << "\n";
    *os << "k,boundary_mean,boundary_stderr,n_samples,beta_implied\n";
    for (const auto& r : rows)
      *os << r.level << ',' << r.mean_pairs << ',' << r.stderr_ << ',' << r.samples << ','
          << implied_beta(r) << "\n";
    return kExitOk;
  }

  Output out(f.out, "boundary", config);
  for (const auto& r : rows) {
    json rec{{"k", r.level},
             {"boundary_mean", r.mean_pairs},
             {"boundary_stderr", r.stderr_},
             {"n_samples", r.samples}};
    if (f.dim >= 2) rec["beta_implied"] = implied_beta(r);
    out.record(rec);
  }
  out.summary(json{{"levels", rows.size()}, {"runtime_sec", elapsed_seconds(t0)}});
  return kExitOk;
}

int cmd_predict(const CommonFlags& f, std::int32_t side, double u1, double u2,
                std::optional<double> beta_flag) {
  json note;
  const double beta = resolve_beta(f.dim, beta_flag, f.seed, f.threads, &note);
  const auto N = std::pow(static_cast<double>(side), f.dim);
  const auto p = make_predictions(f.dim, N, u1, u2, beta);
  json config{{"dim", f.dim}, {"side", side}, {"u1", u1}, {"u2", u2}, {"seed", f.seed}};
  if (beta_flag) config["beta"] = *beta_flag;
  Output out(f.out, "predict", config);
  json summary{{"d", p.d},
               {"h", p.h},
               {"g", p.g},
               {"n_scale", p.n_scale},
               {"a_n_scale", p.a_n_scale},
               {"beta", p.beta},
               {"gamma", p.gamma},
               {"nu_pred", p.nu_pred},
               {"rate", p.rate},
               {"mean_tau2_pred", p.rate > 0 ? 1.0 / p.rate : 0.0},
               {"regime", json{{"inv_h", p.inv_h}, {"N", N}, {"g_over_u1", p.g_over_u1},
                               {"regime_ok", p.regime_ok}}}};
  if (!note.is_null()) summary["notes"] = note;
  out.summary(summary);
  return kExitOk;
}

int cmd_diffusion(const CommonFlags& f, double eps, double dt, double u2, std::uint64_t reps,
                  std::optional<double> beta_flag) {
  const auto t0 = std::chrono::steady_clock::now();
  json note;
  const double beta = resolve_beta(f.dim, beta_flag, f.seed, f.threads, &note);

  json config{{"dim", f.dim}, {"eps", eps},   {"dt", dt},          {"u2", u2},
              {"reps", reps}, {"seed", f.seed}, {"threads", f.threads}};
  if (beta_flag) config["beta"] = *beta_flag;
  Output out(f.out, "diffusion", config);

  DiffusionParams p;
  p.d = f.dim;
  p.beta = beta;
  p.eps = eps;
  p.dt = dt;
  p.kill_rate_scale = 1.0;
  const auto f_est = estimate_F_eps(p, reps, f.seed, f.threads);
  const auto pred = nu_epsilon_prediction(f.dim, u2, eps, reps, f.seed + 1, f.threads, beta, dt);
  const double gamma = gamma_d(f.dim, beta);

  json summary{{"F_eps", f_est.value},
               {"F_stderr", f_est.stderr_},
               {"F_over_eps", f_est.value / eps},
               {"gamma_target", gamma},
               {"nu_eps_prediction", pred.value},
               {"nu_eps_stderr", pred.stderr_},
               {"n_scale", pred.n_scale},
               {"kill_rate", pred.c},
               {"nu_pred_asymptotic", gamma * h_d(f.dim, u2)},
               {"horizon_hits", f_est.horizon_hits},
               {"runtime_sec", elapsed_seconds(t0)}};
  if (!note.is_null()) summary["notes"] = note;
  out.summary(summary);
  return kExitOk;
}

int cmd_oracle(const CommonFlags& f, int max_level, double u2, double eps,
               std::optional<double> beta_flag) {
  json note;
  const double beta = resolve_beta(f.dim, beta_flag, f.seed, f.threads, &note);
  json config{{"dim", f.dim}, {"max_level", max_level}, {"u2", u2}, {"eps", eps},
              {"lambda", f.lambda}};
  if (beta_flag) config["beta"] = *beta_flag;
  Output out(f.out, "oracle", config);

  const auto chain = make_size_chain(f.dim, max_level, beta, f.lambda);
  json summary;
  if (f.lambda == 1.0) {
    summary["manhours_die_sum"] = conditioned_manhours_die_sum(chain);
    summary["manhours_die_solve"] = conditioned_manhours_die_solve(chain);
    summary["manhours_reach_sum"] = conditioned_manhours_reach_sum(chain);
    summary["manhours_reach_solve"] = conditioned_manhours_reach_solve(chain);
  }
  const auto b = small_family_bounds(f.dim, u2, eps, beta);
  summary["lemma2"] = json{{"n_scale", b.n_scale},
                           {"rate_die", b.rate_die},
                           {"rate_notyet", b.rate_notyet},
                           {"total", b.total}};
  const int truncation = std::max(1000, 40 * static_cast<int>(b.n_scale));
  summary["nu_exact_chain"] = nu_exact(chain, u2, truncation);
  if (!note.is_null()) summary["notes"] = note;
  out.summary(summary);
  return kExitOk;
}

int cmd_beta(const CommonFlags& f, std::uint64_t walk_steps, std::uint64_t reps) {
  const auto t0 = std::chrono::steady_clock::now();
  json config{{"dim", f.dim}, {"walk_steps", walk_steps}, {"reps", reps}, {"seed", f.seed},
              {"threads", f.threads}};
  Output out(f.out, "beta", config);
  const auto est = estimate_beta(f.dim, walk_steps, reps, f.seed, f.threads);
  out.summary(json{{"beta", est.beta},
                   {"stderr", est.stderr_},
                   {"reps", est.reps},
                   {"absorbed", est.absorbed},
                   {"gamma3", 1.0 / std::sqrt(est.beta)},
                   {"runtime_sec", elapsed_seconds(t0)}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spmoran: spatial Moran / biased voter tunneling experiments"};
  app.require_subcommand(1);

  CommonFlags nu_f, tau_f, bdy_f, pred_f, diff_f, orc_f, beta_f;

  auto* nu = app.add_subcommand("estimate-nu", "tunneling probability from single families");
  double nu_u2 = 0.0;
  std::uint64_t nu_reps = 100'000, nu_size_cap = 10'000'000;
  double nu_log_cap = 20.0;
  bool nu_per_family = false;
  add_common(nu, nu_f);
  nu->add_option("--lambda", nu_f.lambda, "relative fitness of type-1 cells")->capture_default_str();
  nu->add_option("--u2", nu_u2, "mutation rate 1 -> 2")->required();
  nu->add_option("--reps", nu_reps, "number of families")->capture_default_str();
  nu->add_option("--size-cap", nu_size_cap, "hard cap on family size")->capture_default_str();
  nu->add_option("--log-cap", nu_log_cap, "stop once u2 * man_hours exceeds this")->capture_default_str();
  nu->add_flag("--per-family", nu_per_family, "emit one record per family");
  nu->set_config("--config");

  auto* tau = app.add_subcommand("tau2", "waiting time for the first type-2 cell on the torus");
  std::int32_t tau_side = 0;
  double tau_u1 = 0.0, tau_u2 = 0.0;
  std::uint64_t tau_reps = 500, tau_budget = 1'000'000'000;
  add_common(tau, tau_f);
  tau->add_option("--side", tau_side, "torus side L (N = L^dim)")->required();
  tau->add_option("--lambda", tau_f.lambda, "relative fitness of type-1 cells")->capture_default_str();
  tau->add_option("--u1", tau_u1, "mutation rate 0 -> 1")->required();
  tau->add_option("--u2", tau_u2, "mutation rate 1 -> 2")->required();
  tau->add_option("--reps", tau_reps, "number of independent runs")->capture_default_str();
  tau->add_option("--budget", tau_budget, "per-run event budget")->capture_default_str();
  tau->set_config("--config");

  auto* bdy = app.add_subcommand("boundary", "mean discordant boundary at first hitting times");
  std::vector<std::uint64_t> bdy_levels;
  std::uint64_t bdy_reps = 100;
  bool bdy_csv = false;
  add_common(bdy, bdy_f, false);
  bdy->add_option("--levels", bdy_levels, "family sizes to sample at")->required()->delimiter(',');
  bdy->add_option("--reps", bdy_reps, "families required at the top level")->capture_default_str();
  bdy->add_flag("--csv", bdy_csv, "emit a CSV table instead of JSON lines");
  bdy->set_config("--config");

  auto* pred = app.add_subcommand("predict", "closed-form predictions for a parameter set");
  std::int32_t pred_side = 0;
  double pred_u1 = 0.0, pred_u2 = 0.0;
  std::optional<double> pred_beta;
  add_common(pred, pred_f, false);
  pred->add_option("--side", pred_side, "torus side L (N = L^dim)")->required();
  pred->add_option("--u1", pred_u1, "mutation rate 0 -> 1")->required();
  pred->add_option("--u2", pred_u2, "mutation rate 1 -> 2")->required();
  pred->add_option("--beta", pred_beta, "boundary constant beta_d (default: pi in d=2, MC in d=3)");
  pred->set_config("--config");

  auto* diff = app.add_subcommand("diffusion", "size-limit diffusion functionals");
  double diff_eps = 0.01, diff_dt = 0.0, diff_u2 = 0.0;
  std::uint64_t diff_reps = 100'000;
  std::optional<double> diff_beta;
  add_common(diff, diff_f, false);
  diff->add_option("--eps", diff_eps, "initial value Y0")->capture_default_str();
  diff->add_option("--dt", diff_dt, "base time step near the boundary (0 = eps/1000)")
      ->capture_default_str();
  diff->add_option("--u2", diff_u2, "mutation rate defining the kill-rate scale")->required();
  diff->add_option("--reps", diff_reps, "number of paths")->capture_default_str();
  diff->add_option("--beta", diff_beta, "boundary constant beta_d");
  diff->set_config("--config");

  auto* orc = app.add_subcommand("oracle", "exact birth-death chain computations");
  int orc_max_level = 0;
  double orc_u2 = 0.0, orc_eps = 0.0;
  std::optional<double> orc_beta;
  add_common(orc, orc_f, false);
  orc->add_option("--lambda", orc_f.lambda, "bias of the size chain")->capture_default_str();
  orc->add_option("--max-level", orc_max_level, "absorbing level n*eps")->required();
  orc->add_option("--u2", orc_u2, "mutation rate 1 -> 2")->required();
  orc->add_option("--eps", orc_eps, "epsilon of the small-family bounds")->required();
  orc->add_option("--beta", orc_beta, "boundary constant beta_d");
  orc->set_config("--config");

  auto* bw = app.add_subcommand("beta", "Monte Carlo estimate of the escape constant beta_3");
  std::uint64_t bw_steps = 4000, bw_reps = 20'000;
  add_common(bw, beta_f, false);
  bw->add_option("--walk-steps", bw_steps, "steps before the tail correction")->capture_default_str();
  bw->add_option("--reps", bw_reps, "number of difference walks")->capture_default_str();
  bw->set_config("--config");

  try {
    app.parse(argc, argv);
    if (nu->parsed()) return cmd_estimate_nu(nu_f, nu_u2, nu_reps, nu_per_family, nu_size_cap, nu_log_cap);
    if (tau->parsed()) return cmd_tau2(tau_f, tau_side, tau_u1, tau_u2, tau_reps, tau_budget);
    if (bdy->parsed()) return cmd_boundary(bdy_f, bdy_levels, bdy_reps, bdy_csv);
    if (pred->parsed()) return cmd_predict(pred_f, pred_side, pred_u1, pred_u2, pred_beta);
    if (diff->parsed()) return cmd_diffusion(diff_f, diff_eps, diff_dt, diff_u2, diff_reps, diff_beta);
    if (orc->parsed()) return cmd_oracle(orc_f, orc_max_level, orc_u2, orc_eps, orc_beta);
    if (bw->parsed()) return cmd_beta(beta_f, bw_steps, bw_reps);
    return kExitConfig;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const CapExhaustedError& e) {
    std::cerr << "error (cap exhausted): " << e.what() << "\n";
    return kExitCapExhausted;
  } catch (const InternalError& e) {
    std::cerr << "error (internal invariant): " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
