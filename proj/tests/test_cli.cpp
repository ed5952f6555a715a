#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "spmoran_cli_stdout.txt";
  const std::string cmd = std::string(SPMORAN_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(raw), ss.str()};
}

std::vector<json> parse_lines(const std::string& text) {
  std::vector<json> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] != '{') continue;
    out.push_back(json::parse(line));
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// record lines only (no header, no summary): the determinism contract
std::vector<std::string> record_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.find("schema_version") != std::string::npos) continue;
    if (line.find("\"summary\"") != std::string::npos) continue;
    if (!line.empty() && line[0] == '{') out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("predict emits the analytic rate") {
  const auto r = run_cli("predict --dim 1 --side 1000 --u1 1e-8 --u2 1e-6");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0]["schema_version"] == 1);
  CHECK(lines[0]["command"] == "predict");
  const auto& s = lines[1]["summary"];
  CHECK(std::abs(s["rate"].get<double>() - 7.2901e-8) / 7.2901e-8 < 1e-4);
  CHECK(s["regime"]["regime_ok"].get<bool>());
}

TEST_CASE("estimate-nu with u2 = 0 returns exactly zero") {
  const auto r = run_cli("estimate-nu --dim 1 --u2 0 --reps 10 --seed 3");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  const auto& s = lines.back()["summary"];
  CHECK(s["nu_hat"].get<double>() == 0.0);
}

TEST_CASE("tau2 with u1 = 0 is a config error with exit code 2") {
  const auto r = run_cli("tau2 --dim 1 --side 100 --u1 0 --u2 1e-3 --reps 5");
  CHECK(r.exit_code == 2);
}

TEST_CASE("unknown flags are config errors") {
  CHECK(run_cli("estimate-nu --dim 1 --u2 1e-4 --no-such-flag").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
}

TEST_CASE("records are byte-identical across thread counts") {
  const fs::path out1 = fs::temp_directory_path() / "spmoran_t1.jsonl";
  const fs::path out2 = fs::temp_directory_path() / "spmoran_t4.jsonl";
  const std::string base = "tau2 --dim 1 --side 200 --u1 1e-5 --u2 1e-3 --reps 40 --seed 99";
  REQUIRE(run_cli(base + " --threads 1 --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + " --threads 4 --out " + out2.string()).exit_code == 0);
  const auto r1 = record_lines(slurp(out1));
  const auto r2 = record_lines(slurp(out2));
  REQUIRE(r1.size() == 40);
  CHECK(r1 == r2);
}

TEST_CASE("config file reproduces the flag run") {
  const fs::path cfg = fs::temp_directory_path() / "spmoran_cfg.ini";
  {
    std::ofstream f(cfg);
    f << "dim=1\nside=150\nu1=1e-5\nu2=1e-3\nreps=12\nseed=7\nthreads=2\n";
  }
  const fs::path out1 = fs::temp_directory_path() / "spmoran_cfg_a.jsonl";
  const fs::path out2 = fs::temp_directory_path() / "spmoran_cfg_b.jsonl";
  REQUIRE(run_cli("tau2 --config " + cfg.string() + " --out " + out1.string()).exit_code == 0);
  REQUIRE(run_cli("tau2 --dim 1 --side 150 --u1 1e-5 --u2 1e-3 --reps 12 --seed 7 --threads 2 --out " +
                  out2.string())
              .exit_code == 0);
  CHECK(record_lines(slurp(out1)) == record_lines(slurp(out2)));
  // resolved config is echoed in the header
  const auto head = parse_lines(slurp(out1)).front();
  CHECK(head["config"]["side"] == 150);
  CHECK(head["config"]["seed"] == 7);
}

TEST_CASE("tau2 summary carries the analytic rate, KS report and regime diagnostics") {
  const auto r = run_cli("tau2 --dim 1 --side 200 --u1 1e-5 --u2 1e-3 --reps 60 --seed 11");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  const auto& s = lines.back()["summary"];
  CHECK(s.contains("rate_analytic"));
  CHECK(s.contains("ks_p_value"));
  CHECK(s.contains("regime"));
  CHECK(s["n"] == 60);
  for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
    CHECK(lines[i]["tau2"].get<double>() >= lines[i]["rho2"].get<double>());
  }
}

TEST_CASE("boundary emits a table, and CSV export works") {
  const auto r = run_cli("boundary --dim 1 --levels 5,20 --reps 50 --seed 2");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  bool saw5 = false, saw20 = false;
  for (const auto& l : lines) {
    if (!l.contains("k")) continue;
    if (l["k"] == 5) {
      saw5 = true;
      CHECK(l["boundary_mean"].get<double>() == 2.0);
    }
    if (l["k"] == 20) saw20 = true;
  }
  CHECK(saw5);
  CHECK(saw20);

  const fs::path out = fs::temp_directory_path() / "spmoran_boundary.csv";
  REQUIRE(run_cli("boundary --dim 2 --levels 5,20 --reps 40 --seed 2 --csv --out " + out.string())
              .exit_code == 0);
  const auto text = slurp(out);
  CHECK(text.find("# schema_version=1") == 0);
  CHECK(text.find("k,boundary_mean,boundary_stderr,n_samples,beta_implied") != std::string::npos);
}

TEST_CASE("diffusion summary exposes F_eps and the gamma target") {
  const auto r = run_cli("diffusion --dim 1 --eps 0.05 --u2 1e-6 --reps 4000 --seed 5");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  const auto& s = lines.back()["summary"];
  CHECK(s.contains("F_eps"));
  CHECK(s.contains("gamma_target"));
  CHECK(s["F_eps"].get<double>() > 0.0);
}

TEST_CASE("oracle prints both routes and the Lemma 2 coefficients") {
  const auto r = run_cli("oracle --dim 1 --max-level 4 --u2 1e-6 --eps 0.1");
  REQUIRE(r.exit_code == 0);
  const auto lines = parse_lines(r.stdout_text);
  const auto& s = lines.back()["summary"];
  CHECK(std::abs(s["manhours_die_sum"].get<double>() - 5.0 / 3.0) < 1e-12);
  CHECK(std::abs(s["manhours_die_solve"].get<double>() - 5.0 / 3.0) < 1e-10);
  CHECK(std::abs(s["manhours_reach_sum"].get<double>() - 5.0) < 1e-12);
  CHECK(s["lemma2"]["total"].get<double>() ==
        doctest::Approx(0.0025 * std::cbrt(1e-6)).epsilon(1e-10));
}
