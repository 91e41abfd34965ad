#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shm/cli.hpp"
#include "shm/errors.hpp"

using namespace shm;
using namespace shm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "shm_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_args(std::vector<std::string> args) {
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

RunConfig quick_sweep() {
  RunConfig cfg;
  cfg.solver.grid_size = 4000;
  cfg.m_min = 0.3;
  cfg.m_max = 0.5;
  cfg.m_steps = 5;
  return cfg;
}

}  // namespace

TEST_CASE("settings and config files") {
  RunConfig cfg;
  apply_setting(cfg, "eps", "1e-4");
  apply_setting(cfg, "levels", "-1,-0.5,0,0.5,1");
  apply_setting(cfg, "freq-a", "1,3");
  apply_setting(cfg, "target-a", "0.2,0.1");
  CHECK(cfg.solver.epsilon == 1e-4);
  CHECK(cfg.solver.levels == LevelSet(5));
  CHECK(cfg.freq_a == std::vector<int>{1, 3});
  CHECK(cfg.spec().a_target == std::vector<double>{0.2, 0.1});
  CHECK(cfg.spec().b_target == std::vector<double>(5, 0.0));

  apply_setting(cfg, "levels", "9");
  CHECK(cfg.solver.levels.size() == 9);

  CHECK_THROWS_AS(apply_setting(cfg, "eps", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "no-such-key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "levels", "-1,0.5"), ConfigError);

  const fs::path file = scratch("settings.cfg");
  std::ofstream(file) << "# comment\neps = 2e-5\n\ngrid = 3000   # trailing\nm-steps = 3\n";
  const RunConfig loaded = load_config_file(file.string(), RunConfig{});
  CHECK(loaded.solver.epsilon == 2e-5);
  CHECK(loaded.solver.grid_size == 3000);
  CHECK(loaded.m_steps == 3);
  CHECK_THROWS_AS(load_config_file((scratch("missing.cfg")).string(), RunConfig{}), ConfigError);

  RunConfig bad;
  bad.m_min = 1.0;
  bad.m_max = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sweep indices") {
  RunConfig cfg;
  const std::vector<double> m = cfg.modulation_indices();
  REQUIRE(m.size() == 33);
  CHECK(m.front() == -0.8);
  CHECK(m.back() == 0.8);
  CHECK(m[16] == 0.0);
  cfg.m_steps = 1;
  cfg.m_min = cfg.m_max = 0.0;
  CHECK(cfg.modulation_indices() == std::vector<double>{0.0});
  const HarmonicSpec s = cfg.sweep_spec(0.4);
  CHECK(s.a_target == std::vector<double>{0.4, 0, 0, 0, 0});
  CHECK(s.b_target == std::vector<double>{0.4, 0, 0, 0, 0});
}

TEST_CASE("flags override config file which overrides the environment") {
  const fs::path file = scratch("precedence.cfg");
  const fs::path out = scratch("precedence.json");
  std::ofstream(file) << "eps = 1e-4\ngrid = 3000\n";
  setenv(kGridEnvVar, "2500", 1);
  CHECK(RunConfig::defaults().solver.grid_size == 2500);
  REQUIRE(run_args({"shm", "solve", "--config", file.string(), "--grid", "2000", "--out", out.string()}) == 0);
  const ParsedResult parsed = report_from_json(nlohmann::json::parse(slurp(out)));
  CHECK(parsed.solver.grid_size == 2000);
  CHECK(parsed.solver.epsilon == 1e-4);

  REQUIRE(run_args({"shm", "solve", "--out", out.string()}) == 0);
  CHECK(report_from_json(nlohmann::json::parse(slurp(out))).solver.grid_size == 2500);
  unsetenv(kGridEnvVar);
}

TEST_CASE("exit codes") {
  const fs::path out = scratch("exit.json");
  CHECK(run_args({"shm", "solve", "--grid", "2000", "--out", out.string()}) == 0);
  const ParsedResult zero = report_from_json(nlohmann::json::parse(slurp(out)));
  CHECK(zero.status == "ok");
  CHECK(zero.report.signal.switches() == 0);
  CHECK(zero.report.signal.levels == std::vector<double>{0.0});
  CHECK(zero.report.residual_norm == 0.0);

  CHECK(run_args({"shm", "solve", "--grid", "2000", "--target-a", "10,0,0,0,0", "--out", out.string()}) == 1);
  CHECK(report_from_json(nlohmann::json::parse(slurp(out))).status == "residual_above_bound");

  CHECK(run_args({"shm", "solve", "--eps", "oops"}) == 2);
  CHECK(run_args({"shm", "solve", "--bogus", "1"}) == 2);
  CHECK(run_args({"shm", "solve", "--config", scratch("nope.cfg").string()}) == 2);
  CHECK(run_args({"shm", "sweep", "--m-min", "1", "--m-max", "0"}) == 2);
  CHECK(run_args({"shm"}) == 2);
}

TEST_CASE("json round trip") {
  RunConfig cfg;
  cfg.solver.grid_size = 4000;
  cfg.target_a = std::vector<double>{0.5, 0, 0, 0, 0};
  cfg.target_b = std::vector<double>{0.5, 0, 0, 0, 0};
  const HarmonicSpec spec = cfg.spec();
  const SolveReport report = minimize(spec, cfg.solver);
  const nlohmann::json doc = report_to_json(report, spec, cfg.solver);
  const ParsedResult back = report_from_json(nlohmann::json::parse(doc.dump(2)));

  CHECK(back.spec.ea == spec.ea);
  CHECK(back.spec.a_target == spec.a_target);
  CHECK(back.spec.b_target == spec.b_target);
  CHECK(back.solver.levels == cfg.solver.levels);
  CHECK(back.solver.epsilon == cfg.solver.epsilon);
  CHECK(back.solver.mu_schedule == cfg.solver.mu_schedule);
  CHECK(back.status == solve_status(report, cfg.solver));
  CHECK(back.report.signal == report.signal);
  CHECK(back.report.p_opt == report.p_opt);
  CHECK(back.report.x_terminal == report.x_terminal);
  CHECK(back.report.achieved.a == report.achieved.a);
  CHECK(back.report.achieved.b == report.achieved.b);
  CHECK(back.report.residual_norm == report.residual_norm);
  CHECK(back.report.duality_gap_check == report.duality_gap_check);
  CHECK(back.report.objective_value == report.objective_value);
  CHECK(back.report.iterations == report.iterations);
  REQUIRE(back.report.log.size() == report.log.size());
  for (size_t i = 0; i < report.log.size(); ++i) {
    CHECK(back.report.log[i].mu == report.log[i].mu);
    CHECK(back.report.log[i].objective == report.log[i].objective);
    CHECK(back.report.log[i].grad_norm == report.log[i].grad_norm);
    CHECK(back.report.log[i].iterations == report.log[i].iterations);
  }
  CHECK(report_to_json(back.report, back.spec, back.solver) == doc);
}

TEST_CASE("identical configs give byte-identical files") {
  const fs::path a = scratch("det_a.csv");
  const fs::path b = scratch("det_b.csv");
  const std::vector<std::string> common{"shm", "sweep", "--grid", "2000", "--m-min", "0.2", "--m-max", "0.4",
                                        "--m-steps", "3", "--stride", "10"};
  std::vector<std::string> args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(run_args(args_a) == 0);
  REQUIRE(run_args(args_b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".summary.csv") == slurp(b.string() + ".summary.csv"));

  const fs::path ja = scratch("det_a.json");
  const fs::path jb = scratch("det_b.json");
  REQUIRE(run_args({"shm", "solve", "--grid", "2000", "--target-b", "0.3,0,0,0,0", "--out", ja.string()}) == 0);
  REQUIRE(run_args({"shm", "solve", "--grid", "2000", "--target-b", "0.3,0,0,0,0", "--out", jb.string()}) == 0);
  CHECK(slurp(ja) == slurp(jb));
}

TEST_CASE("sweep outputs") {
  RunConfig single;
  single.solver.grid_size = 2000;
  single.m_min = single.m_max = 0.0;
  single.m_steps = 1;
  const std::vector<SweepPoint> zero = run_sweep(single);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].status == "ok");
  CHECK(zero[0].report.signal.switches() == 0);
  CHECK(zero[0].report.p_opt.isZero(0.0));

  RunConfig cfg = quick_sweep();
  const std::vector<SweepPoint> points = run_sweep(cfg);
  std::stringstream table;
  write_sweep_table(points, TimeGrid(cfg.solver.grid_size), 1, table);
  std::string line;
  std::getline(table, line);
  CHECK(line == "m,t,u");
  std::set<double> seen;
  size_t rows = 0;
  while (std::getline(table, line)) {
    ++rows;
    seen.insert(std::stod(line.substr(line.rfind(',') + 1)));
  }
  CHECK(rows == points.size() * static_cast<size_t>(cfg.solver.grid_size + 1));
  for (double u : seen) CHECK((u == -1.0 || u == 0.0 || u == 1.0));
  for (const SweepPoint& pt : points) CHECK(pt.report.staircase_valid);

  std::stringstream summary;
  write_sweep_summary(points, cfg.solver, summary);
  std::getline(summary, line);
  CHECK(line.rfind("m,status,", 0) == 0);
  size_t summary_rows = 0;
  while (std::getline(summary, line)) ++summary_rows;
  CHECK(summary_rows == points.size());
}

TEST_CASE("warm starts reduce iterations along the default sweep") {
  RunConfig warm;
  RunConfig cold = warm;
  cold.warm_start = false;
  cold.threads = 4;
  const std::vector<SweepPoint> w = run_sweep(warm);
  const std::vector<SweepPoint> c = run_sweep(cold);
  REQUIRE(w.size() == c.size());
  int fewer = 0, steps = 0;
  for (size_t i = 1; i < w.size(); ++i) {
    CHECK(w[i].status == "ok");
    CHECK(c[i].status == "ok");
    if (w[i].m == 0.0) continue;  // the zero target needs no iterations either way
    ++steps;
    if (w[i].report.iterations < c[i].report.iterations) ++fewer;
  }
  MESSAGE("warm start used fewer iterations on " << fewer << "/" << steps << " steps");
  CHECK(fewer >= 0.8 * steps);
}
