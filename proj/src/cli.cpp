#include "shm/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>

#include "shm/errors.hpp"
#include "shm/waveform.hpp"

namespace shm::cli {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("'" + key + "': not a number: '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("'" + key + "': not an integer: '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("'" + key + "': not a boolean: '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  const std::string t = trim(text);
  if (t.empty()) return items;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(parse_double(key, item));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) out.push_back(parse_int(key, item));
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join17(const std::vector<double>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += fmt17(values[i]);
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write to '" + path + "'");
  return os;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  if (const char* env = std::getenv(kGridEnvVar); env && *env) {
    cfg.solver.grid_size = parse_int(kGridEnvVar, env);
  }
  return cfg;
}

HarmonicSpec RunConfig::spec() const {
  HarmonicSpec s;
  s.ea = freq_a;
  s.eb = freq_b;
  s.a_target = target_a.value_or(std::vector<double>(freq_a.size(), 0.0));
  s.b_target = target_b.value_or(std::vector<double>(freq_b.size(), 0.0));
  return s;
}

HarmonicSpec RunConfig::sweep_spec(double m) const {
  HarmonicSpec s;
  s.ea = freq_a;
  s.eb = freq_b;
  s.a_target.assign(freq_a.size(), 0.0);
  s.b_target.assign(freq_b.size(), 0.0);
  if (!s.a_target.empty()) s.a_target.front() = m;
  if (!s.b_target.empty()) s.b_target.front() = m;
  return s;
}

std::vector<double> RunConfig::modulation_indices() const {
  std::vector<double> ms(static_cast<size_t>(m_steps));
  for (int k = 0; k < m_steps; ++k) {
    ms[static_cast<size_t>(k)] = m_steps == 1 ? m_min : (m_min * (m_steps - 1 - k) + m_max * k) / (m_steps - 1);
  }
  return ms;
}

void RunConfig::validate() const {
  try {
    solver.validate();
    spec().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(m_min <= m_max)) throw ConfigError("m-min must not exceed m-max");
  if (m_steps < 1) throw ConfigError("m-steps must be at least 1");
  if (format != "json" && format != "csv") throw ConfigError("format must be json or csv");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (stride < 1) throw ConfigError("stride must be at least 1");
  if (out.empty()) throw ConfigError("output path must not be empty");
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{
      "eps",      "grid",        "levels",   "freq-a",  "freq-b",    "target-a",   "target-b",
      "m-min",    "m-max",       "m-steps",  "out",     "summary",   "format",     "mu-schedule",
      "grad-tol", "max-iter",    "snap-tol", "min-dwell", "warm-mu", "warm-start", "threads", "stride"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "eps") {
    cfg.solver.epsilon = parse_double(key, value);
  } else if (key == "grid") {
    cfg.solver.grid_size = parse_int(key, value);
  } else if (key == "levels") {
    const std::vector<double> levels = parse_doubles(key, value);
    try {
      cfg.solver.levels = levels.size() == 1 ? LevelSet(static_cast<int>(levels[0])) : LevelSet::from_values(levels);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("'levels': ") + e.what());
    }
  } else if (key == "freq-a") {
    cfg.freq_a = parse_ints(key, value);
  } else if (key == "freq-b") {
    cfg.freq_b = parse_ints(key, value);
  } else if (key == "target-a") {
    cfg.target_a = parse_doubles(key, value);
  } else if (key == "target-b") {
    cfg.target_b = parse_doubles(key, value);
  } else if (key == "m-min") {
    cfg.m_min = parse_double(key, value);
  } else if (key == "m-max") {
    cfg.m_max = parse_double(key, value);
  } else if (key == "m-steps") {
    cfg.m_steps = parse_int(key, value);
  } else if (key == "out") {
    cfg.out = trim(value);
  } else if (key == "summary") {
    cfg.summary = trim(value);
  } else if (key == "format") {
    cfg.format = trim(value);
  } else if (key == "mu-schedule") {
    cfg.solver.mu_schedule = parse_doubles(key, value);
  } else if (key == "grad-tol") {
    cfg.solver.grad_tol = parse_double(key, value);
  } else if (key == "max-iter") {
    cfg.solver.max_iter = parse_int(key, value);
  } else if (key == "snap-tol") {
    cfg.solver.snap_tol = parse_double(key, value);
  } else if (key == "min-dwell") {
    cfg.solver.min_dwell = parse_double(key, value);
  } else if (key == "warm-mu") {
    cfg.solver.warm_mu_start = parse_double(key, value);
  } else if (key == "warm-start") {
    cfg.warm_start = parse_bool(key, value);
  } else if (key == "threads") {
    cfg.threads = parse_int(key, value);
  } else if (key == "stride") {
    cfg.stride = parse_int(key, value);
  } else {
    throw ConfigError("unknown setting '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

std::string solve_status(const SolveReport& report, const SolverConfig& cfg) {
  if (!report.converged) return "not_converged";
  if (!report.staircase_valid) return "not_staircase";
  if (!(report.residual_norm <= approximate_control_bound(cfg.epsilon))) return "residual_above_bound";
  return "ok";
}

json report_to_json(const SolveReport& report, const HarmonicSpec& spec, const SolverConfig& cfg) {
  json log = json::array();
  for (const StageLog& s : report.log) {
    log.push_back({{"mu", s.mu}, {"iterations", s.iterations}, {"objective", s.objective},
                   {"grad_norm", s.grad_norm}, {"converged", s.converged}});
  }
  json solver = {{"epsilon", cfg.epsilon},
                 {"grid_size", cfg.grid_size},
                 {"levels", cfg.levels.values()},
                 {"mu_schedule", cfg.mu_schedule},
                 {"grad_tol", cfg.effective_grad_tol(spec.size())},
                 {"max_iter", cfg.max_iter},
                 {"snap_tol", cfg.snap_tol},
                 {"min_dwell", cfg.min_dwell},
                 {"warm_mu_start", cfg.warm_mu_start}};
  return json{{"format", "shm-solve-result"},
              {"version", 1},
              {"status", solve_status(report, cfg)},
              {"solver", solver},
              {"harmonics",
               {{"freq_a", spec.ea}, {"freq_b", spec.eb}, {"target_a", spec.a_target}, {"target_b", spec.b_target}}},
              {"signal", {{"levels", report.signal.levels}, {"angles", report.signal.angles}}},
              {"staircase_valid", report.staircase_valid},
              {"staircase_violation", report.staircase_violation},
              {"merged_intervals", report.merged_intervals},
              {"achieved", {{"a", to_std(report.achieved.a)}, {"b", to_std(report.achieved.b)}}},
              {"p_opt", to_std(report.p_opt)},
              {"x_terminal", to_std(report.x_terminal)},
              {"residual_norm", report.residual_norm},
              {"residual_bound", approximate_control_bound(cfg.epsilon)},
              {"duality_check", report.duality_gap_check},
              {"objective", report.objective_value},
              {"final_grad_norm", report.final_grad_norm},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"log", log}};
}

ParsedResult report_from_json(const json& doc) {
  try {
    if (doc.at("format") != "shm-solve-result") throw ConfigError("not a solve result document");
    ParsedResult out;
    const json& h = doc.at("harmonics");
    out.spec.ea = h.at("freq_a").get<std::vector<int>>();
    out.spec.eb = h.at("freq_b").get<std::vector<int>>();
    out.spec.a_target = h.at("target_a").get<std::vector<double>>();
    out.spec.b_target = h.at("target_b").get<std::vector<double>>();

    const json& s = doc.at("solver");
    out.solver.epsilon = s.at("epsilon").get<double>();
    out.solver.grid_size = s.at("grid_size").get<int>();
    out.solver.levels = LevelSet::from_values(s.at("levels").get<std::vector<double>>());
    out.solver.mu_schedule = s.at("mu_schedule").get<std::vector<double>>();
    out.solver.grad_tol = s.at("grad_tol").get<double>();
    out.solver.max_iter = s.at("max_iter").get<int>();
    out.solver.snap_tol = s.at("snap_tol").get<double>();
    out.solver.min_dwell = s.at("min_dwell").get<double>();
    out.solver.warm_mu_start = s.at("warm_mu_start").get<double>();

    SolveReport& r = out.report;
    r.signal.levels = doc.at("signal").at("levels").get<std::vector<double>>();
    r.signal.angles = doc.at("signal").at("angles").get<std::vector<double>>();
    r.staircase_valid = doc.at("staircase_valid").get<bool>();
    r.staircase_violation = doc.at("staircase_violation").get<int>();
    r.merged_intervals = doc.at("merged_intervals").get<int>();
    r.achieved.a = to_eigen(doc.at("achieved").at("a").get<std::vector<double>>());
    r.achieved.b = to_eigen(doc.at("achieved").at("b").get<std::vector<double>>());
    r.p_opt = to_eigen(doc.at("p_opt").get<std::vector<double>>());
    r.x_terminal = to_eigen(doc.at("x_terminal").get<std::vector<double>>());
    r.residual_norm = doc.at("residual_norm").get<double>();
    r.duality_gap_check = doc.at("duality_check").get<double>();
    r.objective_value = doc.at("objective").get<double>();
    r.final_grad_norm = doc.at("final_grad_norm").get<double>();
    r.iterations = doc.at("iterations").get<int>();
    r.converged = doc.at("converged").get<bool>();
    for (const json& e : doc.at("log")) {
      r.log.push_back({e.at("mu").get<double>(), e.at("iterations").get<int>(), e.at("objective").get<double>(),
                       e.at("grad_norm").get<double>(), e.at("converged").get<bool>()});
    }
    out.status = doc.at("status").get<std::string>();
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed result document: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed result document: ") + e.what());
  }
}

std::vector<SweepPoint> run_sweep(const RunConfig& cfg) {
  const std::vector<double> ms = cfg.modulation_indices();
  std::vector<SweepPoint> points(ms.size());
  const auto solve_one = [&](size_t k, const std::optional<Eigen::VectorXd>& start) {
    SweepPoint& pt = points[k];
    pt.m = ms[k];
    pt.report = minimize(cfg.sweep_spec(pt.m), cfg.solver, start);
    pt.status = solve_status(pt.report, cfg.solver);
  };

  if (cfg.warm_start) {
    std::optional<Eigen::VectorXd> start;
    for (size_t k = 0; k < ms.size(); ++k) {
      solve_one(k, start);
      start = points[k].report.p_opt;
    }
  } else {
    const size_t workers = std::min(static_cast<size_t>(cfg.threads), ms.size());
    std::vector<std::future<void>> jobs;
    for (size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (size_t k = w; k < ms.size(); k += workers) solve_one(k, std::nullopt);
      }));
    }
    for (auto& job : jobs) job.get();
  }
  return points;
}

void write_sweep_table(const std::vector<SweepPoint>& points, const TimeGrid& grid, int stride, std::ostream& os) {
  os << "m,t,u\n";
  for (const SweepPoint& pt : points) {
    const std::string m = fmt17(pt.m);
    const auto& u = pt.report.u_samples;
    for (int i = 0; i < grid.size(); i += stride) {
      os << m << ',' << fmt17(grid.node(i)) << ',' << fmt17(u[static_cast<size_t>(i)]) << '\n';
    }
  }
}

void write_sweep_summary(const std::vector<SweepPoint>& points, const SolverConfig& cfg, std::ostream& os) {
  os << "m,status,converged,staircase_valid,residual_norm,residual_bound,duality_check,iterations,switches,"
        "merged_intervals,objective,waveform,angles\n";
  const double bound = approximate_control_bound(cfg.epsilon);
  for (const SweepPoint& pt : points) {
    const SolveReport& r = pt.report;
    os << fmt17(pt.m) << ',' << pt.status << ',' << (r.converged ? 1 : 0) << ',' << (r.staircase_valid ? 1 : 0) << ','
       << fmt17(r.residual_norm) << ',' << fmt17(bound) << ',' << fmt17(r.duality_gap_check) << ',' << r.iterations
       << ',' << r.signal.switches() << ',' << r.merged_intervals << ',' << fmt17(r.objective_value) << ",\""
       << join17(r.signal.levels) << "\",\"" << join17(r.signal.angles) << "\"\n";
  }
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const HarmonicSpec spec = cfg.spec();
  const SolveReport report = minimize(spec, cfg.solver);
  const std::string status = solve_status(report, cfg.solver);

  std::ofstream os = open_output(cfg.out);
  if (cfg.format == "json") {
    os << report_to_json(report, spec, cfg.solver).dump(2) << '\n';
  } else {
    const TimeGrid grid(cfg.solver.grid_size);
    os << "t,u\n";
    for (int i = 0; i < grid.size(); i += cfg.stride) {
      os << fmt17(grid.node(i)) << ',' << fmt17(report.u_samples[static_cast<size_t>(i)]) << '\n';
    }
  }
  log << "status=" << status << " switches=" << report.signal.switches() << " residual=" << report.residual_norm
      << " bound=" << approximate_control_bound(cfg.solver.epsilon) << " duality=" << report.duality_gap_check
      << " iterations=" << report.iterations << " -> " << cfg.out << '\n';
  return status == "ok" ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::ofstream table = open_output(cfg.out);
  std::ofstream summary = open_output(cfg.summary_path());
  const std::vector<SweepPoint> points = run_sweep(cfg);
  write_sweep_table(points, TimeGrid(cfg.solver.grid_size), cfg.stride, table);
  write_sweep_summary(points, cfg.solver, summary);

  int failures = 0;
  for (const SweepPoint& pt : points) {
    if (pt.status != "ok") {
      ++failures;
      log << "m=" << pt.m << " failed: " << pt.status << '\n';
    }
  }
  log << points.size() - static_cast<size_t>(failures) << "/" << points.size() << " modulation indices solved -> "
      << cfg.out << ", " << cfg.summary_path() << '\n';
  return failures == 0 ? 0 : 1;
}

int run(int argc, char** argv) {
  CLI::App app{"Multilevel staircase signals with prescribed low-order harmonics"};
  app.require_subcommand(1);
  std::map<std::string, std::string> flag_values;
  std::string config_path;
  bool no_warm_start = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Key-value configuration file");
    for (const std::string& key : setting_keys()) {
      sub->add_option("--" + key, flag_values[key], "Overrides '" + key + "' from the config file")
          ->allow_extra_args(false);
    }
  };
  CLI::App* solve = app.add_subcommand("solve", "Solve one harmonic target and write a JSON result");
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep the modulation index and write CSV tables");
  add_common(solve);
  add_common(sweep);
  sweep->add_flag("--no-warm-start", no_warm_start, "Solve every index from p = 0 (allows --threads)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* active = solve->parsed() ? solve : sweep;
  RunConfig cfg;
  try {
    cfg = RunConfig::defaults();
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    for (const std::string& key : setting_keys()) {
      if (active->count("--" + key) > 0) apply_setting(cfg, key, flag_values[key]);
    }
    if (no_warm_start) cfg.warm_start = false;
    if (active == sweep && cfg.out == "shm_result.json") cfg.out = "shm_sweep.csv";
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  }

  try {
    return active == solve ? cmd_solve(cfg, std::cout) : cmd_sweep(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace shm::cli
