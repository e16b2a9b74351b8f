#include "hc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hc/bundle.hpp"
#include "hc/ippm.hpp"

#ifndef HC_FIXTURES_DIR
#define HC_FIXTURES_DIR "fixtures"
#endif

namespace hc::cli {

namespace {

const std::set<std::string> kMethods{"ippm-swsg", "ippm-acgd", "s-starbl", "s-bl-adals", "ref-convex", "grid"};
const std::set<std::string> kProblems{"cnls", "cgp2d", "cgp-rand"};
const std::set<std::string> kOverrideKeys{
    // ippm
    "rho_hat", "n_outer", "t_inner", "alpha", "eps_in", "mu_strong", "l_smooth", "shift_b",
    "swsg_step_scale", "acgd_eta_scale", "qp_tol",
    // bundle
    "beta", "t_steps", "n_epochs",
    // grid
    "resolution", "slack", "refine",
    // cgp-rand
    "dim", "k1", "k2"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 9e15)
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<std::int64_t>(d);
}

std::optional<double> opt(const RunConfig& c, const std::string& key) {
  auto it = c.overrides.find(key);
  if (it == c.overrides.end()) return std::nullopt;
  return it->second;
}

std::int64_t opt_int(const RunConfig& c, const std::string& key, std::int64_t fallback) {
  auto v = opt(c, key);
  return v ? static_cast<std::int64_t>(*v) : fallback;
}

// Raises F2 to tau-feasibility when the documented start is not feasible enough.
Vec feasible_start(const ProblemInstance& inst, double tau, SolveReport* notes_to) {
  if (inst.problem->peek_f2(inst.x0) <= tau) return inst.x0;
  FeasibleStart fs = init_feasible(*inst.problem, inst.meta, inst.x0, tau);
  if (notes_to) notes_to->notes.push_back("init_feasible took " + std::to_string(fs.steps) + " steps");
  return fs.x;
}

void require_smooth(const ProblemInstance& inst, const std::string& method) {
  if (!inst.problem->smooth())
    throw ConfigError("method " + method + " needs a smooth problem; " + inst.problem->name() +
                      " is non-smooth");
}

IppmConfig ippm_config(const RunConfig& c, const ProblemInstance& inst, bool acgd) {
  const double tau = c.tau.value_or(c.eps);
  const BoxSet& dom = inst.problem->domain();
  IppmConfig cfg;
  if (acgd) {
    cfg = inst.meta.theta_slater ? schedule_smooth_slater(inst.meta, dom, c.eps, tau)
                                 : schedule_smooth(inst.meta, dom, c.eps, tau);
  } else {
    cfg = schedule_nonsmooth(inst.meta, dom, c.eps, tau);
  }
  if (auto v = opt(c, "rho_hat")) cfg.rho_hat = *v;
  cfg.mu_strong = opt(c, "mu_strong").value_or(cfg.rho_hat - inst.meta.rho);
  if (auto v = opt(c, "alpha")) cfg.alpha = *v;
  if (auto v = opt(c, "eps_in")) cfg.eps_in = *v;
  cfg.n_outer = opt_int(c, "n_outer", cfg.n_outer);
  cfg.t_inner = opt_int(c, "t_inner", cfg.t_inner);
  if (auto v = opt(c, "l_smooth")) cfg.l_smooth = *v;
  if (auto v = opt(c, "shift_b")) cfg.shift_b = *v;
  if (auto v = opt(c, "swsg_step_scale")) cfg.swsg_step_scale = *v;
  if (auto v = opt(c, "acgd_eta_scale")) cfg.acgd_eta_scale = *v;
  if (auto v = opt(c, "qp_tol")) cfg.qp_tol = *v;
  cfg.budget = c.budget;
  return cfg;
}

std::optional<double> fixture_value(std::uint64_t seed) {
  const std::filesystem::path p =
      std::filesystem::path(fixtures_dir()) / ("cgp_rand_seed" + std::to_string(seed) + ".json");
  std::ifstream in(p);
  if (!in) return std::nullopt;
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("f1_star_ref")) return std::nullopt;
  return j["f1_star_ref"].get<double>();
}

bool default_rand_shape(const RunConfig& c) {
  return opt_int(c, "dim", 100) == 100 && opt_int(c, "k1", 10) == 10 && opt_int(c, "k2", 8) == 8;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fixtures_dir() {
  if (const char* env = std::getenv("HC_SOLVERS_FIXTURES")) return env;
  return HC_FIXTURES_DIR;
}

std::vector<std::pair<std::string, std::string>> parse_flat_toml(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // A '#' inside a basic ("...") or literal ('...') string is kept.
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (quote == 0 && (line[i] == '"' || line[i] == '\'')) quote = line[i];
      else if (line[i] == quote) quote = 0;
      if (line[i] == '#' && quote == 0) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[')
      throw ConfigError("line " + std::to_string(lineno) + ": tables are not supported (flat file)");
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    if (value.front() == '"' || value.front() == '\'') {
      if (value.size() < 2 || value.back() != value.front())
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    out.emplace_back(key, value);
  }
  return out;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "method") cfg.method = value;
  else if (key == "problem") cfg.problem = value;
  else if (key == "name") cfg.name = value;
  else if (key == "seed") {
    std::int64_t s = to_int(key, value);
    if (s < 0) throw ConfigError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "eps") cfg.eps = to_double(key, value);
  else if (key == "tau") cfg.tau = to_double(key, value);
  else if (key == "lambda") cfg.lambda = to_double(key, value);
  else if (key == "eta0") cfg.eta0 = to_double(key, value);
  else if (key == "f1_star") cfg.f1_star = to_double(key, value);
  else if (key == "tol") cfg.tol = to_double(key, value);
  else if (key == "tol_f2") cfg.tol_f2 = to_double(key, value);
  else if (key == "budget") cfg.budget = to_int(key, value);
  else if (kOverrideKeys.count(key)) cfg.overrides[key] = to_double(key, value);
  else throw ConfigError("unknown key '" + key + "'");
}

void validate(const RunConfig& c) {
  if (!kMethods.count(c.method)) throw ConfigError("unknown method '" + c.method + "'");
  if (!kProblems.count(c.problem)) throw ConfigError("unknown problem '" + c.problem + "'");
  if (!(c.eps > 0.0)) throw ConfigError("eps must be positive");
  if (c.tau && *c.tau < 0.0) throw ConfigError("tau must be non-negative");
  if (c.lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (c.budget <= 0) throw ConfigError("budget must be positive");
  const bool smooth_only = c.method == "ippm-acgd" || c.method == "s-starbl" || c.method == "s-bl-adals";
  if (smooth_only && c.problem == "cnls")
    throw ConfigError("method " + c.method + " needs a smooth problem; cnls is non-smooth");
  if (c.method == "grid" && c.problem == "cgp-rand")
    throw ConfigError("grid search handles dimension <= 2 only");
}

ProblemInstance make_problem(const RunConfig& c) {
  if (c.problem == "cnls") return make_cnls();
  if (c.problem == "cgp2d") return make_cgp2d();
  if (c.problem == "cgp-rand") {
    RandomCgpSpec spec;
    spec.seed = c.seed;
    spec.dim = static_cast<int>(opt_int(c, "dim", spec.dim));
    spec.k1 = static_cast<int>(opt_int(c, "k1", spec.k1));
    spec.k2 = static_cast<int>(opt_int(c, "k2", spec.k2));
    if (spec.dim <= 0 || spec.k1 <= 0 || spec.k2 <= 0) throw ConfigError("dim, k1, k2 must be positive");
    return make_random_cgp(spec).instance;
  }
  throw ConfigError("unknown problem '" + c.problem + "'");
}

std::optional<double> known_reference(const RunConfig& c) {
  if (c.problem == "cnls") return 0.15;
  if (c.problem == "cgp2d") return 5.0;
  if (c.problem == "cgp-rand" && default_rand_shape(c)) return fixture_value(c.seed);
  return std::nullopt;
}

RunOutput run(const RunConfig& cfg) {
  validate(cfg);
  RunOutput out;
  out.config = cfg;
  out.f1_star_ref = known_reference(cfg);
  ProblemInstance inst = make_problem(cfg);
  const ConstrainedProblem& prob = *inst.problem;
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport& rep = out.report;

  if (cfg.method == "ippm-swsg" || cfg.method == "ippm-acgd") {
    const bool acgd = cfg.method == "ippm-acgd";
    if (acgd) require_smooth(inst, cfg.method);
    IppmConfig ic = ippm_config(cfg, inst, acgd);
    SolveReport pre;
    Vec x0 = feasible_start(inst, ic.tau, &pre);
    rep = ippm_run(prob, inst.meta, x0, ic);
    rep.notes.insert(rep.notes.begin(), pre.notes.begin(), pre.notes.end());
    for (const auto& w : ic.warnings) rep.notes.push_back("warning: " + w);
    rep.params["mu_strong"] = ic.mu_strong;
    if (acgd) rep.params["l_smooth"] = ic.l_smooth;
    if (ic.swsg_step_scale) rep.params["swsg_step_scale"] = *ic.swsg_step_scale;
  } else if (cfg.method == "s-starbl") {
    require_smooth(inst, cfg.method);
    std::optional<double> level = cfg.f1_star ? cfg.f1_star : out.f1_star_ref;
    if (!level) throw ConfigError("s-starbl needs f1_star (no reference known for this instance)");
    std::optional<StarBlParams> p;
    if (opt(cfg, "alpha") || cfg.tau || opt(cfg, "t_steps")) {
      const double v0 = std::max(prob.peek_f1(inst.x0) - *level, prob.peek_f2(inst.x0));
      StarBlParams base = star_bl_schedule(inst.meta, cfg.eps, v0);
      base.alpha = opt(cfg, "alpha").value_or(base.alpha);
      base.tau = cfg.tau.value_or(base.tau);
      base.t_steps = opt_int(cfg, "t_steps", base.t_steps);
      p = base;
    }
    rep = s_star_bl(prob, inst.meta, inst.x0, *level, cfg.eps, p, cfg.budget);
  } else if (cfg.method == "s-bl-adals") {
    require_smooth(inst, cfg.method);
    SolveReport pre;
    Vec x0 = inst.x0;
    if (cfg.lambda > 0.0) x0 = feasible_start(inst, cfg.eps / (2.0 * cfg.lambda), &pre);
    double eta0;
    if (cfg.eta0) {
      eta0 = *cfg.eta0;
    } else {
      LowerBoundInit lb = init_lower_bound(prob, inst.meta, x0, cfg.eps);
      eta0 = lb.eta0;
      pre.notes.push_back("init_lower_bound: eta0 = " + fmt(eta0) + " after " +
                          std::to_string(lb.steps) + " steps");
    }
    std::optional<AdaLsParams> p;
    if (opt(cfg, "alpha") || cfg.tau || opt(cfg, "t_steps") || opt(cfg, "n_epochs") || opt(cfg, "beta")) {
      AdaLsParams base = ada_ls_schedule(inst.meta, prob.peek_f1(x0), eta0, cfg.eps, cfg.lambda);
      base.alpha = opt(cfg, "alpha").value_or(base.alpha);
      base.beta = opt(cfg, "beta").value_or(base.beta);
      base.tau = cfg.tau.value_or(base.tau);
      base.t_steps = opt_int(cfg, "t_steps", base.t_steps);
      base.n_epochs = opt_int(cfg, "n_epochs", base.n_epochs);
      p = base;
    }
    rep = ada_ls(prob, inst.meta, x0, eta0, cfg.eps, cfg.lambda, p, cfg.budget);
    rep.notes.insert(rep.notes.begin(), pre.notes.begin(), pre.notes.end());
  } else if (cfg.method == "ref-convex") {
    if (!inst.map) throw ConfigError("ref-convex needs a hidden map");
    ReferenceResult r = reference_convex(inst, cfg.eps);
    rep.x = r.x_star;
    rep.trace = Trace(1.0, 0);
    rep.trace.record(prob, r.x_star, IterKind::Outer);
    rep.params["lower_bound"] = r.lower_bound;
    out.f1_star_ref = out.f1_star_ref.value_or(r.f1_star_ref);
  } else if (cfg.method == "grid") {
    const double res = opt(cfg, "resolution").value_or(1e-3);
    const double slack = opt(cfg, "slack").value_or(0.0);
    const int refine = static_cast<int>(opt_int(cfg, "refine", 0));
    GridResult g = grid_oracle(prob, res, slack, refine);
    rep.x = g.x_best;
    rep.trace = Trace(1.0, 0);
    rep.trace.record(prob, g.x_best, IterKind::Outer);
    rep.params["resolution"] = res;
    rep.params["slack"] = slack;
  }
  rep.f1 = prob.peek_f1(rep.x);
  rep.f2 = prob.peek_f2(rep.x);
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::string trace_csv(const Trace& trace) {
  std::string s = "oracle_calls,f1,f2,penalty,eta,iter_kind\n";
  for (const auto& r : trace.records()) {
    s += std::to_string(r.oracle_calls) + "," + fmt(r.f1) + "," + fmt(r.f2) + "," + fmt(r.penalty) + "," +
         (r.eta ? fmt(*r.eta) : std::string()) + "," + iter_kind_name(r.iter_kind) + "\n";
  }
  return s;
}

std::optional<std::int64_t> calls_to_tolerance(const Trace& trace, double ref, double tol_f1,
                                               double tol_f2) {
  for (const auto& r : trace.records()) {
    if (r.iter_kind == IterKind::Inner) continue;
    if (r.f1 - ref <= tol_f1 && r.f2 <= tol_f2) return r.oracle_calls;
  }
  return std::nullopt;
}

bool within_tolerance(const RunOutput& out) {
  if (!out.error.empty()) return false;
  if (!out.f1_star_ref) return true;
  const double tol = out.config.tol.value_or(out.config.eps);
  return out.report.f1 - *out.f1_star_ref <= tol && out.report.f2 <= out.config.tol_f2.value_or(tol);
}

nlohmann::json summary_json(const RunOutput& out) {
  nlohmann::json j;
  j["method"] = out.config.method;
  j["problem"] = out.config.problem;
  j["seed"] = out.config.seed;
  j["f1_final"] = out.report.f1;
  j["f2_final"] = out.report.f2;
  j["f1_star_ref"] = out.f1_star_ref ? nlohmann::json(*out.f1_star_ref) : nlohmann::json(nullptr);
  j["gap"] = out.f1_star_ref ? nlohmann::json(out.report.f1 - *out.f1_star_ref) : nlohmann::json(nullptr);
  j["oracle_calls_total"] = out.report.oracle_calls;
  j["wall_ms"] = out.wall_ms;
  nlohmann::json params = out.report.params;
  params["eps"] = out.config.eps;
  params["budget"] = out.config.budget;
  if (out.config.tau) params["tau"] = *out.config.tau;
  if (out.config.method == "s-bl-adals") params["lambda"] = out.config.lambda;
  for (const auto& [k, v] : out.config.overrides) params[k] = v;
  j["params"] = params;
  j["notes"] = out.report.notes;
  j["within_tolerance"] = within_tolerance(out);
  if (out.f1_star_ref) {
    const double tol = out.config.tol.value_or(out.config.eps);
    auto hit = calls_to_tolerance(out.report.trace, *out.f1_star_ref, tol, out.config.tol_f2.value_or(tol));
    j["calls_to_tolerance"] = hit ? nlohmann::json(*hit) : nlohmann::json(nullptr);
  }
  if (!out.error.empty()) j["error"] = out.error;
  return j;
}

std::vector<RunConfig> bench_suite(const std::string& suite, std::uint64_t seed) {
  auto make = [](std::string method, std::string problem, std::string name) {
    RunConfig c;
    c.method = std::move(method);
    c.problem = std::move(problem);
    c.name = std::move(name);
    return c;
  };
  std::vector<RunConfig> runs;
  if (suite == "fig4") {
    // Theory rho_hat, alpha and eps_in; the O~ inner/outer counts replaced by desk-scale values.
    RunConfig c = make("ippm-swsg", "cnls", "fig4_ippm-swsg");
    c.eps = 0.05;
    c.tau = 0.05;
    c.overrides = {{"n_outer", 50}, {"t_inner", 2000}};
    runs.push_back(c);
  } else if (suite == "fig5") {
    RunConfig a = make("ippm-acgd", "cgp2d", "fig5_ippm-acgd");
    a.tau = 1e-2;
    a.overrides = {{"rho_hat", 2.0}, {"n_outer", 100}, {"t_inner", 50}};
    RunConfig s = make("s-starbl", "cgp2d", "fig5_s-starbl");
    s.f1_star = 5.0;
    s.tau = 1e-4;
    s.overrides = {{"alpha", 0.3}, {"t_steps", 500}};
    RunConfig b = make("s-bl-adals", "cgp2d", "fig5_s-bl-adals");
    b.eta0 = 0.0;
    b.lambda = 1.0;
    b.tau = 1e-4;
    b.overrides = {{"alpha", 0.3}, {"beta", 0.5}, {"t_steps", 120}, {"n_epochs", 12}};
    runs = {a, s, b};
  } else if (suite == "highdim") {
    RunConfig probe = make("s-starbl", "cgp-rand", "");
    probe.seed = seed;
    std::optional<double> fs = known_reference(probe);
    if (!fs) {
      ProblemInstance inst = make_problem(probe);
      fs = reference_convex(inst, 1e-6).f1_star_ref;
    }
    const std::string tag = "highdim_";
    RunConfig w = make("ippm-swsg", "cgp-rand", tag + "ippm-swsg");
    w.tau = 1e-3;
    w.eps = 1e-3;
    w.overrides = {{"rho_hat", 0.02}, {"n_outer", 10},   {"t_inner", 121},
                   {"alpha", 0.1},    {"eps_in", 1e-4},  {"swsg_step_scale", 0.05}};
    RunConfig a = make("ippm-acgd", "cgp-rand", tag + "ippm-acgd");
    a.tau = 1e-3;
    a.eps = 1e-3;
    // L and mu picked on held-out seeds; rho_hat here is below the instance's weak convexity.
    a.overrides = {{"rho_hat", 0.02}, {"n_outer", 10},      {"t_inner", 60},     {"alpha", 0.1},
                   {"shift_b", -1e-3}, {"l_smooth", 8.0},   {"mu_strong", 0.002}};
    RunConfig s = make("s-starbl", "cgp-rand", tag + "s-starbl");
    s.f1_star = *fs;
    s.tau = 1e-4;
    s.overrides = {{"alpha", 0.3}, {"t_steps", 605}};
    RunConfig b = make("s-bl-adals", "cgp-rand", tag + "s-bl-adals");
    b.eta0 = 0.5 * *fs;
    b.lambda = 0.25;
    b.tau = 1e-4;
    b.overrides = {{"alpha", 0.3}, {"beta", 0.5}, {"t_steps", 120}, {"n_epochs", 5}};
    runs = {w, a, s, b};
    for (auto& r : runs) {
      r.seed = seed;
      r.budget = 1210;
      r.tol = 1e-2 * *fs;
      r.tol_f2 = 1e-2;
    }
  } else {
    throw ConfigError("unknown suite '" + suite + "' (fig4, fig5, highdim)");
  }
  return runs;
}

int worker_threads() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("HC_SOLVERS_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<int>(v);
  }
  return n;
}

std::vector<RunOutput> run_bench(const std::vector<RunConfig>& runs, int threads) {
  std::vector<RunOutput> results(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        results[i] = run(runs[i]);
      } catch (const Error& e) {
        results[i].config = runs[i];
        results[i].error = std::string(error_code_name(e.code())) + ": " + e.what();
      }
    }
  };
  const int n = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(runs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << content;
}

std::string stem(const RunConfig& c) {
  return c.name.empty() ? c.method + "_" + c.problem : c.name;
}

}  // namespace

int main_entry(int argc, char** argv) {
  CLI::App app{"Solvers and benchmarks for hidden-convex constrained problems"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  std::string seed_text, eps_text, tau_text, lambda_text, eta0_text, budget_text, f1s_text, tol_text,
      tol_f2_text;

  auto* solve = app.add_subcommand("solve", "Run one method on one problem");
  solve->add_option("--config", config_file, "Flat TOML file of key = value settings");
  solve->add_option("--method", cfg.method, "ippm-swsg | ippm-acgd | s-starbl | s-bl-adals | ref-convex | grid");
  solve->add_option("--problem", cfg.problem, "cnls | cgp2d | cgp-rand");
  solve->add_option("--seed", seed_text, "Instance seed for cgp-rand");
  solve->add_option("--eps", eps_text, "Target accuracy");
  solve->add_option("--tau", tau_text, "Feasibility budget (IPPM) or minorant budget (bundle)");
  solve->add_option("--lambda", lambda_text, "Penalty multiplier for s-bl-adals");
  solve->add_option("--eta0", eta0_text, "Initial lower bound for s-bl-adals");
  solve->add_option("--f1-star", f1s_text, "Optimal value for s-starbl");
  solve->add_option("--budget", budget_text, "Cap on counted oracle calls");
  solve->add_option("--tol", tol_text, "Band on F1 - F1* for the exit status (default eps)");
  solve->add_option("--tol-f2", tol_f2_text, "Band on F2 for the exit status (default tol)");
  solve->add_option("--set", sets, "Schedule override key=value (repeatable)");
  solve->add_option("--out", out_dir, "Directory for the trace CSV and summary JSON");
  solve->add_option("--name", cfg.name, "File stem for the artifacts");

  std::string suite;
  std::uint64_t bench_seed = 42;
  std::string bench_out = ".";
  int threads = 0;
  auto* bench = app.add_subcommand("bench", "Run an experiment suite");
  bench->add_option("suite", suite, "fig4 | fig5 | highdim")->required();
  bench->add_option("--seed", bench_seed, "Instance seed for highdim");
  bench->add_option("--out", bench_out, "Directory for traces and the combined summary");
  bench->add_option("--threads", threads, "Worker cap (default HC_SOLVERS_THREADS or cores)");

  std::string ref_problem;
  std::uint64_t ref_seed = 42;
  double ref_eps = 1e-6;
  auto* reference = app.add_subcommand("reference", "Print the reference optimum of a problem");
  reference->add_option("--problem", ref_problem, "cnls | cgp2d | cgp-rand")->required();
  reference->add_option("--seed", ref_seed, "Instance seed for cgp-rand");
  reference->add_option("--eps", ref_eps, "Accuracy of the convex solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw ConfigError("cannot read config " + config_file);
        std::stringstream ss;
        ss << in.rdbuf();
        RunConfig fromfile;
        for (const auto& [k, v] : parse_flat_toml(ss.str())) apply_setting(fromfile, k, v);
        // Flags given on the command line win over the file.
        if (cfg.method.empty()) cfg.method = fromfile.method;
        if (cfg.problem.empty()) cfg.problem = fromfile.problem;
        if (cfg.name.empty()) cfg.name = fromfile.name;
        RunConfig merged = fromfile;
        merged.method = cfg.method;
        merged.problem = cfg.problem;
        merged.name = cfg.name;
        cfg = merged;
      }
      if (!seed_text.empty()) apply_setting(cfg, "seed", seed_text);
      if (!eps_text.empty()) apply_setting(cfg, "eps", eps_text);
      if (!tau_text.empty()) apply_setting(cfg, "tau", tau_text);
      if (!lambda_text.empty()) apply_setting(cfg, "lambda", lambda_text);
      if (!eta0_text.empty()) apply_setting(cfg, "eta0", eta0_text);
      if (!f1s_text.empty()) apply_setting(cfg, "f1_star", f1s_text);
      if (!budget_text.empty()) apply_setting(cfg, "budget", budget_text);
      if (!tol_text.empty()) apply_setting(cfg, "tol", tol_text);
      if (!tol_f2_text.empty()) apply_setting(cfg, "tol_f2", tol_f2_text);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_setting(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
      }
      validate(cfg);
      std::filesystem::create_directories(out_dir);
      RunOutput out = run(cfg);
      const std::filesystem::path base = std::filesystem::path(out_dir) / stem(cfg);
      write_file(base.string() + ".csv", trace_csv(out.report.trace));
      nlohmann::json j = summary_json(out);
      write_file(base.string() + ".json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
      return within_tolerance(out) ? 0 : 1;
    }
    if (*bench) {
      std::vector<RunConfig> runs = bench_suite(suite, bench_seed);
      std::filesystem::create_directories(bench_out);
      std::vector<RunOutput> results = run_bench(runs, threads > 0 ? threads : worker_threads());
      nlohmann::json all;
      all["suite"] = suite;
      all["seed"] = bench_seed;
      all["runs"] = nlohmann::json::array();
      bool failed = false;
      for (const auto& r : results) {
        const std::filesystem::path base = std::filesystem::path(bench_out) / stem(r.config);
        write_file(base.string() + ".csv", trace_csv(r.report.trace));
        all["runs"].push_back(summary_json(r));
        if (!r.error.empty()) {
          failed = true;
          std::cerr << stem(r.config) << ": " << r.error << "\n";
        }
      }
      write_file((std::filesystem::path(bench_out) / (suite + "_summary.json")).string(), all.dump(2) + "\n");
      std::cout << all.dump(2) << "\n";
      return failed ? 3 : 0;
    }
    if (*reference) {
      RunConfig c;
      c.method = "ref-convex";
      c.problem = ref_problem;
      c.seed = ref_seed;
      validate(c);
      ProblemInstance inst = make_problem(c);
      ReferenceResult r = reference_convex(inst, ref_eps);
      nlohmann::json j;
      j["problem"] = ref_problem;
      j["seed"] = ref_seed;
      j["f1_star_ref"] = r.f1_star_ref;
      j["lower_bound"] = r.lower_bound;
      j["f2_at_ref"] = r.f2_at_ref;
      auto known = known_reference(c);
      j["known"] = known ? nlohmann::json(*known) : nlohmann::json(nullptr);
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "solver error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace hc::cli
