#include "fracbirth/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracbirth/analytic.hpp"
#include "fracbirth/error.hpp"
#include "fracbirth/random_time.hpp"
#include "fracbirth/rates.hpp"
#include "fracbirth/simulation.hpp"
#include "fracbirth/verify.hpp"
#include "log.hpp"

namespace fracbirth {

namespace {

using json = nlohmann::json;

enum class Exit { Ok = 0, VerifyFailed = 1, Usage = 2, Numerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RunConfig {
  std::string command;
  std::string schedule_kind = "linear";
  double lambda = 1.0;
  std::vector<double> rates;
  double nu = 1.0;
  double t = 1.0;
  std::vector<double> t_grid;
  std::vector<double> nus;
  std::int64_t n0 = 1;
  std::int64_t runs = 100000;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string output;
  double tail_tol = 1e-6;
  std::int64_t k_max_hard = 2'000'000;
  double min_expected = 5.0;
  unsigned threads = 0;
  std::string mode = "density";
  std::vector<double> s_grid;
  std::optional<double> dt;

  RateSchedule schedule() const {
    if (schedule_kind == "linear") return RateSchedule::linear(lambda);
    if (schedule_kind == "explicit") {
      if (rates.empty()) throw UsageError("explicit schedule needs --rates");
      return RateSchedule::explicit_rates(rates);
    }
    throw UsageError("schedule must be 'linear' or 'explicit'");
  }

  TablePolicy policy() const { return {tail_tol, k_max_hard}; }
};

// Fills fields from the JSON file unless the same option was given on the command line.
void apply_config_file(const std::string& path, RunConfig& cfg, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
  try {
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      if (!given("--schedule") && s.contains("kind")) cfg.schedule_kind = s.at("kind").get<std::string>();
      if (!given("--lambda") && s.contains("lambda")) cfg.lambda = s.at("lambda").get<double>();
      if (!given("--rates") && s.contains("rates")) cfg.rates = s.at("rates").get<std::vector<double>>();
    }
    auto take = [&](const char* key, const char* flag, auto& field) {
      if (!given(flag) && j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("nu", "--nu", cfg.nu);
    take("t", "--t", cfg.t);
    take("t_grid", "--t-grid", cfg.t_grid);
    take("nus", "--nus", cfg.nus);
    take("n0", "--n0", cfg.n0);
    take("runs", "--runs", cfg.runs);
    take("format", "--format", cfg.format);
    take("output", "--output", cfg.output);
    take("tail_tol", "--tail-tol", cfg.tail_tol);
    take("k_max_hard", "--k-max-hard", cfg.k_max_hard);
    take("min_expected", "--min-expected", cfg.min_expected);
    take("threads", "--threads", cfg.threads);
    take("mode", "--mode", cfg.mode);
    take("s_grid", "--s-grid", cfg.s_grid);
    if (!given("--seed") && j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (!given("--dt") && j.contains("dt")) cfg.dt = j.at("dt").get<double>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad value in config file: ") + e.what());
  }
}

class Writer {
 public:
  Writer(std::ostream& out, bool json_mode) : out_(out), json_(json_mode) {}
  bool json_mode() const { return json_; }
  void header(const std::string& line) {
    if (!json_) out_ << line << '\n';
  }
  void csv(const std::string& line) { out_ << line << '\n'; }
  void record(const json& j) { out_ << j.dump() << '\n'; }

 private:
  std::ostream& out_;
  bool json_;
};

void require_increasing(const std::vector<double>& grid, const char* what) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw UsageError(std::string(what) + " must be strictly increasing");
}

Exit cmd_pmf(const RunConfig& cfg, Writer& w) {
  const RateSchedule schedule = cfg.schedule();
  PmfTable table;
  if (schedule.kind() == RateSchedule::Kind::Linear) {
    table = pmf_table_linear(schedule.lambda(), cfg.nu, cfg.t, cfg.n0, cfg.policy());
  } else {
    if (cfg.n0 != 1) throw UsageError("explicit schedules support n0 = 1 only");
    table = pmf_table_general(schedule, cfg.nu, cfg.t, cfg.policy());
  }
  w.header("row,k,value");
  for (std::int64_t k = table.n0; k <= table.k_cut; ++k) {
    if (w.json_mode())
      w.record({{"k", k}, {"p", table.at(k)}});
    else
      w.csv("pmf," + std::to_string(k) + "," + num(table.at(k)));
  }
  if (w.json_mode())
    w.record({{"k_cut", table.k_cut}, {"tail_mass", table.tail_mass}, {"nu", table.nu}, {"t", table.t}, {"n0", table.n0}});
  else
    w.csv("tail," + std::to_string(table.k_cut) + "," + num(table.tail_mass));
  return Exit::Ok;
}

Exit cmd_mean_curve(const RunConfig& cfg, Writer& w) {
  const RateSchedule schedule = cfg.schedule();
  if (schedule.kind() != RateSchedule::Kind::Linear) throw UsageError("mean-curve needs the linear schedule");
  std::vector<double> ts = cfg.t_grid;
  if (ts.empty())
    for (int i = 0; i <= 30; ++i) ts.push_back(0.1 * i);
  require_increasing(ts, "t grid");
  const std::vector<double> nus = cfg.nus.empty() ? std::vector<double>{0.5, 0.7, 0.9, 1.0} : cfg.nus;
  w.header("nu,t,mean");
  for (double nu : nus) {
    for (double t : ts) {
      const double m = mean_linear(schedule.lambda(), nu, t);
      if (w.json_mode())
        w.record({{"nu", nu}, {"t", t}, {"mean", m}});
      else
        w.csv(num(nu) + "," + num(t) + "," + num(m));
    }
  }
  return Exit::Ok;
}

Exit cmd_moments(const RunConfig& cfg, Writer& w) {
  const RateSchedule schedule = cfg.schedule();
  if (schedule.kind() != RateSchedule::Kind::Linear) throw UsageError("moments need the linear schedule");
  const double lam = schedule.lambda();
  std::vector<std::pair<std::string, double>> rows{
      {"mean", mean_linear(lam, cfg.nu, cfg.t)},
      {"variance", variance_linear(lam, cfg.nu, cfg.t)},
      {"second_factorial_moment", second_factorial_moment_linear(lam, cfg.nu, cfg.t)},
  };
  if (cfg.dt) {
    const auto inc = increment_probability(lam, cfg.nu, cfg.n0, *cfg.dt);
    rows.emplace_back("increment_exact", inc.exact);
    rows.emplace_back("increment_asymptotic", inc.asymptotic);
  }
  w.header("quantity,value");
  for (const auto& [name, value] : rows) {
    if (w.json_mode())
      w.record({{"quantity", name}, {"value", value}, {"nu", cfg.nu}, {"t", cfg.t}, {"lambda", lam}});
    else
      w.csv(name + "," + num(value));
  }
  return Exit::Ok;
}

Exit cmd_simulate(const RunConfig& cfg, Writer& w) {
  if (!cfg.seed) throw UsageError("simulate requires --seed");
  SimulationConfig sc;
  sc.schedule = cfg.schedule();
  sc.nu = cfg.nu;
  sc.t = cfg.t;
  sc.n0 = cfg.n0;
  sc.runs = cfg.runs;
  sc.seed = *cfg.seed;
  sc.threads = cfg.threads;
  const Histogram counts = simulate_many(sc);
  std::optional<PmfTable> table;
  if (sc.schedule.kind() == RateSchedule::Kind::Linear)
    table = pmf_table_linear(sc.schedule.lambda(), sc.nu, sc.t, sc.n0, cfg.policy());
  else if (sc.n0 == 1)
    table = pmf_table_general(sc.schedule, sc.nu, sc.t, cfg.policy());
  const SimulationReport report = table ? compare(counts, *table, cfg.min_expected) : summarize(counts);
  json emp = json::object();
  for (const auto& [k, c] : report.empirical) emp[std::to_string(k)] = c;
  json j{{"runs", report.runs},   {"seed", sc.seed},         {"nu", sc.nu},         {"t", sc.t},
         {"n0", sc.n0},           {"mean_hat", report.mean_hat}, {"var_hat", report.var_hat},
         {"mean_se", report.mean_se}, {"empirical", emp}};
  if (table) {
    j["chi_square"] = report.chi_square;
    j["dof"] = report.dof;
    j["p_value"] = report.p_value;
    j["bins_merged"] = report.bins_merged;
  } else {
    j["chi_square"] = nullptr;
    j["dof"] = nullptr;
    j["p_value"] = nullptr;
    j["bins_merged"] = nullptr;
  }
  if (sc.schedule.kind() == RateSchedule::Kind::Linear && sc.n0 == 1)
    j["analytic_mean"] = mean_linear(sc.schedule.lambda(), sc.nu, sc.t);
  w.record(j);
  return Exit::Ok;
}

Exit cmd_randtime(const RunConfig& cfg, Writer& w) {
  const RandomTimeLaw law = RandomTimeLaw::make(cfg.nu, cfg.t);
  const std::string rep = law.representation();
  if (cfg.mode == "density") {
    if (law.structure == TimeStructure::Classical)
      fail(ErrorCode::DomainError, "nu = 1: degenerate point mass at t, no density to tabulate");
    std::vector<double> grid = cfg.s_grid;
    if (grid.empty())
      for (int i = 0; i <= 40; ++i) grid.push_back(0.1 * i * std::pow(cfg.t, cfg.nu));
    require_increasing(grid, "s grid");
    w.header("s,density,representation");
    for (double s : grid) {
      const double f = density(law, s);
      if (w.json_mode())
        w.record({{"s", s}, {"density", f}, {"representation", rep}});
      else
        w.csv(num(s) + "," + num(f) + "," + rep);
    }
    return Exit::Ok;
  }
  if (cfg.mode == "sample") {
    if (!cfg.seed) throw UsageError("randtime sample mode requires --seed");
    if (cfg.runs < 1) throw UsageError("runs must be at least 1");
    const std::string srep = law.structure == TimeStructure::Classical ? rep : "inverse-stable";
    w.header("index,sample,representation");
    for (std::int64_t i = 0; i < cfg.runs; ++i) {
      CounterRng rng(*cfg.seed, static_cast<std::uint64_t>(i));
      const double s = sample(law, rng);
      if (w.json_mode())
        w.record({{"index", i}, {"sample", s}, {"representation", srep}});
      else
        w.csv(std::to_string(i) + "," + num(s) + "," + srep);
    }
    return Exit::Ok;
  }
  throw UsageError("randtime --mode must be 'density' or 'sample'");
}

Exit cmd_verify(const RunConfig& cfg, Writer& w) {
  SuiteConfig suite;
  if (!cfg.nus.empty()) suite.nus = cfg.nus;
  if (!cfg.t_grid.empty()) suite.ts = cfg.t_grid;
  if (cfg.schedule_kind != "linear") throw UsageError("verify uses the linear schedule");
  suite.lambda = cfg.lambda;
  const auto reports = run_identity_suite(suite);
  bool all = true;
  w.header("identity,lhs,rhs,abs_err,tol,passed");
  for (const auto& r : reports) {
    all = all && r.passed;
    if (w.json_mode())
      w.record({{"identity_name", r.identity_name}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"abs_err", r.abs_err},
                {"tol", r.tol}, {"passed", r.passed}});
    else
      w.csv("\"" + r.identity_name + "\"," + num(r.lhs) + "," + num(r.rhs) + "," + num(r.abs_err) + "," + num(r.tol) +
            "," + (r.passed ? "true" : "false"));
  }
  return all ? Exit::Ok : Exit::VerifyFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractional pure birth processes: exact laws, random times, simulation, identity checks", "fracbirth"};
  app.fallthrough();
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  std::uint64_t seed = 0;
  double dt = 0.0;
  app.add_option("--config", config_path, "JSON file with run settings; flags override it");
  app.add_option("--schedule", cfg.schedule_kind, "Rate schedule kind")->check(CLI::IsMember({"linear", "explicit"}));
  app.add_option("--lambda", cfg.lambda, "Linear birth rate per individual");
  app.add_option("--rates", cfg.rates, "Explicit rates lambda_1,lambda_2,...")->delimiter(',');
  app.add_option("--nu", cfg.nu, "Fractional order in (0, 1]");
  app.add_option("--t", cfg.t, "Time");
  app.add_option("--t-grid", cfg.t_grid, "Comma-separated increasing times")->delimiter(',');
  app.add_option("--nus", cfg.nus, "Comma-separated orders")->delimiter(',');
  app.add_option("--n0", cfg.n0, "Initial population");
  app.add_option("--runs", cfg.runs, "Monte Carlo runs or number of samples");
  app.add_option("--seed", seed, "Random seed (required for stochastic commands)");
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output", cfg.output, "Write output to this file instead of stdout");
  app.add_option("--tail-tol", cfg.tail_tol, "Tail mass left out of pmf tables");
  app.add_option("--k-max-hard", cfg.k_max_hard, "Largest k a pmf table may reach");
  app.add_option("--min-expected", cfg.min_expected, "Chi-square pooling threshold");
  app.add_option("--threads", cfg.threads, "Simulation threads (0: all cores)");
  app.add_option("--mode", cfg.mode, "randtime mode")->check(CLI::IsMember({"density", "sample"}));
  app.add_option("--s-grid", cfg.s_grid, "Comma-separated increasing points for densities")->delimiter(',');
  app.add_option("--dt", dt, "Increment window for the moments command");
  const std::vector<std::pair<std::string, std::string>> commands{
      {"pmf", "Truncated probability mass function table"},
      {"mean-curve", "Mean E_{nu,1}(lambda t^nu) over a time grid and several orders"},
      {"moments", "Mean, variance and second factorial moment"},
      {"simulate", "Monte Carlo runs compared with the analytic table"},
      {"randtime", "Density or samples of the random time"},
      {"verify", "Identity verification suite"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return static_cast<int>(Exit::Ok);
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return static_cast<int>(Exit::Usage);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (app.get_option("--seed")->count() > 0) cfg.seed = seed;
  if (app.get_option("--dt")->count() > 0) cfg.dt = dt;

  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg, app);
    if (cfg.format != "csv" && cfg.format != "json") throw UsageError("format must be csv or json");
    std::ofstream file;
    if (!cfg.output.empty()) {
      file.open(cfg.output);
      if (!file) throw UsageError("cannot open output file " + cfg.output);
    }
    std::ostream& sink = cfg.output.empty() ? out : file;
    Writer w(sink, cfg.format == "json");
    logger()->info("command {} nu={} t={}", cfg.command, cfg.nu, cfg.t);
    Exit code = Exit::Ok;
    if (cfg.command == "pmf") code = cmd_pmf(cfg, w);
    else if (cfg.command == "mean-curve") code = cmd_mean_curve(cfg, w);
    else if (cfg.command == "moments") code = cmd_moments(cfg, w);
    else if (cfg.command == "simulate") code = cmd_simulate(cfg, w);
    else if (cfg.command == "randtime") code = cmd_randtime(cfg, w);
    else if (cfg.command == "verify") code = cmd_verify(cfg, w);
    sink.flush();
    return static_cast<int>(code);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return static_cast<int>(Exit::Usage);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return static_cast<int>(is_validation_error(e.code()) ? Exit::Usage : Exit::Numerical);
  }
}

}  // namespace fracbirth
