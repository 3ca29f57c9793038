// hetsim: validate, plan, run, sweep and compare handoff scenarios.

#include <cstdlib>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hetsim/hetsim.hpp"

namespace fs = std::filesystem;
using namespace hetsim;

namespace {

struct Common {
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  std::vector<std::string> all_overrides() const {
    auto o = overrides;
    if (seed) o.push_back("sim.seed=" + std::to_string(*seed));
    return o;
  }
  fs::path out() const {
    if (!out_dir.empty()) return out_dir;
    if (const char* env = std::getenv("HETSIM_OUT"); env && *env) return env;
    return ".";
  }
};

void add_common(CLI::App* cmd, Common& c, bool outputs) {
  cmd->add_option("--set", c.overrides, "override, section.key=value (repeatable)");
  cmd->add_option("--seed", c.seed, "random seed");
  if (outputs) cmd->add_option("--out", c.out_dir, "output directory (default $HETSIM_OUT or .)");
}

// A scenario path followed by any number of key=value overrides.
std::string split_positionals(const std::vector<std::string>& args, Common& c) {
  if (args.empty()) throw ScenarioError(ErrorKind::Usage, "missing scenario file");
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].find('=') == std::string::npos)
      throw ScenarioError(ErrorKind::Usage, "unexpected argument '" + args[i] + "' (overrides are key=value)");
    c.overrides.push_back(args[i]);
  }
  return args.front();
}

void dump_graph(const ScenarioConfig& cfg, const fs::path& dir) {
  const auto graph = scenario_graph(cfg);
  graph.dump(std::cout);
  write_atomically(dir / "graph.txt", [&](std::ostream& os) { graph.dump(os); });
}

int cmd_validate(const std::string& path, const Common& c) {
  const auto cfg = parse_scenario(path, c.all_overrides());
  std::cout << "ok " << cfg.name << ": " << cfg.aps.size() << " access points, route "
            << fmt(cfg.route().length(), 1) << " m\n";
  return 0;
}

int cmd_plan(const std::string& path, const Common& c, bool graph) {
  const auto cfg = parse_scenario(path, c.all_overrides());
  if (graph) dump_graph(cfg, c.out());
  try {
    const auto p = plan(scenario_graph(cfg));
    print_plan(std::cout, p, cfg.aps);
  } catch (const CoverageGapError& e) {
    std::cerr << "hetsim: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Runtime);
  }
  return 0;
}

int cmd_run(const std::string& path, const Common& c, const std::string& format, bool graph) {
  const auto cfg = parse_scenario(path, c.all_overrides());
  const auto dir = c.out();
  if (graph) dump_graph(cfg, dir);
  const auto r = run(cfg);
  if (!r.plan_error.empty()) std::cerr << "hetsim: note: " << r.plan_error << "; running without a plan\n";
  if (format == "csv" || format == "both")
    write_atomically(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(os, r.trace); });
  if (format == "summary" || format == "both") {
    write_atomically(dir / "summary.txt", [&](std::ostream& os) { write_summary_text(os, cfg.name, r.metrics); });
    write_atomically(dir / "summary.kv", [&](std::ostream& os) { write_summary_kv(os, cfg.name, r.metrics); });
  }
  write_summary_text(std::cout, cfg.name, r.metrics);
  return 0;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

int cmd_sweep(const std::string& path, const Common& c, const std::string& key, const std::string& values) {
  auto doc = read_document(path);
  const auto type = override_type(doc, key);
  if (!type || !is_numeric(*type)) throw ScenarioError(ErrorKind::Usage, "sweep key '" + key + "' is not a numeric field");
  const auto vals = split_values(values);
  if (vals.empty()) throw ScenarioError(ErrorKind::Usage, "sweep needs at least one value");

  // Parse everything up front so configuration errors surface before any run.
  std::vector<ScenarioConfig> cfgs;
  for (const auto& v : vals) {
    auto o = c.all_overrides();
    o.push_back(key + "=" + v);
    cfgs.push_back(parse_scenario(path, o));
  }
  std::vector<std::future<MetricsReport>> jobs;
  for (const auto& cfg : cfgs) jobs.push_back(std::async(std::launch::async, [&cfg] { return run(cfg).metrics; }));
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < vals.size(); ++i) rows.push_back({vals[i], jobs[i].get()});

  write_atomically(c.out() / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, key, rows); });
  write_sweep_csv(std::cout, key, rows);
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const Common& c) {
  if (paths.size() < 2) throw ScenarioError(ErrorKind::Usage, "compare needs at least two scenario files");
  std::vector<NamedScenario> named;
  for (const auto& p : paths) {
    auto cfg = parse_scenario(p, c.all_overrides());
    named.push_back({cfg.name, std::move(cfg)});
  }
  ComparisonTable table;
  try {
    table = compare(named);
  } catch (const ValidationError& e) {
    throw ScenarioError(ErrorKind::Semantic, e.what());
  }
  write_atomically(c.out() / "compare.csv", [&](std::ostream& os) { write_comparison_csv(os, table); });
  write_comparison_csv(std::cout, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetsim: handoff planning and simulation for heterogeneous wireless networks"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> args;
  bool graph = false;
  std::string format = "both";
  std::string sweep_key, sweep_values;

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("args", args, "scenario file then key=value overrides")->required();
  add_common(validate, common, false);

  auto* planc = app.add_subcommand("plan", "print the minimum-handover attachment plan");
  planc->add_option("args", args, "scenario file then key=value overrides")->required();
  planc->add_flag("--dump-graph", graph, "also print the coverage graph");
  add_common(planc, common, true);

  auto* runc = app.add_subcommand("run", "simulate a scenario");
  runc->add_option("args", args, "scenario file then key=value overrides")->required();
  runc->add_flag("--dump-graph", graph, "also write the coverage graph");
  runc->add_option("--format", format, "outputs to write")->check(CLI::IsMember({"csv", "summary", "both"}));
  add_common(runc, common, true);

  auto* sweepc = app.add_subcommand("sweep", "run one simulation per value of a numeric key");
  sweepc->add_option("args", args, "scenario file then key=value overrides")->required();
  sweepc->add_option("--key", sweep_key, "dotted numeric key, e.g. policy.hysteresis")->required();
  sweepc->add_option("--values", sweep_values, "comma separated values")->required();
  add_common(sweepc, common, true);

  auto* comparec = app.add_subcommand("compare", "run several scenarios on one route and tabulate");
  comparec->add_option("args", args, "scenario files")->required();
  add_common(comparec, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::Usage);
  }

  try {
    if (*validate) return cmd_validate(split_positionals(args, common), common);
    if (*planc) return cmd_plan(split_positionals(args, common), common, graph);
    if (*runc) return cmd_run(split_positionals(args, common), common, format, graph);
    if (*sweepc) return cmd_sweep(split_positionals(args, common), common, sweep_key, sweep_values);
    if (*comparec) return cmd_compare(args, common);
  } catch (const ScenarioError& e) {
    std::cerr << "hetsim: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "hetsim: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Runtime);
  }
  return static_cast<int>(ErrorKind::Usage);
}
