#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "aoisched/io.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/sim.hpp"
#include "aoisched/solver.hpp"
#include "aoisched/verify.hpp"

namespace aoisched::cli {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct SolveOptions {
  int k = 0;
  double p = 0.0;
  int delta_max = 0;
  std::string mode = "average";
  std::optional<double> alpha;
  double tol = 1e-9;
  int max_iter = 100000;
  bool structured = false;
  std::optional<double> damping;
  std::string out;
};

struct VerifyCmdOptions {
  std::string policy;
  std::optional<int> margin;
  double epsilon = 1e-9;
};

struct CompareOptions {
  int k = 0;
  std::string p_grid;
  std::string out;
  int delta_max = 0;
  std::int64_t horizon = 1000000;
  int seeds = 10;
  std::uint64_t seed_base = 1;
};

struct ThresholdOptions {
  std::string policy;
  std::optional<int> delta0;
  std::string out;
};

// Shared by trace and simulate.
struct PolicyOptions {
  std::string policy = "persistent";
  std::optional<int> k;
  std::optional<double> p;
  int delta_max = 0;
};

struct TraceOptions {
  PolicyOptions pol;
  std::int64_t slots = 20;
  std::uint64_t seed = 1;
  std::string out;
};

struct SimulateOptions {
  PolicyOptions pol;
  std::int64_t horizon = 1000000;
  std::optional<std::int64_t> burn_in;
  int seeds = 10;
  std::uint64_t seed_base = 1;
  std::string out;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  write_file_atomic(resolve_output_path(path), content);
}

std::vector<std::uint64_t> seed_list(int count, std::uint64_t base) {
  if (count < 1) throw UsageError("--seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0, stop = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) || stop < start)
    throw UsageError(fmt::format("--p-grid expects start:stop:step with step > 0, got '{}'", spec));
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid;
  for (int i = 0; i < n; ++i) grid.push_back(std::round((start + i * step) * 1e12) / 1e12);
  return grid;
}

struct ResolvedPolicy {
  ModelParams model;
  PolicySpec spec;
};

ResolvedPolicy resolve_policy(const PolicyOptions& o) {
  const std::string thresholds_prefix = "thresholds:";
  if (o.policy == "persistent" || o.policy.rfind(thresholds_prefix, 0) == 0) {
    if (!o.k || !o.p) throw UsageError(fmt::format("--policy {} needs --k and --p", o.policy));
    const ModelParams m = make_params(*o.k, *o.p, o.delta_max);
    if (o.policy == "persistent") return {m, PolicySpec::persistent()};
    const std::string path = o.policy.substr(thresholds_prefix.size());
    return {m, PolicySpec::threshold(read_thresholds_csv(read_file(path), m.k, m.delta_max))};
  }
  PolicyDocument doc = load_policy_document(o.policy);
  const ModelParams m = doc.model();
  if ((o.k && *o.k != m.k) || (o.p && *o.p != m.p) || (o.delta_max > 0 && o.delta_max != m.delta_max))
    throw UsageError("--k/--p/--delta-max disagree with the policy document's model");
  return {m, PolicySpec::optimal_table(std::move(doc.policy))};
}

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const ModelParams m = make_params(o.k, o.p, o.delta_max);
  SolveParams sp;
  if (o.mode == "discounted") {
    if (!o.alpha) throw UsageError("--mode discounted needs --alpha");
    sp.alpha = o.alpha;
  } else if (o.alpha) {
    throw UsageError("--alpha only applies to --mode discounted");
  }
  sp.tol = o.tol;
  sp.max_iter = o.max_iter;
  sp.use_structure = o.structured;
  sp.damping = o.damping;

  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult r = solve(m, sp);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!o.out.empty()) save_policy_document(make_policy_document(r, sp), resolve_output_path(o.out));

  fmt::print(out, "model k={} p={} delta_max={} states={}\n", m.k, format_double(m.p), m.delta_max,
             r.values.size());
  fmt::print(out, "mode {}{}\n", o.mode, sp.alpha ? fmt::format(" alpha={}", *sp.alpha) : "");
  fmt::print(out, "iterations {}\n", r.report.iterations);
  fmt::print(out, "converged {}\n", r.report.converged);
  fmt::print(out, "final_span {}\n", format_double(r.report.final_span));
  if (r.report.average_cost) fmt::print(out, "average_cost {}\n", format_double(*r.report.average_cost));
  fmt::print(out, "argmin_evaluations {}\n", r.report.argmin_evaluations);
  fmt::print(out, "elapsed_seconds {:.3f}\n", elapsed);
  return r.report.converged ? kOk : kNotConverged;
}

void print_report(const ViolationReport& r, std::ostream& out) {
  const char* tag = r.informational ? "INFO" : (r.passed() ? "PASS" : "FAIL");
  fmt::print(out, "{} {:<14} violations={} pairs={}\n", tag, r.property_id, r.violation_count, r.pairs_checked);
  for (std::size_t i = 0; i < r.violations.size() && i < 3; ++i) {
    const Violation& v = r.violations[i];
    fmt::print(out, "    {}{} lhs={} rhs={} slack={}\n", to_string(v.lhs),
               v.rhs ? " vs " + to_string(*v.rhs) : std::string(), format_double(v.lhs_value),
               format_double(v.rhs_value), format_double(v.slack));
  }
}

int cmd_verify(const VerifyCmdOptions& o, std::ostream& out) {
  const PolicyDocument doc = load_policy_document(o.policy);
  VerifyOptions vo;
  vo.epsilon = o.epsilon;
  vo.margin = o.margin;
  auto reports = check_value_structure(doc.values, vo);
  for (auto& r : check_policy_structure(doc.policy, vo)) reports.push_back(std::move(r));
  for (const auto& r : reports) print_report(r, out);
  const bool ok = all_passed(reports);
  fmt::print(out, "{}\n", ok ? "all properties hold" : "property violations found");
  return ok ? kOk : kPropertyViolation;
}

int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream& err) {
  const std::vector<double> grid = parse_grid(o.p_grid);
  SimConfig cfg;
  cfg.horizon = o.horizon;
  cfg.seeds = seed_list(o.seeds, o.seed_base);

  std::vector<ExperimentRow> rows;
  for (const double p : grid) {
    try {
      const ModelParams m = make_params(o.k, p, o.delta_max);
      SolveParams sp;
      sp.use_structure = true;
      SolveResult r = relative_vi(m, sp);
      if (!r.report.converged)
        throw ConvergenceError(fmt::format("relative value iteration did not converge in {} iterations",
                                           r.report.iterations));
      const double optimal_exact = evaluate_policy_exact(r.policy);
      const double persistent_exact = evaluate_policy_exact(persistent_policy(m));
      const double gap = persistent_exact - optimal_exact;
      const SimResult sim_opt = simulate(PolicySpec::optimal_table(std::move(r.policy)), m, cfg);
      const SimResult sim_per = simulate(PolicySpec::persistent(), m, cfg);
      rows.push_back({m.k, p, m.delta_max, "optimal", optimal_exact, sim_opt.mean_aoi, sim_opt.std_error, gap,
                      r.report.iterations});
      rows.push_back({m.k, p, m.delta_max, "persistent", persistent_exact, sim_per.mean_aoi,
                      sim_per.std_error, gap, 0});
      fmt::print(err, "p={} optimal={} persistent={} gap={}\n", format_double(p), format_double(optimal_exact),
                 format_double(persistent_exact), format_double(gap));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(fmt::format("compare at p={}: {}", format_double(p), e.what()));
    } catch (const std::exception& e) {
      throw Error(fmt::format("compare at p={}: {}", format_double(p), e.what()));
    }
  }
  emit(o.out, write_experiment_csv(rows), out);
  return kOk;
}

int cmd_thresholds(const ThresholdOptions& o, std::ostream& out) {
  const PolicyDocument doc = load_policy_document(o.policy);
  const ThresholdTable t = extract_thresholds(doc.policy);
  if (o.delta0 && (*o.delta0 < t.k() || *o.delta0 >= t.delta_max()))
    throw UsageError(fmt::format("--delta0 must lie in [{}, {})", t.k(), t.delta_max()));
  emit(o.out, write_thresholds_csv(t, o.delta0), out);
  return kOk;
}

int cmd_trace(const TraceOptions& o, std::ostream& out) {
  const ResolvedPolicy rp = resolve_policy(o.pol);
  emit(o.out, write_trace_csv(trace(rp.spec, rp.model, o.slots, o.seed)), out);
  return kOk;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const ResolvedPolicy rp = resolve_policy(o.pol);
  SimConfig cfg;
  cfg.horizon = o.horizon;
  cfg.burn_in = o.burn_in;
  cfg.seeds = seed_list(o.seeds, o.seed_base);
  const SimResult r = simulate(rp.spec, rp.model, cfg);

  nlohmann::ordered_json j;
  j["policy"] = rp.spec.name();
  j["model"] = {{"k", rp.model.k}, {"p", rp.model.p}, {"delta_max", rp.model.delta_max}};
  j["horizon"] = cfg.horizon;
  j["burn_in"] = cfg.effective_burn_in(rp.model);
  j["seeds"] = cfg.seeds;
  j["generator"] = r.generator;
  j["mean_aoi"] = r.mean_aoi;
  j["stderr"] = r.std_error;
  j["per_seed_means"] = r.per_seed_means;
  j["slots_simulated"] = r.slots_simulated;
  j["clamp_events"] = r.clamp_events;
  emit(o.out, j.dump(2) + "\n", out);
  return kOk;
}

void add_policy_options(CLI::App* cmd, PolicyOptions& o) {
  cmd->add_option("--policy", o.policy, "persistent, a policy JSON document, or thresholds:<csv>");
  cmd->add_option("--k", o.k, "symbols per update");
  cmd->add_option("--p", o.p, "per-slot symbol success probability");
  cmd->add_option("--delta-max", o.delta_max, "truncation boundary (0 = default)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal preemption policies for AoI over an erasure channel with rateless codes",
               args.empty() ? "aoisched" : args.front()};
  app.require_subcommand(1);

  SolveOptions solve_o;
  auto* solve_cmd = app.add_subcommand("solve", "compute an optimal policy and value table");
  solve_cmd->add_option("--k", solve_o.k, "symbols per update")->required();
  solve_cmd->add_option("--p", solve_o.p, "per-slot symbol success probability")->required();
  solve_cmd->add_option("--delta-max", solve_o.delta_max, "truncation boundary (0 = default)");
  solve_cmd->add_option("--mode", solve_o.mode)->check(CLI::IsMember({"average", "discounted"}));
  solve_cmd->add_option("--alpha", solve_o.alpha, "discount factor (discounted mode)");
  solve_cmd->add_option("--tol", solve_o.tol, "sup-norm stopping tolerance");
  solve_cmd->add_option("--max-iter", solve_o.max_iter);
  solve_cmd->add_flag("--structured,!--no-structured", solve_o.structured, "prune with the policy structure");
  solve_cmd->add_option("--damping", solve_o.damping, "aperiodicity weight for relative VI");
  solve_cmd->add_option("--out", solve_o.out, "policy document path");

  VerifyCmdOptions verify_o;
  auto* verify_cmd = app.add_subcommand("verify", "check structural properties of a solved document");
  verify_cmd->add_option("--policy", verify_o.policy, "policy document")->required();
  verify_cmd->add_option("--margin", verify_o.margin, "boundary slices excluded (default k)");
  verify_cmd->add_option("--epsilon", verify_o.epsilon);

  CompareOptions compare_o;
  auto* compare_cmd = app.add_subcommand("compare", "optimal vs persistent over a p grid");
  compare_cmd->add_option("--k", compare_o.k)->required();
  compare_cmd->add_option("--p-grid", compare_o.p_grid, "start:stop:step")->required();
  compare_cmd->add_option("--out", compare_o.out, "CSV path (default stdout)");
  compare_cmd->add_option("--delta-max", compare_o.delta_max);
  compare_cmd->add_option("--horizon", compare_o.horizon);
  compare_cmd->add_option("--seeds", compare_o.seeds, "number of seeds");
  compare_cmd->add_option("--seed-base", compare_o.seed_base);

  ThresholdOptions thr_o;
  auto* thr_cmd = app.add_subcommand("thresholds", "extract tau(delta0, d) from a policy document");
  thr_cmd->add_option("--policy", thr_o.policy)->required();
  thr_cmd->add_option("--delta0", thr_o.delta0);
  thr_cmd->add_option("--out", thr_o.out);

  TraceOptions trace_o;
  auto* trace_cmd = app.add_subcommand("trace", "per-slot AoI trajectory");
  add_policy_options(trace_cmd, trace_o.pol);
  trace_cmd->add_option("--slots", trace_o.slots);
  trace_cmd->add_option("--seed", trace_o.seed);
  trace_cmd->add_option("--out", trace_o.out);

  SimulateOptions sim_o;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo average AoI");
  add_policy_options(sim_cmd, sim_o.pol);
  sim_cmd->add_option("--horizon", sim_o.horizon, "slots per seed");
  sim_cmd->add_option("--burn-in", sim_o.burn_in);
  sim_cmd->add_option("--seeds", sim_o.seeds, "number of seeds");
  sim_cmd->add_option("--seed-base", sim_o.seed_base);
  sim_cmd->add_option("--out", sim_o.out);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_o, out);
    if (verify_cmd->parsed()) return cmd_verify(verify_o, out);
    if (compare_cmd->parsed()) return cmd_compare(compare_o, out, err);
    if (thr_cmd->parsed()) return cmd_thresholds(thr_o, out);
    if (trace_cmd->parsed()) return cmd_trace(trace_o, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim_o, out);
  } catch (const ConvergenceError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kNotConverged;
  } catch (const StructureError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kPropertyViolation;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kUsage;
  }
  return kUsage;
}

}  // namespace aoisched::cli
