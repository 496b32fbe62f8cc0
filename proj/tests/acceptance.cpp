// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Usage: aoisched_acceptance [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "aoisched/io.hpp"
#include "aoisched/policies.hpp"
#include "aoisched/sim.hpp"
#include "aoisched/verify.hpp"
#include "oracles.hpp"

using namespace aoisched;

namespace {

constexpr int kGridK[] = {1, 2, 5};
constexpr double kGridP[] = {0.3, 0.5, 0.8};

constexpr double kEpsilon = 1e-9;
constexpr double kPersistentExactRel = 0.002;
constexpr double kStdErrors = 3.0;
constexpr std::int64_t kMcSlots = 10'000'000;
constexpr int kMcSeeds = 20;
constexpr double kAverageRel = 0.001;
constexpr double kAlpha = 0.999;
constexpr double kDiscountedTol = 1e-6;
constexpr double kMaxClampFraction = 1e-4;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("  {} {}", ok ? "ok  " : "FAIL", what));
  }
};

std::string key(int k, double p) { return fmt::format("k={} p={}", k, p); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double sup_diff(const ValueTable& a, const ValueTable& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Plain relative VI per grid point, shared by several criteria.
std::map<std::string, SolveResult> g_plain;

const SolveResult& plain_solution(int k, double p) {
  auto it = g_plain.find(key(k, p));
  if (it != g_plain.end()) return it->second;
  SolveResult r = relative_vi(make_params(k, p), SolveParams{});
  if (!r.report.converged) throw ConvergenceError(fmt::format("relative VI did not converge at {}", key(k, p)));
  return g_plain.emplace(key(k, p), std::move(r)).first->second;
}

SimConfig mc_config() {
  SimConfig cfg;
  cfg.horizon = kMcSlots;
  cfg.seeds.clear();
  for (int i = 0; i < kMcSeeds; ++i) cfg.seeds.push_back(1000 + static_cast<std::uint64_t>(i));
  return cfg;
}

Outcome structural_suite() {
  Outcome o;
  for (int k : kGridK)
    for (double p : kGridP) {
      const SolveResult& r = plain_solution(k, p);
      VerifyOptions vo;
      vo.epsilon = kEpsilon;
      auto reports = check_value_structure(r.values, vo);
      for (auto& rep : check_policy_structure(r.policy, vo)) reports.push_back(std::move(rep));
      std::uint64_t checked = 0, bad = 0, properties = 0;
      std::string failing;
      for (const auto& rep : reports) {
        if (rep.informational) continue;
        ++properties;
        checked += rep.pairs_checked;
        bad += rep.violation_count;
        if (!rep.passed()) failing += " " + rep.property_id;
      }
      o.require(properties == 11 && bad == 0,
                fmt::format("{}: {} properties, {} comparisons, {} violations{}", key(k, p), properties, checked,
                            bad, failing.empty() ? "" : " in" + failing));
    }
  return o;
}

Outcome persistent_baseline() {
  Outcome o;
  const SimConfig cfg = mc_config();
  for (int k : kGridK)
    for (double p : kGridP) {
      const double formula = persistent_avg_aoi(k, p);

      // Formula against an independent renewal-reward simulation.
      std::vector<double> rr;
      for (int s = 0; s < kMcSeeds; ++s)
        rr.push_back(oracle::renewal_reward_persistent(k, p, 500'000, 77 + static_cast<std::uint64_t>(s)));
      double mean = 0, ss = 0;
      for (double x : rr) mean += x;
      mean /= rr.size();
      for (double x : rr) ss += (x - mean) * (x - mean);
      const double rr_se = std::sqrt(ss / (rr.size() - 1) / rr.size());
      o.require(std::abs(mean - formula) <= kStdErrors * rr_se,
                fmt::format("{}: renewal-reward {:.6f} +- {:.2g} vs closed form {:.6f}", key(k, p), mean, rr_se,
                            formula));

      const double exact = evaluate_policy_exact(persistent_policy(make_params(k, p)));
      o.require(rel(exact, formula) <= kPersistentExactRel,
                fmt::format("{}: exact {:.9f} vs closed form, rel diff {:.2e}", key(k, p), exact,
                            rel(exact, formula)));

      const SimResult mc = simulate(PolicySpec::persistent(), make_params(k, p), cfg);
      o.require(std::abs(mc.mean_aoi - formula) <= kStdErrors * mc.std_error,
                fmt::format("{}: Monte Carlo {:.6f} +- {:.2g} ({} slots)", key(k, p), mc.mean_aoi, mc.std_error,
                            mc.slots_simulated));
    }
  return o;
}

Outcome deterministic_anchors() {
  Outcome o;
  for (auto [k, expected, tol] : {std::tuple{1, 1.0, 1e-9}, std::tuple{5, 7.0, 1e-6}}) {
    const ModelParams m = make_params(k, 1.0);
    const SolveResult r = relative_vi(m, SolveParams{});
    const double g = r.report.average_cost.value_or(NAN);
    const double opt_exact = evaluate_policy_exact(r.policy);
    const double per_exact = evaluate_policy_exact(persistent_policy(m));
    o.require(r.report.converged && std::abs(g - expected) <= tol,
              fmt::format("k={} p=1: relative VI g = {:.12f}", k, g));
    o.require(std::abs(opt_exact - expected) <= tol, fmt::format("k={} p=1: optimal exact {:.12f}", k, opt_exact));
    o.require(std::abs(per_exact - expected) <= tol,
              fmt::format("k={} p=1: persistent exact {:.12f}", k, per_exact));
  }
  return o;
}

Outcome dominance_and_gap() {
  Outcome o;
  std::map<int, double> gap;
  for (int i = 1; i <= 9; ++i) {
    const double p = i / 10.0;
    const ModelParams m = make_params(5, p);
    SolveParams sp;
    sp.use_structure = true;
    const SolveResult r = relative_vi(m, sp);
    const double opt = evaluate_policy_exact(r.policy);
    const double per = evaluate_policy_exact(persistent_policy(m));
    gap[i] = per - opt;
    o.require(r.report.converged && opt <= per + 1e-9 && (i > 8 || gap[i] > 0),
              fmt::format("k=5 p={:.1f}: optimal {:.6f} persistent {:.6f} gap {:.6f}", p, opt, per, gap[i]));
  }
  o.require(gap[9] < gap[5], fmt::format("gap(0.9) = {:.6f} < gap(0.5) = {:.6f}", gap[9], gap[5]));
  return o;
}

Outcome structured_equivalence() {
  Outcome o;
  for (int k : kGridK)
    for (double p : kGridP) {
      const SolveResult& plain = plain_solution(k, p);
      SolveParams sp;
      sp.use_structure = true;
      const SolveResult pruned = relative_vi(make_params(k, p), sp);
      const double diff = sup_diff(plain.values, pruned.values);
      o.require(plain.policy == pruned.policy && diff <= 1e-9 &&
                    pruned.report.argmin_evaluations < plain.report.argmin_evaluations,
                fmt::format("{}: policies {}, sup-norm {:.1e}, argmin evaluations {} vs {}", key(k, p),
                            plain.policy == pruned.policy ? "identical" : "DIFFER", diff,
                            pruned.report.argmin_evaluations, plain.report.argmin_evaluations));
    }
  return o;
}

Outcome discount_limit() {
  Outcome o;
  for (int k : kGridK)
    for (double p : kGridP) {
      const SolveResult& avg = plain_solution(k, p);
      SolveParams sp;
      sp.alpha = kAlpha;
      sp.tol = kDiscountedTol;
      sp.max_iter = 200000;
      sp.use_structure = true;
      const SolveResult disc = discounted_vi(make_params(k, p), sp);
      const double g = *avg.report.average_cost;
      const double exact = evaluate_policy_exact(disc.policy);
      o.require(disc.report.converged && rel(exact, g) <= kAverageRel,
                fmt::format("{}: alpha={} policy averages {:.9f} vs g {:.9f} (rel {:.1e}, {} iterations)", key(k, p),
                            kAlpha, exact, g, rel(exact, g), disc.report.iterations));
    }
  return o;
}

Outcome truncation_robustness() {
  Outcome o;
  for (int k : kGridK)
    for (double p : kGridP) {
      const ModelParams m = make_params(k, p);
      const double g = *plain_solution(k, p).report.average_cost;
      SolveParams sp;
      sp.use_structure = true;
      const SolveResult big = relative_vi(make_params(k, p, 2 * m.delta_max), sp);
      const double g2 = big.report.average_cost.value_or(NAN);
      o.require(big.report.converged && rel(g2, g) <= kAverageRel,
                fmt::format("{}: delta_max {} -> {}: g {:.9f} -> {:.9f} (rel {:.1e})", key(k, p), m.delta_max,
                            2 * m.delta_max, g, g2, rel(g2, g)));
    }
  return o;
}

Outcome simulation_agreement() {
  Outcome o;
  const SolveResult& r = plain_solution(5, 0.5);
  const ModelParams m = make_params(5, 0.5);
  const double exact = evaluate_policy_exact(r.policy);
  const SimResult mc = simulate(PolicySpec::optimal_table(r.policy), m, mc_config());
  const double clamp_fraction = static_cast<double>(mc.clamp_events) / static_cast<double>(mc.slots_simulated);
  o.require(std::abs(mc.mean_aoi - exact) <= kStdErrors * mc.std_error,
            fmt::format("k=5 p=0.5: Monte Carlo {:.6f} +- {:.2g} vs exact {:.6f} ({:.2f} standard errors)",
                        mc.mean_aoi, mc.std_error, exact, std::abs(mc.mean_aoi - exact) / mc.std_error));
  o.require(clamp_fraction < kMaxClampFraction,
            fmt::format("clamp events {} of {} slots", mc.clamp_events, mc.slots_simulated));
  return o;
}

Outcome round_trips() {
  Outcome o;
  for (int k : kGridK)
    for (double p : kGridP) {
      const SolveResult& r = plain_solution(k, p);
      const ModelParams m = make_params(k, p);
      const Policy back = threshold_policy(extract_thresholds(r.policy), m);
      std::size_t mismatches = 0;
      r.policy.space().for_each([&](const State& s, std::size_t i) {
        if (s.d >= 1 && back[i] != r.policy[i]) ++mismatches;
      });
      SolveParams sp;
      const std::string first = write_policy_document(make_policy_document(r, sp));
      const std::string second = write_policy_document(read_policy_document(first));
      o.require(mismatches == 0 && first == second,
                fmt::format("{}: threshold reconstruction mismatches {}, document {} bytes {}", key(k, p),
                            mismatches, first.size(), first == second ? "identical" : "DIFFER"));
    }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "structural suite on the relative-VI solutions", structural_suite},
      {2, "persistent baseline matches its closed form", persistent_baseline},
      {3, "deterministic-channel anchors", deterministic_anchors},
      {4, "optimal dominates persistent and the gap shrinks as p -> 1 (k=5)", dominance_and_gap},
      {5, "structured sweep equals the plain sweep with fewer argmin evaluations", structured_equivalence},
      {6, "alpha=0.999 discounted policy is average-cost optimal within 0.1%", discount_limit},
      {7, "doubling delta_max moves g by at most 0.1%", truncation_robustness},
      {8, "Monte Carlo agrees with exact evaluation for the optimal policy", simulation_agreement},
      {9, "threshold and document round trips", round_trips},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("[{}] criterion {}: {} ({:.1f} s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs);
    for (const auto& n : o.notes) fmt::print("{}\n", n);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
