#include "aoisched/solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "kernel.hpp"

namespace aoisched {

void SolveParams::validate(const ModelParams& m) const {
  m.validate();
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0))
    throw ValidityError(fmt::format("alpha must lie in (0,1), got {}", *alpha));
  if (!(tol > 0.0)) throw ValidityError(fmt::format("tol must be positive, got {}", tol));
  if (max_iter < 1) throw ValidityError(fmt::format("max_iter must be positive, got {}", max_iter));
  if (damping && !(*damping > 0.0 && *damping <= 1.0))
    throw ValidityError(fmt::format("damping must lie in (0,1], got {}", *damping));
  const State ref = reference(m);
  if (!is_valid(ref, m))
    throw ValidityError(fmt::format("reference state {} is not valid", to_string(ref)));
}

State SolveParams::reference(const ModelParams& m) const {
  return reference_state.value_or(State{m.k, 0, 0});
}

double SolveParams::effective_damping(const ModelParams& m) const {
  if (damping) return *damping;
  return m.p < 1.0 ? 1.0 : 0.5;
}

ValueTable::ValueTable(std::shared_ptr<const StateSpace> space, double fill)
    : space_(std::move(space)), values_(space_->size(), fill) {}

Policy::Policy(std::shared_ptr<const StateSpace> space, Action fill)
    : space_(std::move(space)), actions_(space_->size(), fill) {}

double bellman_q(const ValueTable& v, const State& s, Action a, double alpha) {
  double expected = 0.0;
  for (const auto& e : transition(s, a, v.params())) expected += e.prob * v.at(e.state);
  return cost(s) + alpha * expected;
}

namespace {

// One synchronous Bellman sweep: out[i] = min_a Q(i; a) under `in`, with the
// chosen action written to `policy`. With `structured`, actions implied by the
// monotone policy structure are assigned without comparing the two Q values:
// l = 0 restarts; a continue at a lower l (same delta, d) forces continue; a
// restart at a lower d (same delta, l) forces restart.
std::uint64_t sweep(const StateSpace& space, const detail::Kernel& kern,
                    const std::vector<double>& in, std::vector<double>& out, Policy& policy,
                    double alpha, bool structured) {
  const ModelParams& m = space.params();
  const int k = m.k;
  const double p = kern.p;
  const double q = kern.q;
  std::uint64_t evaluations = 0;
  std::vector<std::uint8_t> restart_seen(static_cast<std::size_t>(k));

  std::size_t i = 0;
  for (int delta = k; delta <= m.delta_max; ++delta) {
    const double c = static_cast<double>(delta);
    const auto slice = static_cast<std::size_t>(delta);
    const double q_restart =
        c + alpha * (p * in[kern.restart_succ[slice]] + q * in[kern.restart_fail[slice]]);
    std::fill(restart_seen.begin(), restart_seen.end(), 0);

    for (int d = 0; d <= delta - k; ++d) {
      bool continue_seen = false;
      const int lmax = space.max_l(d);
      for (int l = 0; l <= lmax; ++l, ++i) {
        Action a;
        double value;
        if (structured && (l == 0 || continue_seen || restart_seen[static_cast<std::size_t>(l)])) {
          a = (l != 0 && continue_seen) ? Action::kContinue : Action::kRestart;
          value = a == Action::kRestart
                      ? q_restart
                      : c + alpha * (p * in[kern.cont_succ[i]] + q * in[kern.cont_fail[i]]);
        } else {
          const double q_cont = c + alpha * (p * in[kern.cont_succ[i]] + q * in[kern.cont_fail[i]]);
          ++evaluations;
          if (q_cont < q_restart) {
            a = Action::kContinue;
            value = q_cont;
          } else {
            a = Action::kRestart;
            value = q_restart;
          }
        }
        out[i] = value;
        policy[i] = a;
        if (a == Action::kContinue)
          continue_seen = true;
        else
          restart_seen[static_cast<std::size_t>(l)] = 1;
      }
    }
  }
  return evaluations;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double sup_norm(const std::vector<double>& a) {
  double worst = 0.0;
  for (double x : a) worst = std::max(worst, std::abs(x));
  return worst;
}

constexpr double kRatioFloor = 1e-6;

}  // namespace

SolveResult discounted_vi(const ModelParams& m, const SolveParams& sp) {
  sp.validate(m);
  if (!sp.alpha) throw ValidityError("discounted_vi requires alpha");
  const double alpha = *sp.alpha;

  auto space = std::make_shared<const StateSpace>(m);
  const detail::Kernel kern(*space);
  ValueTable current(space, 0.0);
  ValueTable next(space, 0.0);
  Policy policy(space);
  SolveReport report;

  double previous_diff = 0.0;
  for (int n = 0; n < sp.max_iter; ++n) {
    report.argmin_evaluations +=
        sweep(*space, kern, current.values(), next.values(), policy, alpha, sp.use_structure);
    const double diff = sup_diff(next.values(), current.values());
    // Below the roundoff floor of the iterates the ratio measures noise.
    if (n > 0 && previous_diff > kRatioFloor * (1.0 + sup_norm(next.values())))
      report.max_contraction_ratio = std::max(report.max_contraction_ratio, diff / previous_diff);
    previous_diff = diff;
    std::swap(current, next);
    report.iterations = n + 1;
    report.final_span = diff;
    if (diff <= sp.tol) {
      report.converged = true;
      break;
    }
  }
  return SolveResult{std::move(current), std::move(policy), report};
}

SolveResult relative_vi(const ModelParams& m, const SolveParams& sp) {
  sp.validate(m);
  if (sp.alpha) throw ValidityError("relative_vi runs the average-cost problem; alpha must be empty");

  auto space = std::make_shared<const StateSpace>(m);
  const detail::Kernel kern(*space);
  const std::size_t ref = space->index(sp.reference(m));
  const double tau = sp.effective_damping(m);

  ValueTable current(space, 0.0);
  ValueTable next(space, 0.0);
  Policy policy(space);
  SolveReport report;
  report.damping = tau;

  for (int n = 0; n < sp.max_iter; ++n) {
    const std::vector<double>& v = current.values();
    std::vector<double>& w = next.values();
    report.argmin_evaluations += sweep(*space, kern, v, w, policy, 1.0, sp.use_structure);
    if (tau < 1.0)
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - tau) * v[i] + tau * w[i];
    const double anchor = w[ref];
    double diff = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= anchor;
      diff = std::max(diff, std::abs(w[i] - v[i]));
    }
    std::swap(current, next);
    report.iterations = n + 1;
    report.final_span = diff;
    report.average_cost = anchor / tau;
    if (diff <= sp.tol) {
      report.converged = true;
      break;
    }
  }
  return SolveResult{std::move(current), std::move(policy), report};
}

SolveResult solve(const ModelParams& m, const SolveParams& sp) {
  return sp.alpha ? discounted_vi(m, sp) : relative_vi(m, sp);
}

Policy extract_policy(const ValueTable& v, double alpha) {
  const StateSpace& space = v.space();
  const detail::Kernel kern(space);
  Policy policy(v.space_ptr());
  std::vector<double> scratch(space.size());
  sweep(space, kern, v.values(), scratch, policy, alpha, false);
  return policy;
}

}  // namespace aoisched
