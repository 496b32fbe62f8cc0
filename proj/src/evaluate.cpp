#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "aoisched/solver.hpp"
#include "kernel.hpp"

namespace aoisched {

namespace {

// next = pi P for the chain induced by `policy`.
void push_forward(const StateSpace& space, const detail::Kernel& kern, const Policy& policy,
                  const std::vector<double>& pi, std::vector<double>& next) {
  std::fill(next.begin(), next.end(), 0.0);
  const ModelParams& m = space.params();
  std::size_t i = 0;
  for (int delta = m.k; delta <= m.delta_max; ++delta) {
    const auto slice = static_cast<std::size_t>(delta);
    const std::size_t end = i + space.slice_size(delta);
    for (; i < end; ++i) {
      const double mass = pi[i];
      if (mass == 0.0) continue;
      std::uint32_t succ, fail;
      if (policy[i] == Action::kRestart) {
        succ = kern.restart_succ[slice];
        fail = kern.restart_fail[slice];
      } else {
        succ = kern.cont_succ[i];
        fail = kern.cont_fail[i];
      }
      next[succ] += kern.p * mass;
      next[fail] += kern.q * mass;
    }
  }
}

}  // namespace

std::vector<double> stationary_distribution(const Policy& policy, const EvaluateOptions& opts) {
  const StateSpace& space = policy.space();
  const ModelParams& m = space.params();
  const detail::Kernel kern(space);

  std::vector<double> pi(space.size(), 0.0);
  std::vector<double> next(space.size(), 0.0);
  pi[space.index(State{m.k, 0, 0})] = 1.0;

  // Plain power iteration first; a periodic recurrent class makes the residual
  // stall, in which case switch to the lazy chain (P + I) / 2, which has the
  // same stationary distribution.
  bool lazy = false;
  double window_start = 0.0;
  for (int n = 0; n < opts.max_iter; ++n) {
    push_forward(space, kern, policy, pi, next);
    double total = 0.0;
    double residual = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      residual += std::abs(next[i] - pi[i]);
      if (lazy) next[i] = 0.5 * (next[i] + pi[i]);
      total += next[i];
    }
    for (double& x : next) x /= total;
    pi.swap(next);
    if (residual <= opts.tol) return pi;

    if (!lazy && n % opts.stall_window == 0) {
      if (n > 0 && residual > 0.5 * window_start) lazy = true;
      window_start = residual;
    }
  }
  throw ConvergenceError(fmt::format(
      "stationary distribution did not reach residual {} within {} iterations", opts.tol,
      opts.max_iter));
}

double evaluate_policy_exact(const Policy& policy, const EvaluateOptions& opts) {
  const std::vector<double> pi = stationary_distribution(policy, opts);
  double avg = 0.0;
  policy.space().for_each([&](const State& s, std::size_t i) { avg += pi[i] * cost(s); });
  return avg;
}

}  // namespace aoisched
