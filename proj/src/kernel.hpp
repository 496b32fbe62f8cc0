#pragma once

#include <cstdint>
#include <vector>

#include "aoisched/model.hpp"

namespace aoisched::detail {

// Successor indices of every truncated state, compiled once from transition().
// succ is the symbol-success branch (weight p) and fail the erasure branch
// (weight 1-p); single-successor transitions store the same index twice.
struct Kernel {
  explicit Kernel(const StateSpace& space);

  std::vector<std::uint32_t> cont_succ, cont_fail;        // per state, a = continue
  std::vector<std::uint32_t> restart_succ, restart_fail;  // per delta slice, a = restart
  double p = 1.0;
  double q = 0.0;
};

inline Kernel::Kernel(const StateSpace& space)
    : p(space.params().p), q(1.0 - space.params().p) {
  const ModelParams& m = space.params();
  cont_succ.resize(space.size());
  cont_fail.resize(space.size());
  restart_succ.resize(static_cast<std::size_t>(m.delta_max + 1));
  restart_fail.resize(static_cast<std::size_t>(m.delta_max + 1));

  auto store = [&](const TransitionDist& t, std::uint32_t& succ, std::uint32_t& fail) {
    succ = static_cast<std::uint32_t>(space.index(t[0].state));
    fail = t.size() == 2 ? static_cast<std::uint32_t>(space.index(t[1].state)) : succ;
  };
  space.for_each([&](const State& s, std::size_t i) {
    store(transition(s, Action::kContinue, m), cont_succ[i], cont_fail[i]);
    if (s.d == 0) {
      const auto slice = static_cast<std::size_t>(s.delta);
      store(transition(s, Action::kRestart, m), restart_succ[slice], restart_fail[slice]);
    }
  });
}

}  // namespace aoisched::detail
