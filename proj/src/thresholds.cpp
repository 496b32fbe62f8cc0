#include <fmt/format.h>

#include "aoisched/solver.hpp"

namespace aoisched {

ThresholdTable::ThresholdTable(int k, int delta_max) : k_(k), delta_max_(delta_max) {
  if (k < 1 || delta_max < 2 * k)
    throw ValidityError(fmt::format("bad threshold table shape k={} delta_max={}", k, delta_max));
  std::size_t total = 0;
  for (int delta0 = k; delta0 <= delta_max; ++delta0) {
    row_offset_.push_back(total);
    total += static_cast<std::size_t>(delta_max - delta0);
  }
  taus_.assign(total, -1);
}

std::size_t ThresholdTable::slot(int delta0, int d) const {
  return row_offset_[static_cast<std::size_t>(delta0 - k_)] + static_cast<std::size_t>(d - 1);
}

int ThresholdTable::at(int delta0, int d) const {
  if (!has(delta0, d))
    throw CoverageError(fmt::format("threshold table has no entry for delta0={} d={}", delta0, d));
  return taus_[slot(delta0, d)];
}

void ThresholdTable::set(int delta0, int d, int tau) {
  if (!in_domain(delta0, d))
    throw CoverageError(fmt::format("(delta0={}, d={}) is outside the threshold domain", delta0, d));
  if (tau < 0 || tau > k_) throw ValidityError(fmt::format("tau must lie in [0,{}], got {}", k_, tau));
  taus_[slot(delta0, d)] = static_cast<std::int16_t>(tau);
}

ThresholdTable extract_thresholds(const Policy& pi) {
  const ModelParams& m = pi.params();
  const StateSpace& space = pi.space();
  ThresholdTable table(m.k, m.delta_max);
  for (int delta0 = m.k; delta0 < m.delta_max; ++delta0) {
    for (int d = 1; delta0 + d <= m.delta_max; ++d) {
      const int delta = delta0 + d;
      const std::size_t base = space.index(State{delta, d, 0});
      const int lmax = space.max_l(d);
      int tau = m.k;
      for (int l = 0; l <= lmax; ++l) {
        const bool restart = pi[base + static_cast<std::size_t>(l)] == Action::kRestart;
        if (tau == m.k && !restart) {
          tau = l;
        } else if (tau != m.k && restart) {
          throw StructureError(fmt::format(
              "policy continues at {} but restarts at {}: no l-threshold",
              to_string(State{delta, d, l - 1}), to_string(State{delta, d, l})));
        }
      }
      table.set(delta0, d, tau);
    }
  }
  return table;
}

}  // namespace aoisched
