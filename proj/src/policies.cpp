#include "aoisched/policies.hpp"

#include <fmt/format.h>

namespace aoisched {

Policy persistent_policy(const ModelParams& m) {
  auto space = std::make_shared<const StateSpace>(m);
  Policy pi(space);
  space->for_each([&](const State& s, std::size_t i) {
    pi[i] = s.d == 0 ? Action::kRestart : Action::kContinue;
  });
  return pi;
}

Policy threshold_policy(const ThresholdTable& t, const ModelParams& m) {
  if (t.k() != m.k)
    throw ValidityError(fmt::format("threshold table built for k={}, model has k={}", t.k(), m.k));
  auto space = std::make_shared<const StateSpace>(m);
  Policy pi(space);
  space->for_each([&](const State& s, std::size_t i) {
    if (s.d == 0) {
      pi[i] = Action::kRestart;
      return;
    }
    if (!t.has(s.delta - s.d, s.d))
      throw CoverageError(fmt::format("threshold table has no entry for delta0={} d={} (state {})",
                                      s.delta - s.d, s.d, to_string(s)));
    pi[i] = s.l < t.at(s.delta - s.d, s.d) ? Action::kRestart : Action::kContinue;
  });
  return pi;
}

ThresholdTable constant_thresholds(const ModelParams& m, int tau) {
  ThresholdTable t(m.k, m.delta_max);
  for (int delta0 = m.k; delta0 < m.delta_max; ++delta0)
    for (int d = 1; delta0 + d <= m.delta_max; ++d) t.set(delta0, d, tau);
  return t;
}

double persistent_avg_aoi(int k, double p) {
  if (k < 1 || !(p > 0.0 && p <= 1.0))
    throw ValidityError(fmt::format("persistent_avg_aoi needs k >= 1 and p in (0,1], got k={} p={}", k, p));
  return (3.0 * k + 1.0 - p) / (2.0 * p) - 0.5;
}

PolicySpec PolicySpec::optimal_table(Policy policy) {
  return PolicySpec(Table{std::make_shared<const Policy>(std::move(policy))});
}

PolicySpec PolicySpec::persistent() { return PolicySpec(Persistent{}); }

PolicySpec PolicySpec::threshold(ThresholdTable table) {
  return PolicySpec(Threshold{std::make_shared<const ThresholdTable>(std::move(table))});
}

std::string PolicySpec::name() const {
  if (std::holds_alternative<Table>(kind_)) return "optimal";
  if (std::holds_alternative<Persistent>(kind_)) return "persistent";
  return "threshold";
}

Policy PolicySpec::materialize(const ModelParams& m) const {
  check_model(m);
  if (const auto* t = std::get_if<Table>(&kind_)) return *t->policy;
  if (std::holds_alternative<Persistent>(kind_)) return persistent_policy(m);
  return threshold_policy(*std::get<Threshold>(kind_).table, m);
}

void PolicySpec::check_model(const ModelParams& m) const {
  m.validate();
  if (const auto* t = std::get_if<Table>(&kind_)) {
    if (!(t->policy->params() == m))
      throw ValidityError("policy table was built for a different model");
  } else if (const auto* th = std::get_if<Threshold>(&kind_)) {
    if (th->table->k() != m.k || th->table->delta_max() != m.delta_max)
      throw ValidityError("threshold table was built for a different model");
  }
}

}  // namespace aoisched
