#pragma once

#include <memory>
#include <string>
#include <variant>

#include "aoisched/solver.hpp"

namespace aoisched {

/// Zero-wait, never preempt: restart at (delta,0,0), continue whenever d >= 1.
Policy persistent_policy(const ModelParams& m);

/// Restart iff l < tau(delta - d, d); always restart at d = 0.
/// Throws CoverageError if the table misses an entry needed by S_m.
Policy threshold_policy(const ThresholdTable& t, const ModelParams& m);

/// Table with the same tau at every (delta0, d).
ThresholdTable constant_thresholds(const ModelParams& m, int tau);

/// Long-run average AoI of the persistent policy on the untruncated chain,
/// E[S] + E[S^2] / (2 E[S]) - 1/2 with S ~ NegBin(k, p) slots per update,
/// i.e. (3k + 1 - p) / (2p) - 1/2.
double persistent_avg_aoi(int k, double p);

/// Which policy to run: a solved table, the persistent baseline, or a
/// threshold table.
class PolicySpec {
 public:
  struct Table {
    std::shared_ptr<const Policy> policy;
  };
  struct Persistent {};
  struct Threshold {
    std::shared_ptr<const ThresholdTable> table;
  };

  static PolicySpec optimal_table(Policy policy);
  static PolicySpec persistent();
  static PolicySpec threshold(ThresholdTable table);

  std::string name() const;

  /// Decision at an untruncated state. Table-backed kinds look the state up at
  /// its capped image, so `m` must match the table's model.
  Action decide(const State& s, const ModelParams& m) const {
    if (s.d == 0) {
      if (const auto* t = std::get_if<Table>(&kind_)) return t->policy->lookup_capped(s);
      return Action::kRestart;
    }
    if (std::holds_alternative<Persistent>(kind_)) return Action::kContinue;
    if (const auto* t = std::get_if<Table>(&kind_)) return t->policy->lookup_capped(s);
    const auto& table = *std::get<Threshold>(kind_).table;
    const State c = cap_state(s, m);
    return c.l < table.at(c.delta - c.d, c.d) ? Action::kRestart : Action::kContinue;
  }

  /// Whether decisions for states beyond delta_max come from a capped lookup.
  bool uses_table() const { return !std::holds_alternative<Persistent>(kind_); }

  /// Dense policy over S_m.
  Policy materialize(const ModelParams& m) const;

  /// Throws ValidityError when a table-backed spec was built for another model.
  void check_model(const ModelParams& m) const;

 private:
  explicit PolicySpec(std::variant<Table, Persistent, Threshold> kind) : kind_(std::move(kind)) {}

  std::variant<Table, Persistent, Threshold> kind_;
};

}  // namespace aoisched
