#pragma once

// Executable checks of the monotonicity and threshold properties that an
// optimal value table / policy of the AoI MDP must satisfy. Violations are
// returned as data.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoisched/solver.hpp"

namespace aoisched {

struct Violation {
  State lhs;
  std::optional<State> rhs;  ///< second state of the compared pair, if any
  double lhs_value = 0.0;
  double rhs_value = 0.0;
  double slack = 0.0;  ///< amount by which the inequality fails
};

struct ViolationReport {
  std::string property_id;
  std::vector<Violation> violations;  ///< first `max_recorded` violations
  std::uint64_t violation_count = 0;
  std::uint64_t pairs_checked = 0;
  double epsilon = 0.0;
  bool informational = false;  ///< reported but not part of pass/fail

  bool passed() const { return violation_count == 0; }
};

struct VerifyOptions {
  double epsilon = 1e-9;
  /// States with delta > delta_max - margin are left out of the checks whose
  /// comparisons go through capped successors (lemma1, lemma2, theorem3,
  /// theorem4). Empty means margin = k.
  std::optional<int> margin;
  std::size_t max_recorded = 100;

  int effective_margin(const ModelParams& m) const { return margin.value_or(m.k); }
};

/// lemma1, lemma2, lemma3, lemma4, lemma5, corollary2 (in that order).
std::vector<ViolationReport> check_value_structure(const ValueTable& v, const VerifyOptions& opts = {});

/// corollary1, theorem1, theorem2, theorem3, theorem4, then the informational
/// theorem3_diag (continue at l = k-1 carried along the diagonal).
std::vector<ViolationReport> check_policy_structure(const Policy& pi, const VerifyOptions& opts = {});

/// True when no non-informational report has violations.
bool all_passed(const std::vector<ViolationReport>& reports);

/// min(tau, min(d, k-1) + 1): the smallest threshold consistent with the
/// policy column, so "restart at every l" compares correctly across d.
int canonical_threshold(int tau, int d, int k);

}  // namespace aoisched
