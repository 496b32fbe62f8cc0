#pragma once

// Seeded Monte Carlo simulation of the erasure channel under a policy. The
// simulated chain is not truncated; table-backed policies are queried at the
// capped image of states beyond delta_max and such slots are counted.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoisched/policies.hpp"

namespace aoisched {

/// Name of the per-seed generator, recorded in every result.
inline constexpr const char* kGeneratorName = "std::mt19937_64; success iff (x >> 11) * 2^-53 < p";

struct SimConfig {
  std::int64_t horizon = 1000000;       ///< slots per seed, burn-in included
  std::optional<std::int64_t> burn_in;  ///< defaults to ceil(10 k / p)
  std::vector<std::uint64_t> seeds{1};
  std::optional<State> initial_state;   ///< defaults to (k,0,0)

  std::int64_t effective_burn_in(const ModelParams& m) const;
  void validate(const ModelParams& m) const;
};

struct SimResult {
  double mean_aoi = 0.0;
  double std_error = 0.0;  ///< standard error of the mean across seeds
  std::vector<double> per_seed_means;
  std::int64_t slots_simulated = 0;
  std::int64_t clamp_events = 0;  ///< slots whose policy lookup needed capping
  std::string generator = kGeneratorName;
};

struct TrajectoryPoint {
  std::int64_t t = 0;  ///< 1-based slot index
  State state;         ///< at the beginning of slot t
  Action action = Action::kRestart;
  SymbolOutcome outcome = SymbolOutcome::kIdle;
};

SimResult simulate(const PolicySpec& spec, const ModelParams& m, const SimConfig& cfg);

/// Per-slot trajectory from `initial` (default (k,0,0)).
std::vector<TrajectoryPoint> trace(const PolicySpec& spec, const ModelParams& m, std::int64_t slots,
                                   std::uint64_t seed, std::optional<State> initial = std::nullopt);

/// Replays a trajectory against the untruncated dynamics. Returns a
/// description of the first inconsistency, or nothing if every consecutive
/// pair is a positive-probability transition.
std::optional<std::string> validate_trajectory(const std::vector<TrajectoryPoint>& points,
                                               const ModelParams& m);

}  // namespace aoisched
