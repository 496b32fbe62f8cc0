#include "aoisched/sim.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace aoisched {

namespace {

class Channel {
 public:
  Channel(std::uint64_t seed, double p) : rng_(seed), p_(p) {}

  bool deliver() { return static_cast<double>(rng_() >> 11) * 0x1p-53 < p_; }

 private:
  std::mt19937_64 rng_;
  double p_;
};

struct SeedRun {
  double mean = 0.0;
  std::int64_t clamps = 0;
};

SeedRun run_seed(const PolicySpec& spec, const ModelParams& m, State s, std::int64_t horizon,
                 std::int64_t burn_in, std::uint64_t seed) {
  Channel channel(seed, m.p);
  const bool table = spec.uses_table();
  std::uint64_t aoi_sum = 0;
  SeedRun run;
  for (std::int64_t t = 0; t < horizon; ++t) {
    if (t >= burn_in) aoi_sum += static_cast<std::uint64_t>(s.delta);
    if (table && s.delta > m.delta_max) ++run.clamps;
    const Action a = spec.decide(s, m);
    const bool success = transmits(s, a) && channel.deliver();
    s = raw_successor(s, a, success, m.k);
  }
  run.mean = static_cast<double>(aoi_sum) / static_cast<double>(horizon - burn_in);
  return run;
}

}  // namespace

std::int64_t SimConfig::effective_burn_in(const ModelParams& m) const {
  if (burn_in) return *burn_in;
  return static_cast<std::int64_t>(std::ceil(10.0 * m.k / m.p - 1e-9));
}

void SimConfig::validate(const ModelParams& m) const {
  m.validate();
  if (horizon < 1) throw ValidityError(fmt::format("horizon must be positive, got {}", horizon));
  const std::int64_t b = effective_burn_in(m);
  if (b < 0 || b >= horizon)
    throw ValidityError(fmt::format("burn-in {} must lie in [0, horizon={})", b, horizon));
  if (seeds.empty()) throw ValidityError("at least one seed is required");
  if (initial_state && !is_valid(*initial_state, m))
    throw ValidityError(fmt::format("initial state {} is not valid", to_string(*initial_state)));
}

SimResult simulate(const PolicySpec& spec, const ModelParams& m, const SimConfig& cfg) {
  cfg.validate(m);
  spec.check_model(m);
  const State start = cfg.initial_state.value_or(State{m.k, 0, 0});
  const std::int64_t burn_in = cfg.effective_burn_in(m);

  SimResult result;
  for (const std::uint64_t seed : cfg.seeds) {
    const SeedRun run = run_seed(spec, m, start, cfg.horizon, burn_in, seed);
    result.per_seed_means.push_back(run.mean);
    result.clamp_events += run.clamps;
    result.slots_simulated += cfg.horizon;
  }

  const auto n = static_cast<double>(result.per_seed_means.size());
  double sum = 0.0;
  for (double x : result.per_seed_means) sum += x;
  result.mean_aoi = sum / n;
  if (result.per_seed_means.size() > 1) {
    double ss = 0.0;
    for (double x : result.per_seed_means) ss += (x - result.mean_aoi) * (x - result.mean_aoi);
    result.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return result;
}

std::vector<TrajectoryPoint> trace(const PolicySpec& spec, const ModelParams& m, std::int64_t slots,
                                   std::uint64_t seed, std::optional<State> initial) {
  m.validate();
  spec.check_model(m);
  if (slots < 1) throw ValidityError(fmt::format("slots must be >= 1, got {}", slots));
  State s = initial.value_or(State{m.k, 0, 0});
  if (!is_valid(s, m)) throw ValidityError(fmt::format("initial state {} is not valid", to_string(s)));

  Channel channel(seed, m.p);
  std::vector<TrajectoryPoint> points;
  points.reserve(static_cast<std::size_t>(slots));
  for (std::int64_t t = 1; t <= slots; ++t) {
    const Action a = spec.decide(s, m);
    SymbolOutcome outcome = SymbolOutcome::kIdle;
    if (transmits(s, a)) outcome = channel.deliver() ? SymbolOutcome::kSuccess : SymbolOutcome::kErasure;
    points.push_back(TrajectoryPoint{t, s, a, outcome});
    s = raw_successor(s, a, outcome == SymbolOutcome::kSuccess, m.k);
  }
  return points;
}

std::optional<std::string> validate_trajectory(const std::vector<TrajectoryPoint>& points,
                                               const ModelParams& m) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const TrajectoryPoint& pt = points[i];
    if (!is_valid_untruncated(pt.state, m.k))
      return fmt::format("slot {}: invalid state {}", pt.t, to_string(pt.state));
    const bool sends = transmits(pt.state, pt.action);
    if (sends == (pt.outcome == SymbolOutcome::kIdle))
      return fmt::format("slot {}: outcome {} inconsistent with action {} at {}", pt.t,
                         to_string(pt.outcome), to_int(pt.action), to_string(pt.state));
    if (pt.outcome == SymbolOutcome::kSuccess && m.p <= 0.0)
      return fmt::format("slot {}: success with p = 0", pt.t);
    if (pt.outcome == SymbolOutcome::kErasure && m.p >= 1.0)
      return fmt::format("slot {}: erasure on a perfect channel", pt.t);
    if (i + 1 == points.size()) break;
    const State expected =
        raw_successor(pt.state, pt.action, pt.outcome == SymbolOutcome::kSuccess, m.k);
    if (points[i + 1].state != expected)
      return fmt::format("slot {}: expected {} after {}, got {}", pt.t + 1, to_string(expected),
                         to_string(pt.state), to_string(points[i + 1].state));
    if (points[i + 1].t != pt.t + 1) return fmt::format("slot index jumps after {}", pt.t);
  }
  return std::nullopt;
}

}  // namespace aoisched
