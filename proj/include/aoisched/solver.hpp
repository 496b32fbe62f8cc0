#pragma once

// Discounted value iteration, average-cost relative value iteration with the
// structure-pruned sweep, threshold extraction and exact policy evaluation.

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "aoisched/model.hpp"

namespace aoisched {

/// Raised when a policy lacks the monotone l-threshold structure.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// Raised when a lookup table does not cover a required state.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Raised when an iterative computation fails to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

struct SolveParams {
  std::optional<double> alpha;  ///< discount factor; empty selects average cost
  double tol = 1e-9;
  int max_iter = 100000;
  std::optional<State> reference_state;  ///< defaults to (k,0,0)
  bool use_structure = false;
  /// Aperiodicity weight tau in (0,1] for relative value iteration: the sweep
  /// runs on tau*P + (1-tau)*I. Empty picks 1 for p < 1 and 0.5 for p = 1.
  std::optional<double> damping;

  void validate(const ModelParams& m) const;
  State reference(const ModelParams& m) const;
  double effective_damping(const ModelParams& m) const;
};

/// Real value per truncated state.
class ValueTable {
 public:
  ValueTable() = default;
  explicit ValueTable(std::shared_ptr<const StateSpace> space, double fill = 0.0);

  const ModelParams& params() const { return space_->params(); }
  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }
  std::size_t size() const { return values_.size(); }

  double at(const State& s) const { return values_[space_->checked_index(s)]; }
  void set(const State& s, double v) { values_[space_->checked_index(s)] = v; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<double> values_;
};

/// Deterministic stationary policy over the truncated states.
class Policy {
 public:
  Policy() = default;
  explicit Policy(std::shared_ptr<const StateSpace> space, Action fill = Action::kRestart);

  const ModelParams& params() const { return space_->params(); }
  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }
  std::size_t size() const { return actions_.size(); }

  Action at(const State& s) const { return actions_[space_->checked_index(s)]; }
  void set(const State& s, Action a) { actions_[space_->checked_index(s)] = a; }
  Action operator[](std::size_t i) const { return actions_[i]; }
  Action& operator[](std::size_t i) { return actions_[i]; }

  /// Action for an untruncated state, looked up at its capped image.
  Action lookup_capped(const State& s) const {
    return actions_[space_->index(cap_state(s, space_->params()))];
  }

  friend bool operator==(const Policy& a, const Policy& b) {
    return a.params() == b.params() && a.actions_ == b.actions_;
  }

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<Action> actions_;
};

struct SolveReport {
  int iterations = 0;
  double final_span = 0.0;              ///< sup-norm of the last successive difference
  std::optional<double> average_cost;   ///< average-cost mode only
  bool converged = false;
  std::uint64_t argmin_evaluations = 0; ///< states where both actions were compared
  double max_contraction_ratio = 0.0;   ///< discounted mode: max successive-difference ratio
  double damping = 1.0;
};

struct SolveResult {
  ValueTable values;
  Policy policy;
  SolveReport report;
};

/// C(s) + alpha * E[V(s') | s, a].
double bellman_q(const ValueTable& v, const State& s, Action a, double alpha);

/// Value iteration on the discounted problem from V_0 = 0.
SolveResult discounted_vi(const ModelParams& m, const SolveParams& sp);

/// Relative value iteration for the long-run average AoI.
SolveResult relative_vi(const ModelParams& m, const SolveParams& sp);

/// Dispatches on sp.alpha.
SolveResult solve(const ModelParams& m, const SolveParams& sp);

/// Greedy policy for v; ties go to restart.
Policy extract_policy(const ValueTable& v, double alpha);

/// tau(delta0, d) for delta0 >= k, d >= 1, delta0 + d <= delta_max.
class ThresholdTable {
 public:
  ThresholdTable() = default;
  ThresholdTable(int k, int delta_max);

  int k() const { return k_; }
  int delta_max() const { return delta_max_; }

  bool in_domain(int delta0, int d) const {
    return delta0 >= k_ && d >= 1 && delta0 + d <= delta_max_;
  }
  bool has(int delta0, int d) const { return in_domain(delta0, d) && taus_[slot(delta0, d)] >= 0; }

  /// Throws CoverageError when the entry is missing.
  int at(int delta0, int d) const;
  void set(int delta0, int d, int tau);

  /// Calls f(delta0, d, tau) for every present entry, ascending by (delta0, d).
  template <typename F>
  void for_each(F&& f) const {
    for (int delta0 = k_; delta0 < delta_max_; ++delta0)
      for (int d = 1; delta0 + d <= delta_max_; ++d) {
        const int tau = taus_[slot(delta0, d)];
        if (tau >= 0) f(delta0, d, tau);
      }
  }

  friend bool operator==(const ThresholdTable&, const ThresholdTable&) = default;

 private:
  std::size_t slot(int delta0, int d) const;

  int k_ = 0;
  int delta_max_ = 0;
  std::vector<std::size_t> row_offset_;
  std::vector<std::int16_t> taus_;  // -1 marks a missing entry
};

/// tau(delta0, d) = min{l : pi(delta0+d, d, l) = continue}, or k when the
/// policy restarts at every l. Throws StructureError naming the first state
/// where a continue at l is followed by a restart at l+1.
ThresholdTable extract_thresholds(const Policy& pi);

struct EvaluateOptions {
  double tol = 1e-12;         ///< L1 residual of pi P - pi
  int max_iter = 2000000;
  int stall_window = 2000;    ///< iterations without halving before damping kicks in
};

/// Long-run average AoI of pi on the truncated chain, starting from (k,0,0).
double evaluate_policy_exact(const Policy& pi, const EvaluateOptions& opts = {});

/// Stationary distribution from (k,0,0) (indexed like the state space).
std::vector<double> stationary_distribution(const Policy& pi, const EvaluateOptions& opts = {});

}  // namespace aoisched
