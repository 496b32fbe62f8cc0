#pragma once

// State space, cost and transition kernel of the truncated AoI scheduling MDP
// for a rateless-coded source on a Bernoulli erasure channel.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoisched {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a state or parameter set violates the model invariants.
class ValidityError : public Error {
 public:
  using Error::Error;
};

/// (delta, d, l): destination AoI, age of the in-flight update, and number of
/// coded symbols of that update already delivered.
struct State {
  int delta = 0;
  int d = 0;
  int l = 0;

  friend constexpr bool operator==(const State&, const State&) = default;
  friend constexpr auto operator<=>(const State&, const State&) = default;
};

std::string to_string(const State& s);

enum class Action : std::uint8_t {
  kContinue = 0,  ///< keep sending the unfinished update, or idle when d = 0
  kRestart = 1,   ///< start transmitting a fresh update
};

constexpr int to_int(Action a) { return static_cast<int>(a); }
Action action_from_int(int a);

struct ModelParams {
  int k = 1;
  double p = 1.0;
  int delta_max = 2;

  /// Throws ValidityError unless k >= 1, 0 < p <= 1 and delta_max >= 2k.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// max(2k, ceil(30 k / p)): about thirty mean service times.
int default_delta_max(int k, double p);

/// Builds params with the default truncation boundary when delta_max <= 0.
ModelParams make_params(int k, double p, int delta_max = 0);

/// Next-state distribution with at most two entries. When two entries are
/// present the first is the symbol-success branch and the second the erasure
/// branch; identical successors are merged.
class TransitionDist {
 public:
  struct Entry {
    State state;
    double prob = 0.0;
  };

  void add(const State& s, double prob);

  std::size_t size() const { return size_; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  const Entry* begin() const { return entries_.data(); }
  const Entry* end() const { return entries_.data() + size_; }

 private:
  std::array<Entry, 2> entries_{};
  std::size_t size_ = 0;
};

enum class SymbolOutcome : std::uint8_t { kSuccess, kErasure, kIdle };

const char* to_string(SymbolOutcome o);

bool is_valid(const State& s, const ModelParams& m);

/// Validity ignoring the truncation boundary (delta may be arbitrarily large).
bool is_valid_untruncated(const State& s, int k);

inline double cost(const State& s) { return static_cast<double>(s.delta); }

/// True when the action transmits a symbol in this slot.
inline bool transmits(const State& s, Action a) {
  return a == Action::kRestart || s.d >= 1;
}

/// Untruncated successor of s under action a given the slot outcome.
/// `success` is ignored for idle slots (d = 0, a = continue).
inline State raw_successor(const State& s, Action a, bool success, int k) {
  if (a == Action::kRestart) {
    if (!success) return {s.delta + 1, 1, 0};
    if (k == 1) return {1, 0, 0};
    return {s.delta + 1, 1, 1};
  }
  if (s.d == 0) return {s.delta + 1, 0, 0};
  if (s.l == k - 1) {
    if (success) return {s.d + 1, 0, 0};
    return {s.delta + 1, s.d + 1, s.l};
  }
  return {s.delta + 1, s.d + 1, success ? s.l + 1 : s.l};
}

/// Maps an out-of-range successor onto the capped boundary state.
inline State cap_state(State s, const ModelParams& m) {
  if (s.delta > m.delta_max) s.delta = m.delta_max;
  if (s.d > s.delta - m.k) s.d = s.delta - m.k;
  return s;
}

/// Exact capped next-state distribution. Throws ValidityError on an invalid s.
TransitionDist transition(const State& s, Action a, const ModelParams& m);

/// |S_m|, from the closed-form slice sizes.
std::size_t count_states(const ModelParams& m);

/// Every valid truncated state, ascending by (delta, d, l).
std::vector<State> enumerate_states(const ModelParams& m);

/// Dense indexing of S_m in (delta, d, l) lexicographic order.
class StateSpace {
 public:
  explicit StateSpace(const ModelParams& m);

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return size_; }

  /// Index of a valid state; behavior is undefined for invalid states.
  std::size_t index(const State& s) const {
    return slice_offset_[static_cast<std::size_t>(s.delta - params_.k)] +
           d_offset(s.d) + static_cast<std::size_t>(s.l);
  }

  /// Index with validity checking.
  std::size_t checked_index(const State& s) const;

  State state_at(std::size_t i) const;

  /// Number of states in the slice with the given delta.
  std::size_t slice_size(int delta) const { return d_offset(delta - params_.k + 1); }
  std::size_t slice_begin(int delta) const {
    return slice_offset_[static_cast<std::size_t>(delta - params_.k)];
  }

  /// Largest valid l for in-flight age d.
  int max_l(int d) const { return d < params_.k - 1 ? d : params_.k - 1; }

  /// Calls f(state, index) for every state in order.
  template <typename F>
  void for_each(F&& f) const {
    std::size_t i = 0;
    const int k = params_.k;
    for (int delta = k; delta <= params_.delta_max; ++delta)
      for (int d = 0; d <= delta - k; ++d)
        for (int l = 0, lmax = max_l(d); l <= lmax; ++l) f(State{delta, d, l}, i++);
  }

 private:
  // Number of states with in-flight age below d, within one delta slice.
  std::size_t d_offset(int d) const {
    const auto k = static_cast<std::size_t>(params_.k);
    const auto dd = static_cast<std::size_t>(d);
    if (dd <= k) return dd * (dd + 1) / 2;
    return k * (k + 1) / 2 + (dd - k) * k;
  }

  ModelParams params_;
  std::vector<std::size_t> slice_offset_;
  std::size_t size_ = 0;
};

}  // namespace aoisched
