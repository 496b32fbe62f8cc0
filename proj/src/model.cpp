#include "aoisched/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace aoisched {

std::string to_string(const State& s) { return fmt::format("({},{},{})", s.delta, s.d, s.l); }

Action action_from_int(int a) {
  if (a != 0 && a != 1) throw ValidityError(fmt::format("action must be 0 or 1, got {}", a));
  return static_cast<Action>(a);
}

const char* to_string(SymbolOutcome o) {
  switch (o) {
    case SymbolOutcome::kSuccess: return "success";
    case SymbolOutcome::kErasure: return "erasure";
    case SymbolOutcome::kIdle: return "idle";
  }
  return "?";
}

void ModelParams::validate() const {
  if (k < 1) throw ValidityError(fmt::format("k must be >= 1, got {}", k));
  if (!(p > 0.0 && p <= 1.0)) throw ValidityError(fmt::format("p must lie in (0,1], got {}", p));
  if (delta_max < 2 * k)
    throw ValidityError(fmt::format("delta_max must be >= 2k = {}, got {}", 2 * k, delta_max));
}

int default_delta_max(int k, double p) {
  const auto scaled = static_cast<int>(std::ceil(30.0 * k / p - 1e-9));
  return std::max(2 * k, scaled);
}

ModelParams make_params(int k, double p, int delta_max) {
  ModelParams m{k, p, delta_max > 0 ? delta_max : default_delta_max(k, p)};
  m.validate();
  return m;
}

void TransitionDist::add(const State& s, double prob) {
  if (prob <= 0.0) return;
  for (std::size_t i = 0; i < size_; ++i) {
    if (entries_[i].state == s) {
      entries_[i].prob += prob;
      return;
    }
  }
  if (size_ == entries_.size()) throw Error("transition distribution overflow");
  entries_[size_++] = Entry{s, prob};
}

bool is_valid_untruncated(const State& s, int k) {
  if (s.delta < 1 || s.d < 0 || s.l < 0) return false;
  if (s.delta < s.d + k) return false;
  if (s.l > std::min(s.d, k - 1)) return false;
  return true;
}

bool is_valid(const State& s, const ModelParams& m) {
  return is_valid_untruncated(s, m.k) && s.delta <= m.delta_max;
}

TransitionDist transition(const State& s, Action a, const ModelParams& m) {
  if (!is_valid(s, m))
    throw ValidityError(fmt::format("transition from invalid state {}", to_string(s)));
  TransitionDist out;
  if (!transmits(s, a)) {
    out.add(cap_state(raw_successor(s, a, false, m.k), m), 1.0);
    return out;
  }
  out.add(cap_state(raw_successor(s, a, true, m.k), m), m.p);
  out.add(cap_state(raw_successor(s, a, false, m.k), m), 1.0 - m.p);
  return out;
}

std::size_t count_states(const ModelParams& m) { return StateSpace(m).size(); }

std::vector<State> enumerate_states(const ModelParams& m) {
  StateSpace space(m);
  std::vector<State> out;
  out.reserve(space.size());
  space.for_each([&](const State& s, std::size_t) { out.push_back(s); });
  return out;
}

StateSpace::StateSpace(const ModelParams& m) : params_(m) {
  m.validate();
  slice_offset_.resize(static_cast<std::size_t>(m.delta_max - m.k + 2));
  std::size_t total = 0;
  for (int delta = m.k; delta <= m.delta_max + 1; ++delta) {
    slice_offset_[static_cast<std::size_t>(delta - m.k)] = total;
    total += slice_size(delta);
  }
  size_ = slice_offset_.back();
}

std::size_t StateSpace::checked_index(const State& s) const {
  if (!is_valid(s, params_))
    throw ValidityError(fmt::format("state {} is not in the truncated state space", to_string(s)));
  return index(s);
}

State StateSpace::state_at(std::size_t i) const {
  if (i >= size_) throw Error(fmt::format("state index {} out of range", i));
  auto it = std::upper_bound(slice_offset_.begin(), slice_offset_.end(), i);
  const auto slice = static_cast<std::size_t>(it - slice_offset_.begin()) - 1;
  const int delta = params_.k + static_cast<int>(slice);
  std::size_t rem = i - slice_offset_[slice];
  int d = 0;
  while (d_offset(d + 1) <= rem) ++d;
  return State{delta, d, static_cast<int>(rem - d_offset(d))};
}

}  // namespace aoisched
