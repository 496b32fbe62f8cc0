#pragma once

// Test-only reference computations. Nothing here calls into the solver, the
// state indexer or the simulator under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "aoisched/model.hpp"

namespace oracle {

using aoisched::State;

/// Every (delta, d, l) in a generous box filtered by the raw invariants.
inline std::vector<State> brute_force_states(int k, int delta_max) {
  std::vector<State> out;
  for (int delta = 1; delta <= delta_max; ++delta)
    for (int d = 0; d <= delta_max; ++d)
      for (int l = 0; l <= delta_max; ++l) {
        if (delta < d + k) continue;
        if (l > d || l > k - 1) continue;
        if (d == 0 && l != 0) continue;
        out.push_back({delta, d, l});
      }
  std::sort(out.begin(), out.end());
  return out;
}

/// Sum over delta in [k, delta_max], d in [0, delta - k] of min(d, k-1) + 1.
inline std::size_t counting_formula(int k, int delta_max) {
  std::size_t n = 0;
  for (int delta = k; delta <= delta_max; ++delta)
    for (int d = 0; d <= delta - k; ++d) n += static_cast<std::size_t>(std::min(d, k - 1) + 1);
  return n;
}

/// Slot-level AoI simulation from generation timestamps. A decision callback
/// sees (aoi, age of in-flight update or 0, delivered symbols) at the start of
/// each slot and returns true to start a fresh update. The AoI at the start
/// of slot t is t minus the generation slot of the newest decoded update.
struct TimestampSim {
  int k;
  double p;
  std::uint64_t seed;

  double mean_aoi(std::int64_t slots, std::int64_t burn_in,
                  const std::function<bool(std::int64_t, std::int64_t, int)>& restart) const {
    std::mt19937 gen(static_cast<std::uint32_t>(seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Start as if an update generated k slots ago was just decoded.
    std::int64_t newest_decoded_gen = -k;
    bool in_flight = false;
    std::int64_t flight_gen = 0;
    int received = 0;
    long double sum = 0;
    for (std::int64_t t = 0; t < slots; ++t) {
      const std::int64_t aoi = t - newest_decoded_gen;
      const std::int64_t age = in_flight ? t - flight_gen : 0;
      if (t >= burn_in) sum += static_cast<long double>(aoi);
      if (restart(aoi, age, received)) {
        in_flight = true;
        flight_gen = t;
        received = 0;
      }
      if (!in_flight) continue;
      if (unif(gen) < p) ++received;
      if (received == k) {
        newest_decoded_gen = flight_gen;
        in_flight = false;
        received = 0;
      }
    }
    return static_cast<double>(sum / static_cast<long double>(slots - burn_in));
  }
};

/// Persistent policy as a renewal-reward process: service times S_i are the
/// slots needed for k Bernoulli(p) successes. During cycle i the AoI runs
/// S_{i-1}, S_{i-1}+1, ..., S_{i-1}+S_i-1. Returns total AoI over total slots.
inline double renewal_reward_persistent(int k, double p, std::int64_t cycles, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution coin(p);
  auto service = [&] {
    std::int64_t slots = 0;
    for (int got = 0; got < k; ++slots)
      if (coin(gen)) ++got;
    return slots;
  };
  std::int64_t previous = service();
  long double reward = 0, length = 0;
  for (std::int64_t i = 0; i < cycles; ++i) {
    const std::int64_t s = service();
    reward += static_cast<long double>(s) * previous + static_cast<long double>(s) * (s - 1) / 2;
    length += s;
    previous = s;
  }
  return static_cast<double>(reward / length);
}

/// Stationary distribution of a small dense chain by Gaussian elimination on
/// pi (P - I) = 0 with sum(pi) = 1; rows of `P` are source states.
inline std::vector<double> dense_stationary(const std::vector<std::vector<double>>& P) {
  const std::size_t n = P.size();
  // A x = b with A = (P - I)^T and the last equation replaced by normalization.
  std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) A[j][i] = P[i][j] - (i == j ? 1.0 : 0.0);
  for (std::size_t j = 0; j < n; ++j) A[n - 1][j] = 1.0;
  A[n - 1][n] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || A[r][c] == 0.0) continue;
      const double f = A[r][c] / A[c][c];
      for (std::size_t j = c; j <= n; ++j) A[r][j] -= f * A[c][j];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = A[i][n] / A[i][i];
  return x;
}

}  // namespace oracle
