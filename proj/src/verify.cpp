#include "aoisched/verify.hpp"

#include <algorithm>
#include <cmath>

namespace aoisched {

namespace {

class Recorder {
 public:
  Recorder(std::string id, const VerifyOptions& opts) : opts_(opts) {
    report_.property_id = std::move(id);
    report_.epsilon = opts.epsilon;
  }

  // Checks lhs <= rhs + epsilon.
  void at_most(const State& a, double lhs, const State& b, double rhs) {
    ++report_.pairs_checked;
    if (lhs > rhs + opts_.epsilon) record(Violation{a, b, lhs, rhs, lhs - rhs});
  }

  void visit() { ++report_.pairs_checked; }

  void record(Violation v) {
    ++report_.violation_count;
    if (report_.violations.size() < opts_.max_recorded) report_.violations.push_back(std::move(v));
  }

  ViolationReport take(bool informational = false) {
    report_.informational = informational;
    return std::move(report_);
  }

 private:
  const VerifyOptions& opts_;
  ViolationReport report_;
};

double as_value(Action a) { return static_cast<double>(to_int(a)); }

}  // namespace

int canonical_threshold(int tau, int d, int k) { return std::min(tau, std::min(d, k - 1) + 1); }

bool all_passed(const std::vector<ViolationReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const ViolationReport& r) { return r.informational || r.passed(); });
}

std::vector<ViolationReport> check_value_structure(const ValueTable& v, const VerifyOptions& opts) {
  const StateSpace& space = v.space();
  const ModelParams& m = space.params();
  const int k = m.k;
  const int inner = m.delta_max - opts.effective_margin(m);

  Recorder lemma1("lemma1", opts), lemma2("lemma2", opts), lemma3("lemma3", opts),
      lemma4("lemma4", opts), lemma5("lemma5", opts), corollary2("corollary2", opts);

  space.for_each([&](const State& s, std::size_t i) {
    const double value = v[i];
    const State up{s.delta + 1, s.d, s.l};
    if (up.delta <= inner && is_valid(up, m)) lemma1.at_most(s, value, up, v[space.index(up)]);

    const State older{s.delta, s.d + 1, s.l};
    if (s.delta <= inner && is_valid(older, m)) lemma2.at_most(s, value, older, v[space.index(older)]);

    if (s.d >= 1) {
      const State fresh{s.delta, 0, 0};
      const double fresh_value = v[space.index(fresh)];
      lemma3.at_most(s, value, fresh, fresh_value);
      if (s.l == 0) {
        corollary2.visit();
        const double gap = std::abs(value - fresh_value);
        if (gap > opts.epsilon) corollary2.record(Violation{s, fresh, value, fresh_value, gap});
      }
    }

    if (s.l == k - 1 && s.d >= k) {
      const State decoded{s.d, 0, 0};
      lemma4.at_most(decoded, v[space.index(decoded)], s, value);
    }

    const State more{s.delta, s.d, s.l + 1};
    if (is_valid(more, m)) lemma5.at_most(more, v[space.index(more)], s, value);
  });

  std::vector<ViolationReport> out;
  out.push_back(lemma1.take());
  out.push_back(lemma2.take());
  out.push_back(lemma3.take());
  out.push_back(lemma4.take());
  out.push_back(lemma5.take());
  out.push_back(corollary2.take());
  return out;
}

std::vector<ViolationReport> check_policy_structure(const Policy& pi, const VerifyOptions& opts) {
  const StateSpace& space = pi.space();
  const ModelParams& m = space.params();
  const int k = m.k;
  const int inner = m.delta_max - opts.effective_margin(m);

  Recorder corollary1("corollary1", opts), theorem1("theorem1", opts), theorem2("theorem2", opts),
      theorem3("theorem3", opts), theorem4("theorem4", opts), diag("theorem3_diag", opts);

  // Implication a(s) == from  =>  a(t) == from.
  auto implies = [&](Recorder& rec, const State& s, Action a, const State& t, Action from) {
    rec.visit();
    const Action b = pi[space.index(t)];
    if (a == from && b != from) rec.record(Violation{s, t, as_value(a), as_value(b), 1.0});
  };

  space.for_each([&](const State& s, std::size_t i) {
    const Action a = pi[i];
    if (s.d == 0) {
      corollary1.visit();
      if (a != Action::kRestart) corollary1.record(Violation{s, std::nullopt, as_value(a), 1.0, 1.0});
      return;
    }
    const State older{s.delta, s.d + 1, s.l};
    if (is_valid(older, m)) implies(theorem1, s, a, older, Action::kRestart);

    const State more{s.delta, s.d, s.l + 1};
    if (is_valid(more, m)) implies(theorem2, s, a, more, Action::kContinue);

    if (s.delta + 1 <= inner) {
      if (s.l + 1 <= k - 1) {
        implies(theorem3, s, a, State{s.delta + 1, s.d + 1, s.l + 1}, Action::kContinue);
      } else {
        implies(diag, s, a, State{s.delta + 1, s.d + 1, s.l}, Action::kContinue);
      }
    }
  });

  // Canonical thresholds along each diagonal (delta0 + d, d) must not decrease.
  for (int delta0 = k; delta0 < m.delta_max; ++delta0) {
    int previous = -1;
    for (int d = 1; delta0 + d <= std::min(inner, m.delta_max); ++d) {
      const std::size_t base = space.index(State{delta0 + d, d, 0});
      const int lmax = space.max_l(d);
      int tau = lmax + 1;
      for (int l = 0; l <= lmax; ++l) {
        if (pi[base + static_cast<std::size_t>(l)] == Action::kContinue) {
          tau = l;
          break;
        }
      }
      if (d > 1) {
        theorem4.visit();
        if (tau < previous)
          theorem4.record(Violation{State{delta0 + d - 1, d - 1, 0}, State{delta0 + d, d, 0},
                                    static_cast<double>(previous), static_cast<double>(tau),
                                    static_cast<double>(previous - tau)});
      }
      previous = tau;
    }
  }

  std::vector<ViolationReport> out;
  out.push_back(corollary1.take());
  out.push_back(theorem1.take());
  out.push_back(theorem2.take());
  out.push_back(theorem3.take());
  out.push_back(theorem4.take());
  out.push_back(diag.take(true));
  return out;
}

}  // namespace aoisched
