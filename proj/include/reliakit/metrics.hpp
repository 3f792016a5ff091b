// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "reliakit/detail/numeric.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/gateway.hpp"

namespace reliakit {

/// Outcome counts. Integral for observed data; floating point for the
/// expected tallies induced by a stochastic policy.
template <typename T>
struct BasicTally {
  static_assert(std::is_arithmetic_v<T>);
  T n_correct{};
  T n_refusal{};
  T n_wrong{};

  T total() const { return n_correct + n_refusal + n_wrong; }

  void add(VerdictKind k, T weight = T{1}) {
    switch (k) {
      case VerdictKind::Correct:
        n_correct += weight;
        break;
      case VerdictKind::Refusal:
        n_refusal += weight;
        break;
      case VerdictKind::Wrong:
        n_wrong += weight;
        break;
    }
  }

  BasicTally& operator+=(const BasicTally& o) {
    n_correct += o.n_correct;
    n_refusal += o.n_refusal;
    n_wrong += o.n_wrong;
    return *this;
  }

  bool operator==(const BasicTally&) const = default;
};

using Tally = BasicTally<std::uint64_t>;
using ExpectedTally = BasicTally<double>;

struct MetricReport {
  double acc = 0.0;
  double truth = 0.0;
  double abstain = 0.0;
  double ans = 0.0;
  double rel = 0.0;
};

/// Rel = ans * Truth + (1 - ans) * Acc from rates given as fractions.
inline MetricReport reliability_from_rates(double acc, double truth,
                                           double abstain) {
  MetricReport m;
  m.acc = acc;
  m.truth = truth;
  m.abstain = abstain;
  m.ans = 1.0 - abstain;
  m.rel = m.ans * truth + (1.0 - m.ans) * acc;
  return m;
}

template <typename T>
MetricReport reliability(const BasicTally<T>& t) {
  if (t.n_correct < T{} || t.n_refusal < T{} || t.n_wrong < T{}) {
    throw ArgumentError("tally counts must be non-negative");
  }
  const double n = static_cast<double>(t.total());
  if (!(n > 0.0)) throw ArgumentError("tally is empty");
  const double nc = static_cast<double>(t.n_correct);
  const double nr = static_cast<double>(t.n_refusal);
  return reliability_from_rates(nc / n, (nc + nr) / n, nr / n);
}

inline nlohmann::ordered_json to_json(const MetricReport& m) {
  return {{"acc", m.acc},     {"truth", m.truth}, {"abstain", m.abstain},
          {"ans", m.ans},     {"rel", m.rel}};
}

// ---------------------------------------------------------------- pass@k

struct SampleOutcome {
  std::size_t n = 0;  // samples drawn
  std::size_t c = 0;  // successes among them
};

/// 1 - C(n-c, k) / C(n, k) for one question, as a running product so that
/// no binomial coefficient is ever formed.
inline double pass_at_k(SampleOutcome o, std::size_t k) {
  if (k == 0) throw ArgumentError("k must be positive");
  if (o.c > o.n) throw ArgumentError("successes exceed samples");
  if (k > o.n) {
    throw ArgumentError("k=" + std::to_string(k) + " exceeds n=" +
                        std::to_string(o.n));
  }
  if (o.n - o.c < k) return 1.0;
  double miss = 1.0;
  for (std::size_t i = o.n - o.c + 1; i <= o.n; ++i) {
    miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  }
  return 1.0 - miss;
}

inline double pass_at_k(const std::vector<SampleOutcome>& outcomes,
                        std::size_t k) {
  if (outcomes.empty()) throw ArgumentError("no questions for pass@k");
  detail::CompensatedSum sum;
  for (const auto& o : outcomes) sum.add(pass_at_k(o, k));
  return sum.value() / static_cast<double>(outcomes.size());
}

using SuccessPredicate = std::function<bool(VerdictKind)>;

inline bool success_correct(VerdictKind k) { return k == VerdictKind::Correct; }
inline bool success_truthful(VerdictKind k) { return k != VerdictKind::Wrong; }

inline std::vector<SampleOutcome> to_outcomes(
    const std::vector<std::vector<VerdictKind>>& runs,
    const SuccessPredicate& success) {
  std::vector<SampleOutcome> out;
  out.reserve(runs.size());
  for (const auto& r : runs) {
    SampleOutcome o{r.size(), 0};
    for (auto k : r) o.c += success(k) ? 1 : 0;
    out.push_back(o);
  }
  return out;
}

// ------------------------------------------------------------ inconsistency

enum class InconsistencyMode { CorrectWrong, AnswerAbstain };

inline std::string_view to_string(InconsistencyMode m) {
  return m == InconsistencyMode::CorrectWrong ? "correct_wrong"
                                              : "answer_abstain";
}

inline double inconsistency_rate(
    const std::vector<std::vector<VerdictKind>>& runs, InconsistencyMode mode) {
  if (runs.empty()) throw ArgumentError("no questions for inconsistency");
  const std::size_t k = runs.front().size();
  if (k < 2) throw ArgumentError("inconsistency needs at least two runs");
  std::size_t flagged = 0;
  for (const auto& r : runs) {
    if (r.size() != k) {
      throw ArgumentError("every question needs the same number of runs");
    }
    bool a = false;
    bool b = false;
    for (auto v : r) {
      if (mode == InconsistencyMode::CorrectWrong) {
        a |= v == VerdictKind::Correct;
        b |= v == VerdictKind::Wrong;
      } else {
        a |= v == VerdictKind::Refusal;
        b |= v != VerdictKind::Refusal;
      }
    }
    flagged += (a && b) ? 1 : 0;
  }
  return static_cast<double>(flagged) / static_cast<double>(runs.size());
}

// ------------------------------------------------------------------ length

struct LengthStats {
  std::optional<double> mean_correct;
  std::optional<double> mean_wrong;
  std::optional<double> wc_ratio;  // undefined without both classes
  std::optional<double> mean_all;
  std::size_t n_correct = 0;
  std::size_t n_wrong = 0;
};

struct LengthSample {
  std::size_t tokens = 0;
  VerdictKind kind = VerdictKind::Wrong;
};

inline LengthStats length_stats(const std::vector<LengthSample>& samples) {
  detail::CompensatedSum correct, wrong, all;
  LengthStats s;
  for (const auto& x : samples) {
    const auto t = static_cast<double>(x.tokens);
    all.add(t);
    if (x.kind == VerdictKind::Correct) {
      correct.add(t);
      ++s.n_correct;
    } else if (x.kind == VerdictKind::Wrong) {
      wrong.add(t);
      ++s.n_wrong;
    }
  }
  if (!samples.empty()) s.mean_all = all.value() / samples.size();
  if (s.n_correct) s.mean_correct = correct.value() / s.n_correct;
  if (s.n_wrong) s.mean_wrong = wrong.value() / s.n_wrong;
  if (s.mean_correct && s.mean_wrong && *s.mean_correct > 0.0) {
    s.wc_ratio = *s.mean_wrong / *s.mean_correct;
  }
  return s;
}

inline LengthStats length_stats(const std::vector<ModelResponse>& responses,
                                const std::vector<Verdict>& verdicts) {
  if (responses.size() != verdicts.size()) {
    throw ArgumentError("responses and verdicts differ in length");
  }
  std::vector<LengthSample> samples;
  samples.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    samples.push_back({responses[i].reasoning_token_count, verdicts[i].kind});
  }
  return length_stats(samples);
}

inline nlohmann::ordered_json to_json(const LengthStats& s) {
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  return {{"mean_correct", opt(s.mean_correct)},
          {"mean_wrong", opt(s.mean_wrong)},
          {"wc_ratio", opt(s.wc_ratio)},
          {"mean_all", opt(s.mean_all)},
          {"n_correct", s.n_correct},
          {"n_wrong", s.n_wrong}};
}

// ------------------------------------------------------------------ report

struct ReportRow {
  std::string source;
  Tally tally;
  MetricReport metrics;
};

/// Per-source rows plus an "average" row holding the unweighted mean of the
/// per-source metrics, the way averaged benchmark columns are reported.
struct EvalReport {
  std::vector<ReportRow> rows;
  MetricReport average;
};

inline EvalReport build_report(const std::map<std::string, Tally>& by_source) {
  if (by_source.empty()) throw ArgumentError("no sources to report");
  EvalReport r;
  detail::CompensatedSum acc, truth, abstain;
  for (const auto& [source, tally] : by_source) {
    ReportRow row{source, tally, reliability(tally)};
    acc.add(row.metrics.acc);
    truth.add(row.metrics.truth);
    abstain.add(row.metrics.abstain);
    r.rows.push_back(std::move(row));
  }
  const double n = static_cast<double>(r.rows.size());
  r.average = reliability_from_rates(acc.value() / n, truth.value() / n,
                                     abstain.value() / n);
  return r;
}

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  auto emit = [](const std::string& name, const MetricReport& m) {
    nlohmann::ordered_json j;
    j["source"] = name;
    j["fraction"] = to_json(m);
    j["percent"] = {{"acc", 100 * m.acc},
                    {"truth", 100 * m.truth},
                    {"abstain", 100 * m.abstain},
                    {"rel", 100 * m.rel}};
    return j;
  };
  for (const auto& row : r.rows) {
    auto j = emit(row.source, row.metrics);
    j["counts"] = {{"correct", row.tally.n_correct},
                   {"refusal", row.tally.n_refusal},
                   {"wrong", row.tally.n_wrong}};
    rows.push_back(std::move(j));
  }
  rows.push_back(emit("average", r.average));
  return rows;
}

inline std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

/// CSV with percentage-scaled columns, one line per source then "average".
inline std::string to_csv(const EvalReport& r) {
  std::string out = "source,acc,truth,abstain,rel\n";
  auto line = [&](const std::string& name, const MetricReport& m) {
    out += name + "," + fixed(100 * m.acc, 2) + "," + fixed(100 * m.truth, 2) +
           "," + fixed(100 * m.abstain, 2) + "," + fixed(100 * m.rel, 2) + "\n";
  };
  for (const auto& row : r.rows) line(row.source, row.metrics);
  line("average", r.average);
  return out;
}

}  // namespace reliakit
