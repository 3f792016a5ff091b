// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/detail/numeric.hpp"
#include "reliakit/error.hpp"
#include "reliakit/evaluator.hpp"
#include "reliakit/metrics.hpp"
#include "reliakit/qa_data.hpp"

namespace reliakit {

/// A confidence-scored answer and whether it was right.
struct ScoredOutcome {
  std::string question_id;
  double confidence = 0.0;
  VerdictKind verdict_if_answered = VerdictKind::Wrong;  // Correct or Wrong

  bool correct() const { return verdict_if_answered == VerdictKind::Correct; }
};

inline void validate(const ScoredOutcome& o) {
  if (!(o.confidence >= 0.0 && o.confidence <= 1.0)) {
    throw ArgumentError("confidence for '" + o.question_id +
                        "' must lie in [0, 1]");
  }
  if (o.verdict_if_answered == VerdictKind::Refusal) {
    throw ArgumentError("scored outcome '" + o.question_id +
                        "' must be correct or wrong");
  }
}

inline ojson to_json(const ScoredOutcome& o) {
  ojson j;
  j["id"] = o.question_id;
  j["confidence"] = o.confidence;
  j["verdict"] = std::string(to_string(o.verdict_if_answered));
  return j;
}

inline ScoredOutcome scored_outcome_from_json(const ojson& j) {
  ScoredOutcome o;
  o.question_id = j.at("id").get<std::string>();
  o.confidence = j.at("confidence").get<double>();
  o.verdict_if_answered = verdict_from_string(j.at("verdict").get<std::string>());
  validate(o);
  return o;
}

inline std::vector<ScoredOutcome> read_scored_outcomes(const std::string& path) {
  return detail::read_lines<ScoredOutcome>(path, scored_outcome_from_json).records;
}

inline void write_scored_outcomes(const std::vector<ScoredOutcome>& outcomes,
                                  const std::string& path,
                                  const std::optional<ojson>& meta = std::nullopt) {
  detail::write_lines(outcomes, path, meta);
}

/// Answers below `tau` (strictly) become refusals.
inline Tally apply_threshold(const std::vector<ScoredOutcome>& outcomes,
                             double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1]");
  }
  Tally t;
  for (const auto& o : outcomes) {
    if (o.confidence < tau) {
      t.add(VerdictKind::Refusal);
    } else {
      t.add(o.verdict_if_answered);
    }
  }
  return t;
}

struct SweepPoint {
  double tau = 0.0;
  Tally tally;
  MetricReport metrics;
};

struct ThresholdSweep {
  std::vector<SweepPoint> rows;
  double best_tau = 0.0;  // argmax rel, ties to the smaller threshold
};

inline ThresholdSweep threshold_sweep(const std::vector<ScoredOutcome>& outcomes,
                                      const std::vector<double>& tau_grid) {
  if (tau_grid.empty()) throw ArgumentError("threshold grid is empty");
  ThresholdSweep sweep;
  std::optional<std::size_t> best;
  for (double tau : tau_grid) {
    SweepPoint p{tau, apply_threshold(outcomes, tau), {}};
    p.metrics = reliability(p.tally);
    sweep.rows.push_back(p);
    const std::size_t i = sweep.rows.size() - 1;
    if (!best || p.metrics.rel > sweep.rows[*best].metrics.rel ||
        (p.metrics.rel == sweep.rows[*best].metrics.rel &&
         tau < sweep.rows[*best].tau)) {
      best = i;
    }
  }
  sweep.best_tau = sweep.rows[*best].tau;
  return sweep;
}

/// Evenly spaced grid from `lo` to `hi` inclusive. Values are rounded to
/// 12 decimals so that e.g. 0.1 * 3 lands on 0.3.
inline std::vector<double> tau_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ArgumentError("grid step must be positive");
  if (!(lo <= hi)) throw ArgumentError("grid start exceeds end");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) {
    out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

/// 0.0 to 1.0 in steps of 0.1; includes the 0.4 and 0.8 operating points.
inline std::vector<double> default_tau_grid() { return tau_grid(0.0, 1.0, 0.1); }

/// Mann-Whitney AUC: P(conf of a correct > conf of a wrong), ties count 1/2.
/// Undefined unless both classes are present.
inline std::optional<double> roc_auc(const std::vector<ScoredOutcome>& outcomes) {
  std::vector<std::pair<double, bool>> v;
  v.reserve(outcomes.size());
  std::size_t n_pos = 0;
  for (const auto& o : outcomes) {
    v.emplace_back(o.confidence, o.correct());
    n_pos += o.correct() ? 1 : 0;
  }
  const std::size_t n_neg = v.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].first == v[i].first) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (v[k].second) rank_sum += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC polyline, one point per distinct confidence (predict correct when
/// confidence >= threshold), starting at (0, 0).
inline std::vector<RocPoint> roc_curve(const std::vector<ScoredOutcome>& outcomes) {
  std::vector<ScoredOutcome> v = outcomes;
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    return a.confidence > b.confidence;
  });
  std::size_t n_pos = 0;
  for (const auto& o : v) n_pos += o.correct() ? 1 : 0;
  const std::size_t n_neg = v.size() - n_pos;
  std::vector<RocPoint> out{{1.0 + 1e-12, 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j].confidence == v[i].confidence) {
      (v[j].correct() ? tp : fp) += 1;
      ++j;
    }
    out.push_back({v[i].confidence,
                   n_neg ? static_cast<double>(fp) / n_neg : 0.0,
                   n_pos ? static_cast<double>(tp) / n_pos : 0.0});
    i = j;
  }
  out.front().threshold = 1.0;
  return out;
}

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

struct CalibrationCurve {
  std::vector<CalibrationBin> bins;  // non-empty bins only
  double ece = 0.0;
};

/// Equal-width bins on [0, 1]; bin i covers (i/B, (i+1)/B], bin 0 also
/// includes 0.
inline CalibrationCurve calibration_curve(const std::vector<ScoredOutcome>& outcomes,
                                          std::size_t n_bins = 10) {
  if (n_bins == 0) throw ArgumentError("need at least one bin");
  std::vector<detail::CompensatedSum> conf(n_bins), hits(n_bins);
  std::vector<std::size_t> count(n_bins, 0);
  for (const auto& o : outcomes) {
    validate(o);
    std::size_t b = 0;
    if (o.confidence > 0.0) {
      b = static_cast<std::size_t>(std::ceil(o.confidence * n_bins)) - 1;
      // confidence * B can round across an edge; settle against the edges.
      if (b > 0 && o.confidence <= static_cast<double>(b) / n_bins) --b;
      if (b + 1 < n_bins && o.confidence > static_cast<double>(b + 1) / n_bins) ++b;
      b = std::min(b, n_bins - 1);
    }
    conf[b].add(o.confidence);
    hits[b].add(o.correct() ? 1.0 : 0.0);
    ++count[b];
  }
  CalibrationCurve curve;
  const double n = static_cast<double>(outcomes.size());
  detail::CompensatedSum ece;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    CalibrationBin bin;
    bin.lower = static_cast<double>(b) / n_bins;
    bin.upper = static_cast<double>(b + 1) / n_bins;
    bin.count = count[b];
    bin.mean_confidence = conf[b].value() / count[b];
    bin.accuracy = hits[b].value() / count[b];
    ece.add(count[b] / n * std::fabs(bin.accuracy - bin.mean_confidence));
    curve.bins.push_back(bin);
  }
  curve.ece = ece.value();
  return curve;
}

/// Reads a verbalized confidence such as "Confidence: 85%" or
/// "confidence: 0.85". Returns a value in [0, 1].
inline std::optional<double> parse_verbal_confidence(std::string_view text) {
  static const std::regex kPattern(
      R"(confidence\s*[:=]?\s*([0-9]+(?:\.[0-9]+)?)\s*(%?))", std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  std::optional<double> last;
  auto begin = text.begin();
  while (std::regex_search(begin, text.end(), m, kPattern)) {
    double v = std::stod(m[1].str());
    if (m[2].matched && m[2].length() > 0) {
      v /= 100.0;
    } else if (v > 1.0) {
      v /= 100.0;
    }
    if (v >= 0.0 && v <= 1.0) last = v;
    begin = m[0].second;
  }
  return last;
}

}  // namespace reliakit
