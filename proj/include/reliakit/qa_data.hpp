// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reliakit/detail/random.hpp"
#include "reliakit/error.hpp"
#include "reliakit/text.hpp"

namespace reliakit {

using ojson = nlohmann::ordered_json;

enum class Knowledge { Known, Unknown };

inline std::string_view to_string(Knowledge k) {
  return k == Knowledge::Known ? "known" : "unknown";
}

/// Outcome of sampling-based knowledge labeling for one question.
struct KnowledgeLabel {
  Knowledge value = Knowledge::Unknown;
  std::size_t n_samples = 0;
  std::size_t n_matches = 0;
  std::string sampler_config_digest;

  /// Known iff at least one sample matched.
  static KnowledgeLabel from_counts(std::size_t n_samples,
                                    std::size_t n_matches,
                                    std::string digest) {
    if (n_matches > n_samples) {
      throw ArgumentError("n_matches exceeds n_samples");
    }
    return {n_matches >= 1 ? Knowledge::Known : Knowledge::Unknown, n_samples,
            n_matches, std::move(digest)};
  }

  bool operator==(const KnowledgeLabel&) const = default;
};

struct QAItem {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;  // normalized surface forms
  std::string source;
  std::optional<KnowledgeLabel> label;
  std::vector<std::string> raw_gold_answers;  // optional original spellings

  bool operator==(const QAItem&) const = default;
};

/// Builds an item from original answer spellings: stores normalized golds and
/// keeps the originals in raw_gold_answers.
inline QAItem make_item(std::string id, std::string question,
                        const std::vector<std::string>& answers,
                        std::string source = {}) {
  QAItem item;
  item.id = std::move(id);
  item.question = std::move(question);
  item.source = std::move(source);
  for (const auto& a : answers) {
    item.gold_answers.push_back(normalize(a));
  }
  item.raw_gold_answers = answers;
  return item;
}

/// Checks the QAItem invariants; throws ArgumentError with the reason.
inline void validate(const QAItem& item) {
  if (item.id.empty()) throw ArgumentError("item id is empty");
  if (item.gold_answers.empty()) {
    throw ArgumentError("item '" + item.id + "' has no gold answers");
  }
  for (const auto& g : item.gold_answers) {
    if (normalize(g).empty()) {
      throw ArgumentError("item '" + item.id +
                          "' has a gold answer that is empty after "
                          "normalization");
    }
  }
  if (item.label) {
    const auto& l = *item.label;
    if (l.n_matches > l.n_samples) {
      throw ArgumentError("item '" + item.id + "' label has n_matches > "
                          "n_samples");
    }
    if ((l.value == Knowledge::Known) != (l.n_matches >= 1)) {
      throw ArgumentError("item '" + item.id +
                          "' label value disagrees with n_matches");
    }
  }
}

enum class SftKind { KnownAnswer, UnknownRefusal };

inline std::string_view to_string(SftKind k) {
  return k == SftKind::KnownAnswer ? "known_answer" : "unknown_refusal";
}

/// One supervised fine-tuning example: reasoning trace followed by answer.
struct SftRecord {
  std::string id;
  std::string question;
  std::string trace;
  std::string answer;
  SftKind kind = SftKind::KnownAnswer;

  /// Full training target: delimited trace, then the answer segment.
  std::string output() const {
    return "<think>\n" + trace + "\n</think>\n\n" + answer;
  }

  bool operator==(const SftRecord&) const = default;
};

// ---------------------------------------------------------------------------
// JSON mapping

inline ojson to_json(const KnowledgeLabel& l) {
  ojson j;
  j["value"] = std::string(to_string(l.value));
  j["n_samples"] = l.n_samples;
  j["n_matches"] = l.n_matches;
  j["sampler_config_digest"] = l.sampler_config_digest;
  return j;
}

inline ojson to_json(const QAItem& item) {
  ojson j;
  j["id"] = item.id;
  j["question"] = item.question;
  j["gold_answers"] = item.gold_answers;
  j["source"] = item.source;
  j["label"] = item.label ? to_json(*item.label) : ojson(nullptr);
  if (!item.raw_gold_answers.empty()) {
    j["raw_gold_answers"] = item.raw_gold_answers;
  }
  return j;
}

inline ojson to_json(const SftRecord& r) {
  ojson j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["trace"] = r.trace;
  j["answer"] = r.answer;
  j["kind"] = std::string(to_string(r.kind));
  j["output"] = r.output();
  return j;
}

namespace detail {

inline const ojson& require(const ojson& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ArgumentError(std::string("missing field '") + key + "'");
  }
  return *it;
}

inline std::string require_string(const ojson& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) {
    throw ArgumentError(std::string("field '") + key + "' is not a string");
  }
  return v.get<std::string>();
}

inline std::vector<std::string> string_list(const ojson& v, const char* key) {
  if (!v.is_array()) {
    throw ArgumentError(std::string("field '") + key + "' is not an array");
  }
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) {
      throw ArgumentError(std::string("field '") + key +
                          "' contains a non-string entry");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline std::string dump_line(const ojson& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace detail

inline KnowledgeLabel label_from_json(const ojson& j) {
  KnowledgeLabel l;
  const std::string value = detail::require_string(j, "value");
  if (value == "known") {
    l.value = Knowledge::Known;
  } else if (value == "unknown") {
    l.value = Knowledge::Unknown;
  } else {
    throw ArgumentError("label value must be 'known' or 'unknown'");
  }
  l.n_samples = detail::require(j, "n_samples").get<std::size_t>();
  l.n_matches = detail::require(j, "n_matches").get<std::size_t>();
  l.sampler_config_digest = j.value("sampler_config_digest", std::string{});
  return l;
}

inline QAItem item_from_json(const ojson& j) {
  if (!j.is_object()) throw ArgumentError("record is not an object");
  QAItem item;
  item.id = detail::require_string(j, "id");
  item.question = detail::require_string(j, "question");
  item.gold_answers =
      detail::string_list(detail::require(j, "gold_answers"), "gold_answers");
  item.source = j.value("source", std::string{});
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    item.label = label_from_json(*it);
  }
  if (auto it = j.find("raw_gold_answers"); it != j.end()) {
    item.raw_gold_answers = detail::string_list(*it, "raw_gold_answers");
  }
  validate(item);
  return item;
}

inline SftRecord sft_from_json(const ojson& j) {
  if (!j.is_object()) throw ArgumentError("record is not an object");
  SftRecord r;
  r.id = detail::require_string(j, "id");
  r.question = detail::require_string(j, "question");
  r.trace = detail::require_string(j, "trace");
  r.answer = detail::require_string(j, "answer");
  const std::string kind = detail::require_string(j, "kind");
  if (kind == "known_answer") {
    r.kind = SftKind::KnownAnswer;
  } else if (kind == "unknown_refusal") {
    r.kind = SftKind::UnknownRefusal;
  } else {
    throw ArgumentError("kind must be 'known_answer' or 'unknown_refusal'");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Line-delimited record files
//
// A file may begin with a metadata line {"_meta": {...}} carrying tool
// version, config digest and seed; readers hand it back separately.

template <typename T>
struct RecordFile {
  std::vector<T> records;
  std::vector<std::size_t> line_numbers;  // 1-based, parallel to records
  std::optional<ojson> meta;
};

namespace detail {

template <typename T, typename Parse>
RecordFile<T> read_lines(const std::string& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  RecordFile<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim_ascii(line).empty()) continue;
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": malformed record: " + e.what());
    }
    if (out.records.empty() && !out.meta && j.is_object() && j.size() == 1 &&
        j.contains("_meta")) {
      out.meta = j["_meta"];
      continue;
    }
    try {
      out.records.push_back(parse(j));
      out.line_numbers.push_back(line_no);
    } catch (const ArgumentError& e) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": invalid record: " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": invalid record: " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_lines(const std::vector<T>& records, const std::string& path,
                 const std::optional<ojson>& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (meta) {
    ojson m;
    m["_meta"] = *meta;
    out << dump_line(m) << '\n';
  }
  for (const auto& r : records) out << dump_line(to_json(r)) << '\n';
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

inline RecordFile<QAItem> read_dataset_file(const std::string& path) {
  auto file = detail::read_lines<QAItem>(path, item_from_json);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < file.records.size(); ++i) {
    auto [it, inserted] = seen.emplace(file.records[i].id, i);
    if (!inserted) {
      throw IoError(path + ":" + std::to_string(file.line_numbers[i]) +
                    ": duplicate id '" + file.records[i].id +
                    "' (first seen on line " +
                    std::to_string(file.line_numbers[it->second]) + ")");
    }
  }
  return file;
}

/// Reads a QA dataset in file order. Rejects malformed lines and duplicate
/// ids.
inline std::vector<QAItem> read_dataset(const std::string& path) {
  return read_dataset_file(path).records;
}

inline void write_dataset(const std::vector<QAItem>& items,
                          const std::string& path,
                          const std::optional<ojson>& meta = std::nullopt) {
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!seen.emplace(items[i].id, i).second) {
      throw ArgumentError("duplicate id '" + items[i].id + "'");
    }
  }
  detail::write_lines(items, path, meta);
}

inline std::vector<SftRecord> read_sft(const std::string& path) {
  return detail::read_lines<SftRecord>(path, sft_from_json).records;
}

inline void write_sft(const std::vector<SftRecord>& records,
                      const std::string& path,
                      const std::optional<ojson>& meta = std::nullopt) {
  detail::write_lines(records, path, meta);
}

// ---------------------------------------------------------------------------
// Dataset assembly

/// Positive rational known:unknown ratio.
class Ratio {
 public:
  Ratio(std::uint64_t known, std::uint64_t unknown) {
    if (known == 0 || unknown == 0) {
      throw ArgumentError("ratio terms must be positive");
    }
    const std::uint64_t g = std::gcd(known, unknown);
    num_ = known / g;
    den_ = unknown / g;
  }

  /// Accepts "3:1", "3", or a decimal such as "2.5".
  static Ratio parse(std::string_view text) {
    auto parse_term = [&](std::string_view s) -> std::pair<std::uint64_t,
                                                           std::uint64_t> {
      s = trim_ascii(s);
      const auto dot = s.find('.');
      std::string digits(s.substr(0, dot));
      std::uint64_t scale = 1;
      if (dot != std::string_view::npos) {
        auto frac = s.substr(dot + 1);
        if (frac.size() > 9) frac = frac.substr(0, 9);
        digits += std::string(frac);
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
      }
      std::uint64_t value = 0;
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (digits.empty() || ec != std::errc{} ||
          ptr != digits.data() + digits.size()) {
        throw ArgumentError("invalid ratio '" + std::string(text) + "'");
      }
      return {value, scale};
    };
    const auto colon = text.find(':');
    auto [a, sa] = parse_term(text.substr(0, colon));
    std::uint64_t b = 1, sb = 1;
    if (colon != std::string_view::npos) {
      std::tie(b, sb) = parse_term(text.substr(colon + 1));
    }
    if (a == 0 || b == 0) {
      throw ArgumentError("ratio must be positive: '" + std::string(text) +
                          "'");
    }
    return Ratio(a * sb, b * sa);
  }

  std::uint64_t known() const { return num_; }
  std::uint64_t unknown() const { return den_; }
  double value() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

 private:
  std::uint64_t num_ = 1;
  std::uint64_t den_ = 1;
};

template <typename T>
struct MixedSet {
  std::vector<T> items;
  std::size_t n_known = 0;
  std::size_t n_unknown = 0;
};

/// Draws a known:unknown mixture at exactly the requested ratio: the largest
/// m with m*known_term and m*unknown_term both available. Within each class
/// the subsample is uniform, and the output is shuffled, all driven by `seed`.
template <typename T>
MixedSet<T> mix_by_ratio(const std::vector<T>& known,
                         const std::vector<T>& unknown, const Ratio& ratio,
                         std::uint64_t seed) {
  if (known.empty() || unknown.empty()) {
    throw ArgumentError("mix_by_ratio needs both known and unknown items");
  }
  const std::uint64_t m = std::min<std::uint64_t>(known.size() / ratio.known(),
                                                  unknown.size() / ratio.unknown());
  if (m == 0) {
    throw ArgumentError("too few items for ratio " + std::to_string(ratio.known()) +
                        ":" + std::to_string(ratio.unknown()) + " (" +
                        std::to_string(known.size()) + " known, " +
                        std::to_string(unknown.size()) + " unknown)");
  }
  const std::uint64_t k_take = m * ratio.known();
  const std::uint64_t u_take = m * ratio.unknown();

  auto subsample = [](const std::vector<T>& pool, std::uint64_t n,
                      std::uint64_t stream_seed) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    detail::Rng rng(stream_seed);
    rng.shuffle(idx);
    idx.resize(static_cast<std::size_t>(n));
    std::vector<T> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(pool[i]);
    return out;
  };

  MixedSet<T> result;
  result.items = subsample(known, k_take, detail::mix_seed(seed, 1));
  auto u = subsample(unknown, u_take, detail::mix_seed(seed, 2));
  result.items.insert(result.items.end(), u.begin(), u.end());
  detail::Rng order(detail::mix_seed(seed, 3));
  order.shuffle(result.items);
  result.n_known = static_cast<std::size_t>(k_take);
  result.n_unknown = static_cast<std::size_t>(u_take);
  return result;
}

/// Uniformly keeps at most `cap` items per source tag, preserving file order.
inline std::vector<QAItem> cap_per_source(const std::vector<QAItem>& items,
                                          std::size_t cap,
                                          std::uint64_t seed) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [it, inserted] = by_source.try_emplace(items[i].source);
    if (inserted) order.push_back(items[i].source);
    it->second.push_back(i);
  }
  std::vector<bool> keep(items.size(), false);
  for (std::size_t s = 0; s < order.size(); ++s) {
    auto idx = by_source[order[s]];
    if (idx.size() > cap) {
      detail::Rng rng(detail::mix_seed(seed, s, detail::fnv1a(order[s])));
      rng.shuffle(idx);
      idx.resize(cap);
    }
    for (auto i : idx) keep[i] = true;
  }
  std::vector<QAItem> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (keep[i]) out.push_back(items[i]);
  }
  return out;
}

}  // namespace reliakit
