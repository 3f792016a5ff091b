// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "reliakit/sft_builder.hpp"
#include "support/fault_generator.hpp"
#include "support/sft_invariants.hpp"

namespace {

using namespace reliakit;

QAItem labeled(const std::string& id, Knowledge k, const std::string& gold = "Puccini") {
  auto it = make_item(id, "Who composed Turandot?", {gold});
  it.label = KnowledgeLabel::from_counts(16, k == Knowledge::Known ? 2 : 0, "d");
  return it;
}

std::vector<QAItem> pool(std::size_t known, std::size_t unknown) {
  std::vector<QAItem> items;
  for (std::size_t i = 0; i < known; ++i) {
    items.push_back(labeled("k" + std::to_string(i), Knowledge::Known,
                            "Answer K" + std::to_string(i)));
  }
  for (std::size_t i = 0; i < unknown; ++i) {
    items.push_back(labeled("u" + std::to_string(i), Knowledge::Unknown,
                            "Answer U" + std::to_string(i)));
  }
  return items;
}

TEST(TracePrompt, FillsQuestionAndReference) {
  auto item = make_item("a", "Who composed Turandot?", {"Giacomo Puccini"});
  item.label = KnowledgeLabel::from_counts(16, 2, "");
  auto p = render_trace_prompt(item, Knowledge::Known);
  EXPECT_NE(p.find("Q: Who composed Turandot?"), std::string::npos);
  EXPECT_NE(p.find("[Ref Answer: [Giacomo Puccini]]"), std::string::npos);
  EXPECT_EQ(p.find("{question}"), std::string::npos);
  EXPECT_THROW(render_trace_prompt(item, Knowledge::Unknown), ArgumentError);
}

TEST(TraceTemplate, ValidatesSlots) {
  EXPECT_THROW((TraceTemplate{Knowledge::Unknown, "no slot"}.validate()), ConfigError);
  EXPECT_THROW((TraceTemplate{Knowledge::Known, "{question} only"}.validate()), ConfigError);
  EXPECT_NO_THROW((TraceTemplate{Knowledge::Unknown, "{question}"}.validate()));
  auto path = (std::filesystem::temp_directory_path() / "reliakit_tpl.txt").string();
  std::ofstream(path) << "Q: {question} A: {ref_answer}";
  EXPECT_EQ(TraceTemplate::from_file(Knowledge::Known, path).text, "Q: {question} A: {ref_answer}");
  EXPECT_THROW(TraceTemplate::from_file(Knowledge::Known, "/nonexistent"), ConfigError);
}

TEST(ValidateTrace, KnownNeedsMatchingBox) {
  auto item = labeled("a", Knowledge::Known);
  EXPECT_TRUE(validate_trace("<think>x</think>\\boxed{Puccini}", item, Knowledge::Known).passed());
  EXPECT_TRUE(validate_trace("<think>x</think>\\boxed{Verdi}", item, Knowledge::Known)
                  .has(Violation::BoxedMismatch));
  EXPECT_TRUE(validate_trace("<think>x</think>Puccini", item, Knowledge::Known)
                  .has(Violation::MissingBoxed));
  EXPECT_TRUE(validate_trace("\\boxed{Puccini}", item, Knowledge::Known)
                  .has(Violation::MissingThinkSegment));
  EXPECT_TRUE(validate_trace("<think>\\boxed{Puccini}", item, Knowledge::Known)
                  .has(Violation::MissingThinkSegment));
}

TEST(ValidateTrace, UnknownMustRefuseWithoutLeaking) {
  auto item = labeled("a", Knowledge::Unknown);
  EXPECT_TRUE(validate_trace("<think>Verdi? no.</think>Sorry, I don't know.", item,
                             Knowledge::Unknown).passed());
  EXPECT_TRUE(validate_trace("<think>maybe PUCCINI</think>Sorry, I don't know.", item,
                             Knowledge::Unknown).has(Violation::LeakedGoldAnswer));
  auto v = validate_trace("<think>x</think>\\boxed{Verdi}", item, Knowledge::Unknown);
  EXPECT_TRUE(v.has(Violation::MissingRefusal));
  EXPECT_FALSE(v.has(Violation::LeakedGoldAnswer));
}

TEST(CanonicalBoxes, AddsMissingBackslash) {
  EXPECT_EQ(canonical_boxes("a boxed{x} \\boxed{y}"), "a \\boxed{x} \\boxed{y}");
  EXPECT_EQ(canonical_boxes("boxed{x}"), "\\boxed{x}");
}

TEST(Build, RetriesThenDropsAndReports) {
  // Known item always fails, unknown items always pass.
  std::vector<QAItem> items{labeled("k", Knowledge::Known)};
  for (int i = 0; i < 3; ++i) items.push_back(labeled("u" + std::to_string(i), Knowledge::Unknown));
  ScriptedModel::Table t{{"k", {{1.0, "<think>x</think>\\boxed{Verdi}"}}},
                         {"*", {{1.0, "<think>x</think>I don't know"}}}};
  ScriptedModel gen(t, 1);
  BuildOptions opt;
  opt.ratio = Ratio(1, 1);
  opt.retries = 2;
  auto res = build_sft_dataset(items, gen, opt);
  EXPECT_EQ(res.report.target_known, 1u);
  EXPECT_EQ(res.report.target_unknown, 1u);
  ASSERT_EQ(res.report.dropped.size(), 1u);
  EXPECT_EQ(res.report.dropped[0].id, "k");
  EXPECT_EQ(res.report.dropped[0].reasons.size(), 3u);
  EXPECT_EQ(res.report.violation_counts["boxed_mismatch"], 3u);
  EXPECT_EQ(res.report.attempts, 4u);
  EXPECT_EQ(res.report.retries_used, 2u);
  EXPECT_EQ(res.report.shortfall(), 1u);
  EXPECT_EQ(res.records.size(), 1u);
}

TEST(Build, SkipsUnlabeledAndNeedsBothClasses) {
  auto items = pool(3, 1);
  items.push_back(make_item("raw", "q", {"a"}));
  ScriptedModel gen({{"*", {{1.0, "<think>x</think>I don't know"}}}}, 1);
  BuildOptions opt;
  opt.retries = 0;
  auto res = build_sft_dataset(items, gen, opt);
  EXPECT_EQ(res.report.skipped_unlabeled, 1u);
  EXPECT_THROW(build_sft_dataset(pool(3, 0), gen, opt), ArgumentError);
}

TEST(Build, TrimsAndCanonicalizes) {
  std::vector<QAItem> items{labeled("k", Knowledge::Known), labeled("u", Knowledge::Unknown)};
  ScriptedModel gen({{"k", {{1.0, "<think>\n\n  reasoning  \n</think>\n\nSo boxed{Puccini}.  "}}},
                     {"u", {{1.0, "<think>none</think>Sorry, I don't know."}}}},
                    1);
  BuildOptions opt;
  opt.ratio = Ratio(1, 1);
  auto res = build_sft_dataset(items, gen, opt);
  ASSERT_EQ(res.records.size(), 2u);
  for (const auto& r : res.records) {
    if (r.kind != SftKind::KnownAnswer) continue;
    EXPECT_EQ(r.trace, "reasoning");
    EXPECT_EQ(r.answer, "So \\boxed{Puccini}.");
  }
}

TEST(Build, FaultInjectionNeverLeaksBadRecords) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto items = pool(12, 6);
    support::FaultGenerator gen(items, 0.5, seed);
    BuildOptions opt;
    opt.seed = seed;
    opt.workers = 3;
    auto res = build_sft_dataset(items, gen, opt);
    std::set<std::string> ids;
    for (const auto& r : res.records) {
      const auto it = std::find_if(items.begin(), items.end(),
                                   [&](const QAItem& x) { return x.id == r.id; });
      ASSERT_NE(it, items.end());
      EXPECT_EQ(support::record_problem(r, *it), "") << r.id << " seed " << seed;
      EXPECT_TRUE(ids.insert(r.id).second);
    }
    EXPECT_EQ(res.report.emitted_known + res.report.emitted_unknown, res.records.size());
    if (res.report.passed_known >= 3 && res.report.passed_unknown >= 1) {
      EXPECT_EQ(res.report.emitted_known, 3 * res.report.emitted_unknown);
    }
  }
}

TEST(Build, DeterministicAcrossWorkerCounts) {
  auto items = pool(12, 6);
  support::FaultGenerator gen(items, 0.6, 9);
  BuildOptions a;
  a.seed = 4;
  BuildOptions b = a;
  b.workers = 4;
  auto ra = build_sft_dataset(items, gen, a);
  auto rb = build_sft_dataset(items, gen, b);
  EXPECT_EQ(ra.records, rb.records);
  EXPECT_EQ(to_json(ra.report), to_json(rb.report));
}

TEST(Build, SufficientPoolsYieldRequestedCounts) {
  auto items = pool(3000, 900);
  // A known trace must box its own gold, so route per id.
  ScriptedModel::Table t;
  for (const auto& it : items) {
    t[it.id] = {{1.0, it.label->value == Knowledge::Known
                          ? "<think>x</think>\\boxed{" + it.raw_gold_answers[0] + "}"
                          : "<think>x</think>Sorry, I don't know."}};
  }
  ScriptedModel perfect(t, 1);
  BuildOptions opt;
  opt.workers = 4;
  auto res = build_sft_dataset(items, perfect, opt);
  EXPECT_EQ(res.report.emitted_known, 2700u);
  EXPECT_EQ(res.report.emitted_unknown, 900u);
  EXPECT_EQ(res.report.shortfall(), 0u);
}

}  // namespace
