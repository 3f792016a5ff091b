// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "reliakit/qa_data.hpp"

namespace {

using namespace reliakit;
namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "reliakit_qa_data_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

QAItem labeled(std::string id, Knowledge k) {
  QAItem it = make_item(std::move(id), "q?", {"a"}, "src");
  it.label = KnowledgeLabel::from_counts(16, k == Knowledge::Known ? 3 : 0, "d");
  return it;
}

TEST(KnowledgeLabel, KnownIffAnyMatch) {
  EXPECT_EQ(KnowledgeLabel::from_counts(16, 0, "").value, Knowledge::Unknown);
  EXPECT_EQ(KnowledgeLabel::from_counts(16, 1, "").value, Knowledge::Known);
  EXPECT_THROW(KnowledgeLabel::from_counts(2, 3, ""), ArgumentError);
}

TEST(MakeItem, NormalizesGoldsAndKeepsOriginals) {
  auto it = make_item("x", "Q", {"  My Fair Lady "}, "trivia");
  EXPECT_EQ(it.gold_answers, std::vector<std::string>{"my fair lady"});
  EXPECT_EQ(it.raw_gold_answers, std::vector<std::string>{"  My Fair Lady "});
}

TEST(Validate, RejectsBrokenItems) {
  EXPECT_THROW(validate(make_item("", "q", {"a"})), ArgumentError);
  EXPECT_THROW(validate(make_item("x", "q", {})), ArgumentError);
  EXPECT_THROW(validate(make_item("x", "q", {"..."})), ArgumentError);
  auto it = make_item("x", "q", {"a"});
  it.label = KnowledgeLabel{Knowledge::Known, 4, 0, ""};
  EXPECT_THROW(validate(it), ArgumentError);
}

TEST(Dataset, RoundTripsWithMeta) {
  std::vector<QAItem> items{labeled("a", Knowledge::Known),
                            make_item("b", "Who?", {"Bob", "Robert"}, "s2")};
  ojson meta{{"tool", "reliakit"}, {"seed", 3}};
  const auto path = temp_file("roundtrip.jsonl").string();
  write_dataset(items, path, meta);
  auto file = read_dataset_file(path);
  EXPECT_EQ(file.records, items);
  ASSERT_TRUE(file.meta);
  EXPECT_EQ((*file.meta)["seed"], 3);
}

TEST(Dataset, ReportsLineOfMalformedRecord) {
  const auto path = temp_file("bad.jsonl");
  write_text(path,
             "{\"id\":\"a\",\"question\":\"q\",\"gold_answers\":[\"x\"]}\n"
             "\n"
             "{\"id\":\"b\",\"question\":\"q\"}\n");
  try {
    read_dataset(path.string());
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
}

TEST(Dataset, RejectsDuplicateIds) {
  const auto path = temp_file("dup.jsonl");
  write_text(path,
             "{\"id\":\"a\",\"question\":\"q\",\"gold_answers\":[\"x\"]}\n"
             "{\"id\":\"a\",\"question\":\"r\",\"gold_answers\":[\"y\"]}\n");
  EXPECT_THROW(read_dataset(path.string()), IoError);
}

TEST(Dataset, MissingFileIsIoError) {
  EXPECT_THROW(read_dataset("/nonexistent/nowhere.jsonl"), IoError);
}

TEST(Sft, RoundTripsAndAssemblesOutput) {
  SftRecord r{"a", "q?", "thinking", "The answer is \\boxed{x}.", SftKind::KnownAnswer};
  EXPECT_EQ(r.output(), "<think>\nthinking\n</think>\n\nThe answer is \\boxed{x}.");
  const auto path = temp_file("sft.jsonl").string();
  write_sft({r}, path);
  EXPECT_EQ(read_sft(path), std::vector<SftRecord>{r});
}

TEST(Ratio, Parses) {
  EXPECT_EQ(Ratio::parse("3:1").known(), 3u);
  EXPECT_EQ(Ratio::parse("6:2").known(), 3u);
  auto r = Ratio::parse("2.5");
  EXPECT_EQ(r.known(), 5u);
  EXPECT_EQ(r.unknown(), 2u);
  EXPECT_DOUBLE_EQ(Ratio::parse(" 1.5 : 0.5 ").value(), 3.0);
  for (const char* bad : {"", "0:1", "3:0", "a:b", "-1:2", "3:1:1"}) {
    EXPECT_THROW(Ratio::parse(bad), ArgumentError) << bad;
  }
}

TEST(MixByRatio, SufficientPoolsGiveExactCounts) {
  std::vector<int> known(5000), unknown(800);
  std::iota(known.begin(), known.end(), 0);
  std::iota(unknown.begin(), unknown.end(), 100000);
  auto m = mix_by_ratio(known, unknown, Ratio(3, 1), 9);
  EXPECT_EQ(m.n_known, 2400u);
  EXPECT_EQ(m.n_unknown, 800u);
  EXPECT_EQ(m.items.size(), 3200u);
  std::set<int> distinct(m.items.begin(), m.items.end());
  EXPECT_EQ(distinct.size(), 3200u);
}

TEST(MixByRatio, KeepsExactRatioWhenKnownIsScarce) {
  std::vector<int> known(8), unknown(4);
  auto m = mix_by_ratio(known, unknown, Ratio(3, 1), 1);
  EXPECT_EQ(m.n_known, 6u);
  EXPECT_EQ(m.n_unknown, 2u);
}

TEST(MixByRatio, IsDeterministicPerSeed) {
  std::vector<int> known(50), unknown(50);
  std::iota(known.begin(), known.end(), 0);
  std::iota(unknown.begin(), unknown.end(), 50);
  auto a = mix_by_ratio(known, unknown, Ratio(3, 1), 4);
  auto b = mix_by_ratio(known, unknown, Ratio(3, 1), 4);
  auto c = mix_by_ratio(known, unknown, Ratio(3, 1), 5);
  EXPECT_EQ(a.items, b.items);
  EXPECT_NE(a.items, c.items);
}

TEST(MixByRatio, RejectsEmptyOrTooSmallPools) {
  std::vector<int> some(3), none;
  EXPECT_THROW(mix_by_ratio(some, none, Ratio(3, 1), 0), ArgumentError);
  EXPECT_THROW(mix_by_ratio(std::vector<int>(2), some, Ratio(3, 1), 0), ArgumentError);
}

TEST(CapPerSource, CapsEachSourceAndKeepsOrder) {
  std::vector<QAItem> items;
  for (int i = 0; i < 10; ++i) {
    items.push_back(make_item("a" + std::to_string(i), "q", {"x"}, "A"));
    items.push_back(make_item("b" + std::to_string(i), "q", {"x"}, "B"));
  }
  items.push_back(make_item("c0", "q", {"x"}, "C"));
  auto out = cap_per_source(items, 3, 1);
  std::map<std::string, int> per;
  for (const auto& it : out) ++per[it.source];
  EXPECT_EQ(per["A"], 3);
  EXPECT_EQ(per["B"], 3);
  EXPECT_EQ(per["C"], 1);
  for (std::size_t i = 1; i < out.size(); ++i) {
    auto pos = [&](const QAItem& x) {
      return std::find(items.begin(), items.end(), x) - items.begin();
    };
    EXPECT_LT(pos(out[i - 1]), pos(out[i]));
  }
}

}  // namespace
