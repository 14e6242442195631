#include <gtest/gtest.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <numeric>

#include "drel/data.hpp"
#include "oracles.hpp"

using namespace drel;

namespace {

AnnotationRecord rec(std::string id, std::vector<RelationLabel> labels, ContextKind ctx, int conf) {
  AnnotationRecord r;
  r.record_id = std::move(id);
  r.annotator_id = "a1";
  r.team_id = "t1";
  r.conversation_id = "c1";
  r.du_pair_id = "p1";
  r.context = ctx;
  r.labels = std::move(labels);
  r.confidence = conf;
  return r;
}

const char* kOneLine =
    R"({"record_id":"r1","annotator":"a","team":"t","conversation":"c","du_pair":"p","context":"single_turn","labels":["elaboration"],"confidence":3})"
    "\n";

std::string expect_validation_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ValidationError";
  return {};
}

}  // namespace

TEST(Labels, CanonicalOrderAndTokens) {
  ASSERT_EQ(kAllLabels.size(), 12u);
  EXPECT_EQ(index(RelationLabel::Acknowledgement), 0u);
  EXPECT_EQ(index(RelationLabel::Elaboration), 6u);
  EXPECT_EQ(index(RelationLabel::Other), 11u);
  EXPECT_EQ(index(ContextKind::CrossSpeaker), 2u);
  for (auto l : kAllLabels) EXPECT_EQ(parse_label(token(l)), l);
  for (auto c : kAllContexts) EXPECT_EQ(parse_context(token(c)), c);
  EXPECT_EQ(display_name(RelationLabel::QuestionAnswerPair), "Question-Answer Pair");
}

TEST(Labels, ExactMatchOnly) {
  EXPECT_FALSE(parse_label("Elaboration"));
  EXPECT_FALSE(parse_label(" elaboration"));
  EXPECT_FALSE(parse_label("qap"));
  EXPECT_FALSE(parse_context("SingleTurn"));
}

TEST(Parse, MinimalRecord) {
  const auto ds = parse_jsonl(kOneLine);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].labels, std::vector<RelationLabel>{RelationLabel::Elaboration});
  EXPECT_EQ(ds[0].context, ContextKind::SingleTurn);
  EXPECT_EQ(ds[0].confidence, 3);
}

TEST(Parse, ConfidenceOutOfRangeNamesRow) {
  std::string text = kOneLine;
  text.replace(text.find("\"confidence\":3"), 14, "\"confidence\":6");
  const auto msg = expect_validation_error([&] { parse_jsonl(text); });
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("confidence"), std::string::npos) << msg;
}

TEST(Parse, Errors) {
  std::string two = std::string(kOneLine) + kOneLine;
  auto msg = expect_validation_error([&] { parse_jsonl(two); });
  EXPECT_NE(msg.find("duplicate record_id"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;

  std::string bad_label = kOneLine;
  bad_label.replace(bad_label.find("elaboration"), 11, "Elaboration");
  msg = expect_validation_error([&] { parse_jsonl(bad_label); });
  EXPECT_NE(msg.find("unknown label"), std::string::npos) << msg;

  std::string bad_ctx = kOneLine;
  bad_ctx.replace(bad_ctx.find("single_turn"), 11, "same_turn");
  msg = expect_validation_error([&] { parse_jsonl(bad_ctx); });
  EXPECT_NE(msg.find("unknown context"), std::string::npos) << msg;

  msg = expect_validation_error([&] { parse_jsonl(std::string(kOneLine) + "{not json\n"); });
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;

  std::string dup_label = kOneLine;
  dup_label.replace(dup_label.find("[\"elaboration\"]"), 15, "[\"elaboration\",\"elaboration\"]");
  expect_validation_error([&] { parse_jsonl(dup_label); });

  std::string empty_labels = kOneLine;
  empty_labels.replace(empty_labels.find("[\"elaboration\"]"), 15, "[]");
  expect_validation_error([&] { parse_jsonl(empty_labels); });

  expect_validation_error([&] { parse_jsonl(""); });
}

TEST(Parse, Csv) {
  const std::string text =
      "record_id,annotator,team,conversation,du_pair,context,labels,confidence\n"
      "r1,a,t,c,p1,cross_speaker,elaboration|contrast,4\n"
      "\"r,2\",a,t,c,p2,within_speaker,comment,1\n";
  const auto ds = parse_csv(text);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].labels, (std::vector{RelationLabel::Elaboration, RelationLabel::Contrast}));
  EXPECT_EQ(ds[1].record_id, "r,2");
  EXPECT_EQ(ds[1].context, ContextKind::WithinSpeakerCrossTurn);

  const auto msg = expect_validation_error(
      [&] { parse_csv("\xEF\xBB\xBFrecord_id,annotator,team,conversation,du_pair,context,labels,confidence\n"); });
  EXPECT_NE(msg.find("byte order mark"), std::string::npos);
  expect_validation_error([&] { parse_csv("record_id,annotator\nr1,a\n"); });
}

TEST(Parse, RoundTripBothFormats) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = oracle::random_dataset(seed, 30);
    EXPECT_EQ(parse_jsonl(to_jsonl(ds)), ds);
    EXPECT_EQ(parse_csv(to_csv(ds)), ds);
  }
}

TEST(Parse, FilesByExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "drel_test_data";
  std::filesystem::create_directories(dir);
  const auto ds = oracle::random_dataset(3, 10);
  write_dataset(ds, dir / "x.csv", FileFormat::Csv);
  write_dataset(ds, dir / "x.jsonl", FileFormat::Jsonl);
  EXPECT_EQ(parse_dataset(dir / "x.csv"), ds);
  EXPECT_EQ(parse_dataset(dir / "x.jsonl"), ds);
  EXPECT_THROW(format_from_path(dir / "x.txt"), ValidationError);
  EXPECT_THROW(parse_dataset(dir / "missing.jsonl"), ValidationError);
}

TEST(Dataset, GroupIndicesInFirstAppearanceOrder) {
  std::vector<AnnotationRecord> recs;
  recs.push_back(rec("r1", {RelationLabel::Comment}, ContextKind::CrossSpeaker, 5));
  recs.push_back(rec("r2", {RelationLabel::Comment}, ContextKind::CrossSpeaker, 5));
  recs[1].annotator_id = "a0";
  recs.push_back(rec("r3", {RelationLabel::Comment}, ContextKind::CrossSpeaker, 5));
  const Dataset ds(recs);
  EXPECT_EQ(ds.by_annotator().levels, (std::vector<std::string>{"a1", "a0"}));
  EXPECT_EQ(ds.by_annotator().of_record, (std::vector<std::size_t>{0, 1, 0}));
  EXPECT_EQ(ds.by_annotator().members[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(ds.by_du_pair().levels.size(), 1u);
}

TEST(Frequencies, DirectCount) {
  const Dataset ds({rec("r1", {RelationLabel::Elaboration}, ContextKind::SingleTurn, 3),
                    rec("r2", {RelationLabel::Elaboration, RelationLabel::Contrast}, ContextKind::SingleTurn, 3)});
  const auto f = label_frequencies(ds);
  EXPECT_EQ(f[index(RelationLabel::Elaboration)], 2u);
  EXPECT_EQ(f[index(RelationLabel::Contrast)], 1u);
  EXPECT_EQ(std::accumulate(f.begin(), f.end(), std::size_t{0}), 3u);
  EXPECT_EQ(ds.total_label_tokens(), 3u);
}

TEST(Frequencies, TotalsMatchTokenCountAndTableCounts) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = oracle::random_dataset(seed, 40);
    const auto f = label_frequencies(ds);
    EXPECT_EQ(std::accumulate(f.begin(), f.end(), std::size_t{0}), ds.total_label_tokens());
    const auto t = confidence_table(ds);
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      std::size_t n = 0;
      for (const auto& cell : t[l]) n += cell ? cell->count : 0;
      EXPECT_EQ(n, f[l]);
    }
  }
}

TEST(ConfidenceTable, HandAveraging) {
  const Dataset one({rec("r1", {RelationLabel::Comment}, ContextKind::CrossSpeaker, 5)});
  const auto t1 = confidence_table(one);
  ASSERT_TRUE(t1[index(RelationLabel::Comment)][2]);
  EXPECT_DOUBLE_EQ(t1[index(RelationLabel::Comment)][2]->mean, 5.0);
  EXPECT_EQ(t1[index(RelationLabel::Comment)][2]->count, 1u);
  EXPECT_FALSE(t1[index(RelationLabel::Comment)][0]);
  EXPECT_FALSE(t1[index(RelationLabel::Result)][2]);

  const Dataset two({rec("r1", {RelationLabel::Comment}, ContextKind::SingleTurn, 4),
                     rec("r2", {RelationLabel::Comment, RelationLabel::Result}, ContextKind::SingleTurn, 2)});
  const auto t2 = confidence_table(two);
  EXPECT_DOUBLE_EQ(t2[index(RelationLabel::Comment)][0]->mean, 3.0);
  EXPECT_EQ(t2[index(RelationLabel::Comment)][0]->count, 2u);
  EXPECT_DOUBLE_EQ(t2[index(RelationLabel::Result)][0]->mean, 2.0);
}

TEST(Fixture, PublishedLabelCounts) {
  const auto ds = parse_dataset(std::filesystem::path(DREL_DATA_DIR) / "label_counts_fixture.jsonl");
  const auto f = label_frequencies(ds);
  using L = RelationLabel;
  const std::vector<std::pair<L, std::size_t>> expected = {
      {L::Elaboration, 636}, {L::Continuation, 554},         {L::Acknowledgement, 494},
      {L::Explanation, 383}, {L::Comment, 265},              {L::Background, 252},
      {L::Narration, 249},   {L::QuestionAnswerPair, 248},   {L::Contrast, 191},
      {L::ClarificationQuestion, 179}, {L::Result, 124},     {L::Other, 106}};
  for (const auto& [l, n] : expected) EXPECT_EQ(f[index(l)], n) << token(l);
  EXPECT_EQ(ds.total_label_tokens(), 3681u);
}
