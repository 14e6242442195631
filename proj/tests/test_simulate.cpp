#include <gtest/gtest.h>

#include <json.hpp>

#include "drel/error.hpp"
#include "drel/ordinal.hpp"
#include "drel/simulate.hpp"

using namespace drel;
using namespace drel::sim;

namespace {

SimConfig small(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_teams = 2;
  cfg.annotators_per_team = 3;
  cfg.du_pairs_per_team = 20;
  return cfg;
}

}  // namespace

TEST(Generate, ShapeAndIds) {
  const auto s = generate(small(1));
  EXPECT_EQ(s.dataset.size(), 2u * 3u * 20u);
  EXPECT_EQ(s.truth.annotator_effects.size(), 6u);
  EXPECT_EQ(s.truth.du_pair_effects.size(), 40u);
  EXPECT_EQ(s.dataset.by_team().levels.size(), 2u);
  EXPECT_EQ(s.dataset.by_du_pair().levels.size(), 40u);
  for (const auto& idx : s.dataset.by_du_pair().members) EXPECT_EQ(idx.size(), 3u);
  for (const auto& r : s.dataset.records()) {
    EXPECT_GE(r.confidence, 1);
    EXPECT_LE(r.confidence, 5);
    EXPECT_LE(r.labels.size(), 2u);
  }
}

TEST(Generate, Deterministic) {
  EXPECT_EQ(generate(small(3)).dataset, generate(small(3)).dataset);
  EXPECT_NE(generate(small(3)).dataset, generate(small(4)).dataset);
  EXPECT_EQ(generate(two_group_config(9)).dataset, generate(two_group_config(9)).dataset);
}

TEST(Generate, ContextIsPerPair) {
  const auto s = generate(small(5));
  for (std::size_t p = 0; p < s.dataset.by_du_pair().members.size(); ++p) {
    for (auto i : s.dataset.by_du_pair().members[p]) EXPECT_EQ(s.dataset[i].context, s.truth.du_pair_contexts[p]);
  }
}

TEST(Generate, NoColabelMeansSingleLabel) {
  auto cfg = small(2);
  cfg.colabel_rate = 0.0;
  for (const auto& r : generate(cfg).dataset.records()) EXPECT_EQ(r.labels.size(), 1u);
  cfg.colabel_rate = 1.0;
  for (const auto& r : generate(cfg).dataset.records()) EXPECT_EQ(r.labels.size(), 2u);
}

TEST(Generate, ZeroWeightLabelsNeverDrawn) {
  auto cfg = small(6);
  cfg.colabel_rate = 0.0;
  for (auto& w : cfg.label_weights) w[index(RelationLabel::Other)] = 0.0;
  for (const auto& r : generate(cfg).dataset.records()) EXPECT_FALSE(r.has(RelationLabel::Other));
}

TEST(Generate, LabelMarginalsMatchConfiguredWeights) {
  // One annotator per pair keeps records independent, so a multinomial
  // goodness-of-fit test applies.
  int passed = 0;
  const int seeds = 40;
  for (int seed = 0; seed < seeds; ++seed) {
    SimConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.annotators_per_team = 1;
    cfg.du_pairs_per_team = 10000;
    cfg.colabel_rate = 0.0;
    cfg.context_probs = {0.5, 0.2, 0.3};
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      for (std::size_t l = 0; l < kNumLabels; ++l) cfg.label_weights[c][l] = 1.0 + static_cast<double>((l * (c + 2)) % 5);
    }
    std::array<double, kNumLabels> expected{};
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      double total = 0.0;
      for (double w : cfg.label_weights[c]) total += w;
      for (std::size_t l = 0; l < kNumLabels; ++l) expected[l] += cfg.context_probs[c] * cfg.label_weights[c][l] / total;
    }
    const auto counts = label_frequencies(generate(cfg).dataset);
    double chi2 = 0.0;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      const double e = 10000.0 * expected[l];
      chi2 += (static_cast<double>(counts[l]) - e) * (static_cast<double>(counts[l]) - e) / e;
    }
    passed += ordinal::chisq_sf(chi2, static_cast<int>(kNumLabels) - 1) > 0.01;
  }
  EXPECT_GE(passed, 38);
}

TEST(Generate, CrossSpeakerConfidenceEffectIsRecovered) {
  SimConfig cfg;
  cfg.seed = 11;
  cfg.annotators_per_team = 20;
  cfg.du_pairs_per_team = 100;
  const auto ds = generate(cfg).dataset;
  ASSERT_GE(ds.size(), 2000u);
  const auto p = ordinal::problem_from_formula(ds, "confidence ~ kind + (1 | annotator)");
  const auto fit = ordinal::clmm_fit(p, ordinal::Method::Laplace);
  ASSERT_TRUE(fit.converged);
  EXPECT_GT(fit.beta[1], 0.0);
  EXPECT_GT(fit.beta[1] / fit.beta_se[1], 2.0);
}

TEST(Validate, RejectsBadConfigs) {
  EXPECT_NO_THROW(validate(SimConfig{}));
  EXPECT_NO_THROW(validate(two_group_config(0)));

  auto c = small(0);
  c.colabel_rate = 1.5;
  EXPECT_THROW(validate(c), Error);

  c = small(0);
  c.context_probs = {0.0, 0.0, 0.0};
  EXPECT_THROW(validate(c), Error);

  c = small(0);
  c.affinity[1][2][3] = 4.0;
  EXPECT_THROW(validate(c), Error);

  c = small(0);
  for (auto& v : c.affinity[0][index(RelationLabel::Comment)]) v = 0.0;
  for (auto& row : c.affinity[0]) row[index(RelationLabel::Comment)] = 0.0;
  EXPECT_THROW(validate(c), Error);
  EXPECT_THROW(generate(c), Error);
  c.colabel_rate = 0.0;
  EXPECT_NO_THROW(validate(c));

  c = small(0);
  c.confidence.thresholds = {-1.0, 0.0, 0.0, 1.0};
  EXPECT_THROW(validate(c), Error);

  c = small(0);
  c.confidence.annotator_sd = -0.1;
  EXPECT_THROW(validate(c), Error);

  c = small(0);
  c.du_pairs_per_team = 0;
  EXPECT_THROW(validate(c), Error);
}

TEST(Json, ConfigRoundTripAndOverrides) {
  const auto cfg = two_group_config(77);
  const auto text = config_to_json(cfg);
  EXPECT_EQ(config_to_json(config_from_json(text)), text);

  const auto partial = config_from_json(R"({"seed": 5, "colabel_rate": 0.1})");
  EXPECT_EQ(partial.seed, 5u);
  EXPECT_DOUBLE_EQ(partial.colabel_rate, 0.1);
  EXPECT_EQ(partial.annotators_per_team, SimConfig{}.annotators_per_team);

  EXPECT_THROW(config_from_json("{"), Error);
  EXPECT_THROW(config_from_json(R"({"colabel_rate": "high"})"), Error);
  EXPECT_THROW(config_from_json(R"({"colabel_rate": 2})"), Error);
}

TEST(Json, TruthSidecar) {
  const auto cfg = small(8);
  const auto s = generate(cfg);
  const auto j = nlohmann::json::parse(truth_to_json(cfg, s.truth));
  EXPECT_EQ(j["annotator_effects"].size(), 6u);
  EXPECT_EQ(j["du_pairs"].size(), 40u);
  EXPECT_DOUBLE_EQ(j["annotator_effects"]["a0"].get<double>(), s.truth.annotator_effects[0]);
  EXPECT_EQ(j["du_pairs"]["p0"]["context"].get<std::string>(), token(s.truth.du_pair_contexts[0]));
  EXPECT_EQ(j["config"]["seed"].get<std::uint64_t>(), 8u);
}
