#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "drel/data.hpp"

namespace drel::sim {

using LabelWeights = std::array<double, kNumLabels>;
using Affinity = std::array<LabelWeights, kNumLabels>;

// Proportional-odds model for confidence:
//   P(conf <= j) = logistic(threshold_j - (context_effect[ctx] + u_annotator + v_du_pair)).
struct ConfidenceModel {
  std::vector<double> thresholds = {-3.0, -1.8, -0.4, 1.2};
  std::array<double, kNumContexts> context_effect = {0.0, -0.13, 0.63};
  double annotator_sd = 0.8;
  double du_pair_sd = 0.0;
};

struct SimConfig {
  std::size_t n_teams = 1;
  std::size_t annotators_per_team = 20;
  std::size_t du_pairs_per_team = 100;
  std::array<double, kNumContexts> context_probs = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  // Distribution of the first label, per context (normalised internally).
  std::array<LabelWeights, kNumContexts> label_weights;
  // Symmetric co-label weights per context; row r gives the second label's
  // distribution when the first is r (diagonal ignored).
  std::array<Affinity, kNumContexts> affinity;
  double colabel_rate = 0.3;
  ConfidenceModel confidence;
  std::uint64_t seed = 0;

  SimConfig();
};

/// Throws Error("simulate", ...) for invalid probabilities or degenerate affinity rows.
void validate(const SimConfig& cfg);

struct GroundTruth {
  std::vector<double> annotator_effects;
  std::vector<double> du_pair_effects;
  std::vector<ContextKind> du_pair_contexts;
};

struct Simulation {
  Dataset dataset;
  GroundTruth truth;
};

/// Every annotator of a team labels every DU pair of that team; each DU pair
/// has one context. Deterministic for a fixed seed.
Simulation generate(const SimConfig& cfg);

/// Corpus with two label groups: Elaboration, Explanation, Background,
/// Continuation, Narration, Contrast and Result favoured in same-speaker
/// contexts; Acknowledgement, Comment, ClarificationQuestion,
/// QuestionAnswerPair and Other across speakers. Co-labels stay inside a
/// group, with four strongly bound pairs.
SimConfig two_group_config(std::uint64_t seed);

std::string config_to_json(const SimConfig& cfg);
SimConfig config_from_json(const std::string& text);
std::string truth_to_json(const SimConfig& cfg, const GroundTruth& truth);

}  // namespace drel::sim
