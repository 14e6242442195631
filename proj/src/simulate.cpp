#include "drel/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>

#include <json.hpp>

#include "drel/error.hpp"
#include "drel/rng.hpp"

namespace drel::sim {

namespace {

std::size_t draw(CounterRng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Round-off fallthrough: last index with positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return i;
  }
  return 0;
}

void check_prob(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("simulate", what + " must lie in [0, 1]");
}

void check_weights(std::span<const double> w, const std::string& what) {
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("simulate", what + " has a negative or non-finite weight");
    total += v;
  }
  if (!(total > 0.0)) throw Error("simulate", what + " is all zero");
}

}  // namespace

SimConfig::SimConfig() {
  for (auto& w : label_weights) w.fill(1.0);
  for (auto& a : affinity) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      a[i].fill(1.0);
      a[i][i] = 0.0;
    }
  }
}

void validate(const SimConfig& cfg) {
  if (cfg.n_teams == 0 || cfg.annotators_per_team == 0 || cfg.du_pairs_per_team == 0) {
    throw Error("simulate", "team, annotator and DU-pair counts must be positive");
  }
  check_weights(cfg.context_probs, "context distribution");
  for (double p : cfg.context_probs) check_prob(p, "context probability");
  check_prob(cfg.colabel_rate, "colabel_rate");
  for (std::size_t c = 0; c < kNumContexts; ++c) {
    const std::string ctx(token(kAllContexts[c]));
    check_weights(cfg.label_weights[c], "label distribution for " + ctx);
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      for (std::size_t j = 0; j < kNumLabels; ++j) {
        const double v = cfg.affinity[c][i][j];
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw Error("simulate", "affinity for " + ctx + " has a negative or non-finite entry");
        }
        if (i != j && std::abs(v - cfg.affinity[c][j][i]) > 1e-12) {
          throw Error("simulate", "affinity for " + ctx + " is not symmetric");
        }
      }
      if (cfg.colabel_rate > 0 && cfg.context_probs[c] > 0 && cfg.label_weights[c][i] > 0) {
        double off = 0.0;
        for (std::size_t j = 0; j < kNumLabels; ++j) {
          if (j != i) off += cfg.affinity[c][i][j];
        }
        if (!(off > 0.0)) {
          throw Error("simulate", "affinity row '" + std::string(token(kAllLabels[i])) + "' for " + ctx +
                                      " is all zero");
        }
      }
    }
  }
  const auto& th = cfg.confidence.thresholds;
  if (th.size() != static_cast<std::size_t>(kMaxConfidence - 1)) {
    throw Error("simulate", "confidence model needs 4 thresholds");
  }
  for (std::size_t j = 1; j < th.size(); ++j) {
    if (!(th[j] > th[j - 1])) throw Error("simulate", "confidence thresholds must increase");
  }
  if (cfg.confidence.annotator_sd < 0 || cfg.confidence.du_pair_sd < 0) {
    throw Error("simulate", "random-effect standard deviations must be non-negative");
  }
}

Simulation generate(const SimConfig& cfg) {
  validate(cfg);
  const std::size_t n_ann = cfg.n_teams * cfg.annotators_per_team;
  const std::size_t n_pairs = cfg.n_teams * cfg.du_pairs_per_team;

  GroundTruth truth;
  CounterRng ctx_rng(cfg.seed, 1), ann_rng(cfg.seed, 2), pair_rng(cfg.seed, 3), rec_rng(cfg.seed, 4);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    truth.du_pair_contexts.push_back(kAllContexts[draw(ctx_rng, cfg.context_probs)]);
  }
  for (std::size_t a = 0; a < n_ann; ++a) truth.annotator_effects.push_back(cfg.confidence.annotator_sd * ann_rng.normal());
  for (std::size_t p = 0; p < n_pairs; ++p) truth.du_pair_effects.push_back(cfg.confidence.du_pair_sd * pair_rng.normal());

  std::vector<AnnotationRecord> recs;
  recs.reserve(n_ann * cfg.du_pairs_per_team);
  std::size_t next_id = 0;
  for (std::size_t t = 0; t < cfg.n_teams; ++t) {
    for (std::size_t ai = 0; ai < cfg.annotators_per_team; ++ai) {
      const std::size_t a = t * cfg.annotators_per_team + ai;
      for (std::size_t pi = 0; pi < cfg.du_pairs_per_team; ++pi) {
        const std::size_t p = t * cfg.du_pairs_per_team + pi;
        const auto ctx = truth.du_pair_contexts[p];
        const auto c = index(ctx);
        AnnotationRecord r;
        r.record_id = "r" + std::to_string(next_id++);
        r.annotator_id = "a" + std::to_string(a);
        r.team_id = "t" + std::to_string(t);
        r.conversation_id = "c" + std::to_string(t);
        r.du_pair_id = "p" + std::to_string(p);
        r.context = ctx;
        const std::size_t first = draw(rec_rng, cfg.label_weights[c]);
        r.labels.push_back(kAllLabels[first]);
        if (rec_rng.uniform() < cfg.colabel_rate) {
          LabelWeights row = cfg.affinity[c][first];
          row[first] = 0.0;
          r.labels.push_back(kAllLabels[draw(rec_rng, row)]);
        }
        const double eta = cfg.confidence.context_effect[c] + truth.annotator_effects[a] + truth.du_pair_effects[p];
        const double latent = eta + rec_rng.logistic();
        int y = 1;
        for (double th : cfg.confidence.thresholds) {
          if (latent > th) ++y;
        }
        r.confidence = y;
        recs.push_back(std::move(r));
      }
    }
  }
  return {Dataset(std::move(recs)), std::move(truth)};
}

SimConfig two_group_config(std::uint64_t seed) {
  using L = RelationLabel;
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_teams = 4;
  cfg.annotators_per_team = 5;
  cfg.du_pairs_per_team = 250;
  cfg.context_probs = {0.3, 0.3, 0.4};
  cfg.colabel_rate = 0.95;

  const std::array<L, 7> same_group = {L::Elaboration, L::Explanation, L::Background, L::Continuation,
                                       L::Narration,   L::Contrast,    L::Result};
  auto in_same = [&](std::size_t i) {
    return std::find(same_group.begin(), same_group.end(), kAllLabels[i]) != same_group.end();
  };

  LabelWeights same{}, cross{};
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    same[i] = in_same(i) ? 1.0 : 0.02;
    cross[i] = in_same(i) ? 0.02 : 1.0;
  }
  cfg.label_weights = {same, same, cross};

  // Uniform affinity inside each group, near zero across, and four strongly
  // bound pairs. The pairs leave small eigen-directions in O, so a 10-dim
  // truncation of the 15 features keeps the group structure intact.
  Affinity aff{};
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    for (std::size_t j = 0; j < kNumLabels; ++j) {
      aff[i][j] = i == j ? 0.0 : in_same(i) == in_same(j) ? 1.0 : 0.01;
    }
  }
  auto bind = [&](L x, L y) { aff[index(x)][index(y)] = aff[index(y)][index(x)] = 5.0; };
  bind(L::Elaboration, L::Explanation);
  bind(L::Background, L::Continuation);
  bind(L::Acknowledgement, L::Comment);
  bind(L::ClarificationQuestion, L::QuestionAnswerPair);
  cfg.affinity = {aff, aff, aff};
  return cfg;
}

std::string config_to_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["seed"] = cfg.seed;
  j["n_teams"] = cfg.n_teams;
  j["annotators_per_team"] = cfg.annotators_per_team;
  j["du_pairs_per_team"] = cfg.du_pairs_per_team;
  j["context_probs"] = cfg.context_probs;
  j["colabel_rate"] = cfg.colabel_rate;
  nlohmann::ordered_json lw, af;
  for (std::size_t c = 0; c < kNumContexts; ++c) {
    lw[std::string(token(kAllContexts[c]))] = cfg.label_weights[c];
    af[std::string(token(kAllContexts[c]))] = cfg.affinity[c];
  }
  j["label_weights"] = lw;
  j["affinity"] = af;
  j["confidence"] = {{"thresholds", cfg.confidence.thresholds},
                     {"context_effect", cfg.confidence.context_effect},
                     {"annotator_sd", cfg.confidence.annotator_sd},
                     {"du_pair_sd", cfg.confidence.du_pair_sd}};
  return j.dump(2);
}

SimConfig config_from_json(const std::string& text) {
  SimConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("simulate", std::string("invalid config JSON: ") + e.what());
  }
  try {
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_teams")) cfg.n_teams = j["n_teams"].get<std::size_t>();
    if (j.contains("annotators_per_team")) cfg.annotators_per_team = j["annotators_per_team"].get<std::size_t>();
    if (j.contains("du_pairs_per_team")) cfg.du_pairs_per_team = j["du_pairs_per_team"].get<std::size_t>();
    if (j.contains("context_probs")) cfg.context_probs = j["context_probs"].get<std::array<double, kNumContexts>>();
    if (j.contains("colabel_rate")) cfg.colabel_rate = j["colabel_rate"].get<double>();
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      const std::string key(token(kAllContexts[c]));
      if (j.contains("label_weights") && j["label_weights"].contains(key)) {
        cfg.label_weights[c] = j["label_weights"][key].get<LabelWeights>();
      }
      if (j.contains("affinity") && j["affinity"].contains(key)) {
        cfg.affinity[c] = j["affinity"][key].get<Affinity>();
      }
    }
    if (j.contains("confidence")) {
      const auto& cm = j["confidence"];
      if (cm.contains("thresholds")) cfg.confidence.thresholds = cm["thresholds"].get<std::vector<double>>();
      if (cm.contains("context_effect")) {
        cfg.confidence.context_effect = cm["context_effect"].get<std::array<double, kNumContexts>>();
      }
      if (cm.contains("annotator_sd")) cfg.confidence.annotator_sd = cm["annotator_sd"].get<double>();
      if (cm.contains("du_pair_sd")) cfg.confidence.du_pair_sd = cm["du_pair_sd"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("simulate", std::string("invalid config field: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string truth_to_json(const SimConfig& cfg, const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(config_to_json(cfg));
  nlohmann::ordered_json ann = nlohmann::ordered_json::object();
  for (std::size_t a = 0; a < truth.annotator_effects.size(); ++a) {
    ann["a" + std::to_string(a)] = truth.annotator_effects[a];
  }
  nlohmann::ordered_json pairs = nlohmann::ordered_json::object();
  for (std::size_t p = 0; p < truth.du_pair_contexts.size(); ++p) {
    pairs["p" + std::to_string(p)] = {{"context", token(truth.du_pair_contexts[p])},
                                      {"effect", truth.du_pair_effects[p]}};
  }
  j["annotator_effects"] = ann;
  j["du_pairs"] = pairs;
  return j.dump(2);
}

}  // namespace drel::sim
