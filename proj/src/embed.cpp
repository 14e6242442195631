#include "drel/embed.hpp"

#include <cmath>

namespace drel::embed {

std::string AssemblyConfig::variant_name() const {
  if (weight_by_confidence && include_context) return "weighted";
  if (!weight_by_confidence && !include_context) return "unweighted";
  return weight_by_confidence ? "weighted-nocontext" : "unweighted-context";
}

std::vector<std::string> feature_names(bool include_context) {
  std::vector<std::string> names;
  for (auto l : kAllLabels) names.emplace_back(token(l));
  if (include_context) {
    for (auto c : kAllContexts) names.emplace_back(token(c));
  }
  return names;
}

CooccurrenceResult assemble(const Dataset& ds, const AssemblyConfig& cfg, Backend backend) {
  const auto m = static_cast<Eigen::Index>(cfg.feature_count());
  if (cfg.pca_dims < 1 || cfg.pca_dims > m) {
    throw Error("embed", "pca_dims " + std::to_string(cfg.pca_dims) + " outside [1, " +
                             std::to_string(m) + "]");
  }
  CooccurrenceResult out;
  out.config = cfg;
  out.feature_names = feature_names(cfg.include_context);
  out.annotation = kernels::IntMatrix::Zero(static_cast<Eigen::Index>(ds.size()), m);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds[i];
    const std::int64_t w = cfg.weight_by_confidence ? r.confidence : 1;
    const auto row = static_cast<Eigen::Index>(i);
    for (auto l : r.labels) out.annotation(row, static_cast<Eigen::Index>(index(l))) = w;
    if (cfg.include_context) {
      out.annotation(row, static_cast<Eigen::Index>(kNumLabels + index(r.context))) = w;
    }
  }
  out.cooccurrence = backend == Backend::OpenMP ? kernels::omp::cooccurrence(out.annotation)
                                                : kernels::serial::cooccurrence(out.annotation);
  return out;
}

EmbeddingSet factorize_matrix(const linalg::Matrix& o, int d, std::vector<std::string> names) {
  if (o.rows() != o.cols()) throw Error("embed", "co-occurrence matrix is not square");
  if (!o.allFinite()) throw Error("embed", "co-occurrence matrix has non-finite entries");
  if (d < 1 || d > o.rows()) {
    throw Error("embed", "requested " + std::to_string(d) + " dimensions but matrix has " +
                             std::to_string(o.rows()) + " features");
  }
  const auto eig = linalg::symmetric_eigen(o);
  EmbeddingSet e;
  e.feature_names = std::move(names);
  e.eigenvalues = eig.values.head(d).cwiseMax(0.0);
  e.vectors = eig.vectors.leftCols(d) * e.eigenvalues.cwiseSqrt().asDiagonal();
  return e;
}

EmbeddingSet factorize(const CooccurrenceResult& co, int d) {
  return factorize_matrix(co.cooccurrence_real(), d, co.feature_names);
}

RelationRows relation_rows(const EmbeddingSet& e) {
  if (e.vectors.rows() < static_cast<Eigen::Index>(kNumLabels)) {
    throw Error("embed", "embedding has fewer than 12 feature rows");
  }
  RelationRows out;
  out.rows = e.vectors.topRows(kNumLabels);
  out.names.assign(e.feature_names.begin(), e.feature_names.begin() + kNumLabels);
  return out;
}

}  // namespace drel::embed
