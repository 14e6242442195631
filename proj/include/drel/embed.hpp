#pragma once

#include <string>
#include <vector>

#include "drel/data.hpp"
#include "drel/kernels.hpp"
#include "drel/linalg.hpp"

namespace drel::embed {

struct AssemblyConfig {
  bool weight_by_confidence = true;
  bool include_context = true;
  int pca_dims = 10;

  std::size_t feature_count() const { return include_context ? kNumLabels + kNumContexts : kNumLabels; }
  /// "weighted", "unweighted", or the mixed variants "weighted-nocontext" / "unweighted-context".
  std::string variant_name() const;
};

// Weighted annotation matrix A (n x m) and its Gram matrix O = A^T A (m x m).
// Entries are integers because confidences are integers.
struct CooccurrenceResult {
  kernels::IntMatrix annotation;
  kernels::IntMatrix cooccurrence;
  std::vector<std::string> feature_names;
  AssemblyConfig config;

  linalg::Matrix cooccurrence_real() const { return cooccurrence.cast<double>(); }
};

struct EmbeddingSet {
  linalg::Matrix vectors;  // m x d, one row per feature
  linalg::Vector eigenvalues;  // length d, non-increasing
  std::vector<std::string> feature_names;
};

struct RelationRows {
  linalg::Matrix rows;  // 12 x d
  std::vector<std::string> names;
};

enum class Backend { Serial, OpenMP };

/// Row i of A is c_i * (r_i | d_i) (or (r_i | d_i) unweighted); O = A^T A.
CooccurrenceResult assemble(const Dataset& ds, const AssemblyConfig& cfg,
                            Backend backend = Backend::OpenMP);

/// Uncentered eigendecomposition of O: vectors = U_d * Lambda_d^{1/2}.
/// Negative eigenvalues arising from round-off are clipped to zero.
EmbeddingSet factorize(const CooccurrenceResult& co, int d);

/// Same, for an arbitrary symmetric PSD matrix with named rows.
EmbeddingSet factorize_matrix(const linalg::Matrix& o, int d, std::vector<std::string> names);

/// The 12 relation-label rows in canonical order.
RelationRows relation_rows(const EmbeddingSet& e);

std::vector<std::string> feature_names(bool include_context);

}  // namespace drel::embed
