#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "drel/linalg.hpp"

namespace drel::cluster {

using linalg::Matrix;

enum class Linkage { Single, Complete, Average };

std::string_view to_string(Linkage l);
Linkage parse_linkage(std::string_view s);

// Node ids follow the usual convention: leaves are 0..n-1 and the cluster
// created by merge s is n + s. `left` is the smaller of the two node ids.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct ClusterTree {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;  // n - 1 entries
  Linkage linkage = Linkage::Average;

  std::size_t size() const { return leaves.size(); }
  /// Leaf ids in left-to-right dendrogram order.
  std::vector<std::size_t> leaf_order() const;
};

/// Euclidean agglomerative clustering with Lance-Williams updates. Among
/// equal distances the pair with the smallest (i, j) is merged first, where
/// a cluster is identified by its smallest leaf index.
ClusterTree agglomerate(const Matrix& coords, Linkage linkage, std::vector<std::string> names = {});

/// Undoes the last k - 1 merges; cluster ids are numbered by first leaf.
std::vector<int> cut(const ClusterTree& tree, int k);

struct Silhouette {
  std::vector<double> per_point;
  double mean = 0.0;
};

/// Silhouette widths; points in singleton clusters score 0.
Silhouette silhouette(const Matrix& coords, std::span<const int> assignment);

struct KSelection {
  int k_best = 0;
  std::map<int, double> mean_silhouette_by_k;
};

/// Mean silhouette for every k in [2, n-1]; ties go to the smaller k.
KSelection select_k(const Matrix& coords, const ClusterTree& tree);

}  // namespace drel::cluster
