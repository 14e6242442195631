#include "drel/cluster.hpp"

#include <algorithm>
#include <numeric>

#include "drel/error.hpp"
#include "drel/kernels.hpp"

namespace drel::cluster {

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::Single:
      return "single";
    case Linkage::Complete:
      return "complete";
    case Linkage::Average:
      return "average";
  }
  return "average";
}

Linkage parse_linkage(std::string_view s) {
  if (s == "single") return Linkage::Single;
  if (s == "complete") return Linkage::Complete;
  if (s == "average") return Linkage::Average;
  throw Error("cluster", "unknown linkage '" + std::string(s) + "'");
}

std::vector<std::size_t> ClusterTree::leaf_order() const {
  const std::size_t n = leaves.size();
  std::vector<std::size_t> order;
  if (n == 0) return order;
  if (merges.empty()) return {0};
  std::vector<std::size_t> stack{n + merges.size() - 1};
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node < n) {
      order.push_back(node);
    } else {
      const auto& m = merges[node - n];
      stack.push_back(m.right);
      stack.push_back(m.left);
    }
  }
  return order;
}

ClusterTree agglomerate(const Matrix& coords, Linkage linkage, std::vector<std::string> names) {
  const auto n = static_cast<std::size_t>(coords.rows());
  if (n < 2) throw Error("cluster", "need at least 2 points, got " + std::to_string(n));
  if (!coords.allFinite()) throw Error("cluster", "coordinates have non-finite entries");
  ClusterTree tree;
  tree.linkage = linkage;
  tree.leaves = std::move(names);
  if (tree.leaves.empty()) {
    for (std::size_t i = 0; i < n; ++i) tree.leaves.push_back(std::to_string(i));
  }
  if (tree.leaves.size() != n) throw Error("cluster", "names length does not match point count");

  Matrix d = kernels::omp::pairwise_distances(coords);
  // Slot i holds the cluster whose smallest leaf is i.
  std::vector<char> active(n, 1);
  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), 0);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(size[bi]), nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      double v = 0.0;
      switch (linkage) {
        case Linkage::Single:
          v = std::min(d(k, bi), d(k, bj));
          break;
        case Linkage::Complete:
          v = std::max(d(k, bi), d(k, bj));
          break;
        case Linkage::Average:
          v = (ni * d(k, bi) + nj * d(k, bj)) / (ni + nj);
          break;
      }
      d(k, bi) = d(bi, k) = v;
    }
    Merge m;
    m.left = std::min(node[bi], node[bj]);
    m.right = std::max(node[bi], node[bj]);
    m.height = best;
    m.size = size[bi] + size[bj];
    tree.merges.push_back(m);
    node[bi] = n + step;
    size[bi] = m.size;
    active[bj] = 0;
  }
  return tree;
}

std::vector<int> cut(const ClusterTree& tree, int k) {
  const std::size_t n = tree.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error("cluster", "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  // Union-find over the first n - k merges.
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const std::size_t keep = n - static_cast<std::size_t>(k);
  for (std::size_t s = 0; s < keep; ++s) {
    const auto& m = tree.merges[s];
    parent[find(m.left)] = n + s;
    parent[find(m.right)] = n + s;
  }
  std::vector<int> out(n, -1);
  std::vector<int> id_of_root(2 * n - 1, -1);
  int next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const auto root = find(leaf);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    out[leaf] = id_of_root[root];
  }
  return out;
}

Silhouette silhouette(const Matrix& coords, std::span<const int> assignment) {
  const auto n = static_cast<std::size_t>(coords.rows());
  if (assignment.size() != n) throw Error("cluster", "assignment length does not match point count");
  if (n == 0) throw Error("cluster", "silhouette of an empty point set");
  const int n_clusters = *std::max_element(assignment.begin(), assignment.end()) + 1;
  if (*std::min_element(assignment.begin(), assignment.end()) < 0) {
    throw Error("cluster", "negative cluster id");
  }
  std::vector<std::size_t> count(static_cast<std::size_t>(n_clusters), 0);
  for (int a : assignment) ++count[static_cast<std::size_t>(a)];
  if (n_clusters < 2) throw Error("cluster", "silhouette needs at least 2 clusters");
  for (std::size_t c = 0; c < count.size(); ++c) {
    if (count[c] == 0) throw Error("cluster", "cluster " + std::to_string(c) + " is empty");
  }

  const Matrix d = kernels::omp::pairwise_distances(coords);
  Silhouette out;
  out.per_point.resize(n);
  std::vector<double> sum(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(assignment[i]);
    if (count[own] == 1) {
      out.per_point[i] = 0.0;
      continue;
    }
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) sum[static_cast<std::size_t>(assignment[j])] += d(i, j);
    const double a = sum[own] / static_cast<double>(count[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c) {
      if (c != own) b = std::min(b, sum[c] / static_cast<double>(count[c]));
    }
    const double denom = std::max(a, b);
    out.per_point[i] = denom > 0 ? (b - a) / denom : 0.0;
  }
  out.mean = std::accumulate(out.per_point.begin(), out.per_point.end(), 0.0) / static_cast<double>(n);
  return out;
}

KSelection select_k(const Matrix& coords, const ClusterTree& tree) {
  const auto n = static_cast<int>(tree.size());
  if (n < 3) throw Error("cluster", "select_k needs at least 3 points");
  if (coords.rows() != n) throw Error("cluster", "coordinates do not match the tree");
  KSelection sel;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 2; k <= n - 1; ++k) {
    const auto assign = cut(tree, k);
    const double s = silhouette(coords, assign).mean;
    sel.mean_silhouette_by_k[k] = s;
    if (s > best) {
      best = s;
      sel.k_best = k;
    }
  }
  return sel;
}

}  // namespace drel::cluster
