#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drel/cluster.hpp"
#include "drel/embed.hpp"
#include "drel/export.hpp"
#include "drel/manifold.hpp"

namespace drel::cli {

struct PipelineConfig {
  std::string input;
  bool weighted = true;
  bool include_context = true;
  int pca_dims = 10;
  manifold::UmapConfig umap;  // umap.seed is overwritten by `seed`
  cluster::Linkage linkage = cluster::Linkage::Average;
  std::uint64_t seed = 42;
  std::string output_dir = "out";

  embed::AssemblyConfig assembly() const;
  manifold::UmapConfig umap_config() const;
};

io::Json to_json(const PipelineConfig& cfg);
/// Keys present in `j` replace the corresponding fields of `base`.
PipelineConfig apply_json(PipelineConfig base, const io::Json& j);

struct PipelineResult {
  embed::CooccurrenceResult cooccurrence;
  embed::EmbeddingSet embeddings;
  manifold::Projection projection;  // relation-label rows only
  cluster::ClusterTree tree;
  cluster::KSelection selection;
  std::vector<int> clusters;  // cut at selection.k_best
};

/// assemble -> factorize -> project -> agglomerate -> select_k, no file I/O.
PipelineResult run_pipeline(const Dataset& ds, const PipelineConfig& cfg);

/// Entry point of the `drel` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on invalid input data or a failed computation,
/// 2 on a usage error.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_subcommand(int argc, const char* const* argv);

}  // namespace drel::cli
