#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "drel/cluster.hpp"
#include "drel/data.hpp"
#include "drel/embed.hpp"
#include "drel/manifold.hpp"
#include "drel/ordinal.hpp"

// Text renderings of every artifact the command-line tool writes. Each CSV
// starts with a "# config: {...}" line, each JSON document carries a
// "config" member and each SVG an XML comment holding the resolved config.
// Nothing here reads the clock, so equal inputs give equal bytes.
namespace drel::io {

using Json = nlohmann::ordered_json;

std::string config_comment(const Json& config);

/// Columns label,name,count; sorted by count descending, ties in canonical
/// label order; final row "total".
std::string counts_csv(const LabelCounts& counts, std::size_t total_tokens, const Json& config);

/// Mean confidence per (label, context), with the record count of each cell.
std::string confidence_csv(const ConfidenceTable& table, const Json& config);

std::string cooccurrence_csv(const embed::CooccurrenceResult& co, const Json& config);
std::string cooccurrence_json(const embed::CooccurrenceResult& co, const Json& config);

std::string embeddings_csv(const embed::EmbeddingSet& e, const Json& config);
std::string embeddings_json(const embed::EmbeddingSet& e, const Json& config);

std::string coords_csv(const manifold::Projection& p, const Json& config);
std::string coords_json(const manifold::Projection& p, const Json& config);

/// Scatter plot of a 2-D layout; points are coloured by `clusters` if given.
std::string scatter_svg(const manifold::Projection& p, std::span<const int> clusters, const Json& config);

std::string dendrogram_json(const cluster::ClusterTree& t, const Json& config);
std::string dendrogram_dot(const cluster::ClusterTree& t, const Json& config);
/// Subtrees whose leaves share a cluster in `clusters` are drawn in that
/// cluster's colour.
std::string dendrogram_svg(const cluster::ClusterTree& t, std::span<const int> clusters, const Json& config);
/// Indented plain-text tree, one node per line.
std::string dendrogram_text(const cluster::ClusterTree& t);

std::string kselect_json(const cluster::KSelection& sel, const std::string& variant, const Json& config);
std::string clusters_csv(const std::vector<std::string>& names, std::span<const int> assignment,
                         const Json& config);

Json fit_to_json(const ordinal::OrdinalFit& fit);
/// Inverse of fit_to_json; throws Error("cli", ...) on malformed input.
ordinal::OrdinalFit fit_from_json(const Json& j);

std::string read_file(const std::filesystem::path& p);
/// Writes `text`, creating parent directories as needed.
void write_file(const std::filesystem::path& p, const std::string& text);

}  // namespace drel::io
