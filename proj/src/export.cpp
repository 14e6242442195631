#include "drel/export.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "drel/error.hpp"

namespace drel::io {

namespace {

// Shortest representation that round-trips.
std::string num(double v) { return fmt::format("{}", v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string svg_comment(const Json& config) {
  std::string s = config.dump();
  for (std::size_t pos; (pos = s.find("--")) != std::string::npos;) s.replace(pos, 2, "- -");
  return "<!-- config: " + s + " -->\n";
}

Json matrix_json(const linalg::Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const linalg::Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      out.push_back(v[i]);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

linalg::Vector vector_from_json(const Json& j) {
  linalg::Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
  }
  return v;
}

constexpr std::array<const char*, 8> kPalette = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                                 "#66a61e", "#e6ab02", "#a6761d", "#666666"};

}  // namespace

std::string config_comment(const Json& config) { return "# config: " + config.dump() + "\n"; }

std::string counts_csv(const LabelCounts& counts, std::size_t total_tokens, const Json& config) {
  std::vector<std::size_t> order(kNumLabels);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
  std::string out = config_comment(config) + "label,name,count\n";
  for (auto i : order) {
    out += fmt::format("{},{},{}\n", token(kAllLabels[i]), csv_field(std::string(display_name(kAllLabels[i]))),
                       counts[i]);
  }
  out += fmt::format("total,Total,{}\n", total_tokens);
  return out;
}

std::string confidence_csv(const ConfidenceTable& table, const Json& config) {
  std::string out = config_comment(config) + "label,name";
  for (auto c : kAllContexts) out += fmt::format(",{}", token(c));
  for (auto c : kAllContexts) out += fmt::format(",n_{}", token(c));
  out += '\n';
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    out += fmt::format("{},{}", token(kAllLabels[i]), csv_field(std::string(display_name(kAllLabels[i]))));
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      out += table[i][c] ? fmt::format(",{:.4f}", table[i][c]->mean) : std::string(",");
    }
    for (std::size_t c = 0; c < kNumContexts; ++c) {
      out += fmt::format(",{}", table[i][c] ? table[i][c]->count : 0);
    }
    out += '\n';
  }
  return out;
}

std::string cooccurrence_csv(const embed::CooccurrenceResult& co, const Json& config) {
  std::string out = config_comment(config) + "feature";
  for (const auto& n : co.feature_names) out += "," + n;
  out += '\n';
  for (Eigen::Index i = 0; i < co.cooccurrence.rows(); ++i) {
    out += co.feature_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < co.cooccurrence.cols(); ++j) out += fmt::format(",{}", co.cooccurrence(i, j));
    out += '\n';
  }
  return out;
}

std::string cooccurrence_json(const embed::CooccurrenceResult& co, const Json& config) {
  Json j;
  j["config"] = config;
  j["variant"] = co.config.variant_name();
  j["features"] = co.feature_names;
  j["n_records"] = co.annotation.rows();
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < co.cooccurrence.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < co.cooccurrence.cols(); ++k) row.push_back(co.cooccurrence(i, k));
    rows.push_back(std::move(row));
  }
  j["cooccurrence"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::string embeddings_csv(const embed::EmbeddingSet& e, const Json& config) {
  std::string out = config_comment(config) + "feature";
  for (Eigen::Index k = 0; k < e.vectors.cols(); ++k) out += fmt::format(",dim{}", k + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < e.vectors.rows(); ++i) {
    out += e.feature_names[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < e.vectors.cols(); ++k) out += "," + num(e.vectors(i, k));
    out += '\n';
  }
  return out;
}

std::string embeddings_json(const embed::EmbeddingSet& e, const Json& config) {
  Json j;
  j["config"] = config;
  j["features"] = e.feature_names;
  j["eigenvalues"] = vector_json(e.eigenvalues);
  j["vectors"] = matrix_json(e.vectors);
  return j.dump(2) + "\n";
}

std::string coords_csv(const manifold::Projection& p, const Json& config) {
  std::string out = config_comment(config) + "name,x,y\n";
  for (Eigen::Index i = 0; i < p.coords.rows(); ++i) {
    out += fmt::format("{},{},{}\n", csv_field(p.names[static_cast<std::size_t>(i)]), num(p.coords(i, 0)),
                       num(p.coords(i, 1)));
  }
  return out;
}

std::string coords_json(const manifold::Projection& p, const Json& config) {
  Json j;
  j["config"] = config;
  j["n_neighbors_used"] = p.n_neighbors_used;
  j["init"] = p.spectral_init_used ? "spectral" : "random";
  j["warnings"] = p.warnings;
  Json pts = Json::array();
  for (Eigen::Index i = 0; i < p.coords.rows(); ++i) {
    pts.push_back({{"name", p.names[static_cast<std::size_t>(i)]}, {"x", p.coords(i, 0)}, {"y", p.coords(i, 1)}});
  }
  j["points"] = std::move(pts);
  return j.dump(2) + "\n";
}

std::string scatter_svg(const manifold::Projection& p, std::span<const int> clusters, const Json& config) {
  constexpr double size = 600.0, margin = 60.0;
  const auto n = p.coords.rows();
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (n > 0) {
    xmin = p.coords.col(0).minCoeff();
    xmax = p.coords.col(0).maxCoeff();
    ymin = p.coords.col(1).minCoeff();
    ymax = p.coords.col(1).maxCoeff();
  }
  const double xr = xmax > xmin ? xmax - xmin : 1.0;
  const double yr = ymax > ymin ? ymax - ymin : 1.0;
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n", size);
  out += svg_comment(config);
  out += fmt::format("<rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n", size);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = margin + (p.coords(i, 0) - xmin) / xr * (size - 2 * margin);
    const double y = size - margin - (p.coords(i, 1) - ymin) / yr * (size - 2 * margin);
    const auto ui = static_cast<std::size_t>(i);
    const char* colour = ui < clusters.size() ? kPalette[static_cast<std::size_t>(clusters[ui]) % kPalette.size()]
                                              : "#333333";
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"5\" fill=\"{}\"/>\n", x, y, colour);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                       x + 7, y - 7, xml_escape(p.names[ui]));
  }
  out += "</svg>\n";
  return out;
}

std::string dendrogram_json(const cluster::ClusterTree& t, const Json& config) {
  Json j;
  j["config"] = config;
  j["linkage"] = std::string(cluster::to_string(t.linkage));
  j["leaves"] = t.leaves;
  j["leaf_order"] = t.leaf_order();
  Json merges = Json::array();
  for (std::size_t s = 0; s < t.merges.size(); ++s) {
    const auto& m = t.merges[s];
    merges.push_back(
        {{"id", t.size() + s}, {"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  }
  j["merges"] = std::move(merges);
  return j.dump(2) + "\n";
}

std::string dendrogram_dot(const cluster::ClusterTree& t, const Json& config) {
  std::string cfg = config.dump();
  for (std::size_t pos; (pos = cfg.find("*/")) != std::string::npos;) cfg.replace(pos, 2, "* /");
  std::string out = "/* config: " + cfg + " */\ndigraph dendrogram {\n  node [shape=box];\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::string label = t.leaves[i];
    std::string escaped;
    for (char c : label) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    out += fmt::format("  n{} [label=\"{}\"];\n", i, escaped);
  }
  for (std::size_t s = 0; s < t.merges.size(); ++s) {
    const auto id = t.size() + s;
    const auto& m = t.merges[s];
    out += fmt::format("  n{} [shape=point, xlabel=\"{:.4f}\"];\n", id, m.height);
    out += fmt::format("  n{} -> n{};\n  n{} -> n{};\n", id, m.left, id, m.right);
  }
  out += "}\n";
  return out;
}

std::string dendrogram_svg(const cluster::ClusterTree& t, std::span<const int> clusters, const Json& config) {
  const std::size_t n = t.size();
  constexpr double width = 700.0, top = 30.0, plot_h = 360.0, label_h = 160.0, margin = 40.0;
  const double step = n > 1 ? (width - 2 * margin) / static_cast<double>(n - 1) : 0.0;
  double hmax = 0.0;
  for (const auto& m : t.merges) hmax = std::max(hmax, m.height);
  if (hmax <= 0) hmax = 1.0;

  std::vector<double> x(n + t.merges.size()), y(n + t.merges.size(), top + plot_h);
  // Cluster of each node, or -1 when its leaves span several clusters.
  std::vector<int> node_cluster(n + t.merges.size(), -1);
  for (std::size_t i = 0; i < n && i < clusters.size(); ++i) node_cluster[i] = clusters[i];
  for (std::size_t s = 0; s < t.merges.size(); ++s) {
    const auto& m = t.merges[s];
    const int a = node_cluster[m.left], b = node_cluster[m.right];
    node_cluster[n + s] = a == b ? a : -1;
  }
  auto colour = [&](std::size_t node) {
    const int c = node_cluster[node];
    return c < 0 ? "black" : kPalette[static_cast<std::size_t>(c) % kPalette.size()];
  };
  const auto order = t.leaf_order();
  for (std::size_t pos = 0; pos < order.size(); ++pos) x[order[pos]] = margin + step * static_cast<double>(pos);

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n", width,
      top + plot_h + label_h);
  out += svg_comment(config);
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, top + plot_h + label_h);
  for (std::size_t s = 0; s < t.merges.size(); ++s) {
    const auto& m = t.merges[s];
    const auto id = n + s;
    y[id] = top + plot_h * (1.0 - m.height / hmax);
    x[id] = 0.5 * (x[m.left] + x[m.right]);
    out += fmt::format(
        "<polyline points=\"{:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f} {:.2f},{:.2f}\" fill=\"none\" "
        "stroke=\"{}\"/>\n",
        x[m.left], y[m.left], x[m.left], y[id], x[m.right], y[id], x[m.right], y[m.right], colour(id));
  }
  for (std::size_t i = 0; i < n; ++i) {
    out += fmt::format(
        "<text transform=\"translate({:.2f},{:.2f}) rotate(60)\" font-family=\"sans-serif\" "
        "font-size=\"11\" fill=\"{}\">{}</text>\n",
        x[i], top + plot_h + 8, colour(i), xml_escape(t.leaves[i]));
  }
  out += "</svg>\n";
  return out;
}

std::string dendrogram_text(const cluster::ClusterTree& t) {
  const std::size_t n = t.size();
  std::string out;
  if (t.merges.empty()) {
    for (const auto& l : t.leaves) out += l + "\n";
    return out;
  }
  std::vector<std::pair<std::size_t, int>> stack{{n + t.merges.size() - 1, 0}};
  while (!stack.empty()) {
    const auto [node, depth] = stack.back();
    stack.pop_back();
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    if (node < n) {
      out += indent + t.leaves[node] + "\n";
    } else {
      const auto& m = t.merges[node - n];
      out += fmt::format("{}+ {:.4f} ({} leaves)\n", indent, m.height, m.size);
      stack.emplace_back(m.right, depth + 1);
      stack.emplace_back(m.left, depth + 1);
    }
  }
  return out;
}

std::string kselect_json(const cluster::KSelection& sel, const std::string& variant, const Json& config) {
  Json j;
  j["config"] = config;
  j["variant"] = variant;
  j["k_best"] = sel.k_best;
  Json by_k = Json::array();
  for (const auto& [k, s] : sel.mean_silhouette_by_k) by_k.push_back({{"k", k}, {"mean_silhouette", s}});
  j["silhouette"] = std::move(by_k);
  return j.dump(2) + "\n";
}

std::string clusters_csv(const std::vector<std::string>& names, std::span<const int> assignment,
                         const Json& config) {
  std::string out = config_comment(config) + "name,cluster\n";
  for (std::size_t i = 0; i < names.size() && i < assignment.size(); ++i) {
    out += fmt::format("{},{}\n", csv_field(names[i]), assignment[i]);
  }
  return out;
}

Json fit_to_json(const ordinal::OrdinalFit& fit) {
  Json j;
  j["formula"] = fit.formula;
  j["method"] = std::string(ordinal::to_string(fit.method));
  j["quadrature_nodes"] = fit.quadrature_nodes;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["message"] = fit.message;
  j["loglik"] = fit.loglik;
  j["n_params"] = fit.n_params;
  j["n_obs"] = fit.n_obs;
  j["K"] = fit.K;
  j["data_fingerprint"] = fmt::format("{:016x}", fit.data_fingerprint);
  j["thresholds"] = vector_json(fit.thresholds);
  j["threshold_se"] = vector_json(fit.threshold_se);
  Json fixed = Json::array();
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    const double se = k < fit.beta_se.size() ? fit.beta_se[k] : std::numeric_limits<double>::quiet_NaN();
    const double z = fit.beta[k] / se;
    Json e;
    e["name"] = fit.fixed_names[static_cast<std::size_t>(k)];
    e["estimate"] = fit.beta[k];
    e["se"] = std::isfinite(se) ? Json(se) : Json(nullptr);
    e["z"] = std::isfinite(z) ? Json(z) : Json(nullptr);
    e["p"] = std::isfinite(z) ? Json(ordinal::normal_two_sided_p(z)) : Json(nullptr);
    fixed.push_back(std::move(e));
  }
  j["fixed_effects"] = std::move(fixed);
  Json random = Json::array();
  for (const auto& vc : fit.varcomp) {
    random.push_back({{"group", vc.group},
                      {"effects", vc.effects},
                      {"covariance", matrix_json(vc.covariance)},
                      {"boundary", vc.boundary}});
  }
  j["random_effects"] = std::move(random);
  j["random_groups"] = fit.random_groups;
  return j;
}

ordinal::OrdinalFit fit_from_json(const Json& j) {
  ordinal::OrdinalFit fit;
  try {
    fit.formula = j.at("formula").get<std::string>();
    const auto method = j.at("method").get<std::string>();
    if (method == "exact") {
      fit.method = ordinal::Method::Exact;
    } else if (method == "aghq") {
      fit.method = ordinal::Method::Aghq;
    } else if (method == "laplace") {
      fit.method = ordinal::Method::Laplace;
    } else {
      throw Error("cli", "unknown fit method '" + method + "'");
    }
    fit.quadrature_nodes = j.at("quadrature_nodes").get<int>();
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.message = j.at("message").get<std::string>();
    fit.loglik = j.at("loglik").get<double>();
    fit.n_params = j.at("n_params").get<int>();
    fit.n_obs = j.at("n_obs").get<std::size_t>();
    fit.K = j.at("K").get<int>();
    fit.data_fingerprint = std::stoull(j.at("data_fingerprint").get<std::string>(), nullptr, 16);
    fit.thresholds = vector_from_json(j.at("thresholds"));
    fit.threshold_se = vector_from_json(j.at("threshold_se"));
    const auto& fixed = j.at("fixed_effects");
    fit.beta.resize(static_cast<Eigen::Index>(fixed.size()));
    fit.beta_se.resize(static_cast<Eigen::Index>(fixed.size()));
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      fit.fixed_names.push_back(fixed[k].at("name").get<std::string>());
      fit.beta[ki] = fixed[k].at("estimate").get<double>();
      const auto& se = fixed[k].at("se");
      fit.beta_se[ki] = se.is_null() ? std::numeric_limits<double>::quiet_NaN() : se.get<double>();
    }
    for (const auto& r : j.at("random_effects")) {
      ordinal::VarianceComponent vc;
      vc.group = r.at("group").get<std::string>();
      vc.effects = r.at("effects").get<std::vector<std::string>>();
      vc.boundary = r.at("boundary").get<bool>();
      const auto& cov = r.at("covariance");
      const auto q = static_cast<Eigen::Index>(cov.size());
      vc.covariance.resize(q, q);
      for (Eigen::Index a = 0; a < q; ++a) {
        for (Eigen::Index b = 0; b < q; ++b) {
          vc.covariance(a, b) = cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].get<double>();
        }
      }
      fit.varcomp.push_back(std::move(vc));
    }
    fit.random_groups = j.at("random_groups").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("cli", std::string("malformed fit JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error("cli", "malformed fit JSON: bad data_fingerprint");
  }
  return fit;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cli", "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cli", "cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("cli", "failed writing '" + p.string() + "'");
}

}  // namespace drel::io
