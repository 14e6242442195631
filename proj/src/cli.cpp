#include "drel/cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "drel/data.hpp"
#include "drel/error.hpp"
#include "drel/ordinal.hpp"
#include "drel/simulate.hpp"

namespace drel::cli {

namespace fs = std::filesystem;
using io::Json;

embed::AssemblyConfig PipelineConfig::assembly() const {
  embed::AssemblyConfig a;
  a.weight_by_confidence = weighted;
  a.include_context = include_context;
  a.pca_dims = pca_dims;
  return a;
}

manifold::UmapConfig PipelineConfig::umap_config() const {
  auto u = umap;
  u.seed = seed;
  return u;
}

Json to_json(const PipelineConfig& cfg) {
  Json j;
  j["input"] = cfg.input;
  j["weighted"] = cfg.weighted;
  j["include_context"] = cfg.include_context;
  j["variant"] = cfg.assembly().variant_name();
  j["pca_dims"] = cfg.pca_dims;
  j["umap"] = {{"n_neighbors", cfg.umap.n_neighbors},
               {"min_dist", cfg.umap.min_dist},
               {"spread", cfg.umap.spread},
               {"epochs", cfg.umap.epochs},
               {"negative_samples", cfg.umap.negative_samples},
               {"init", cfg.umap.init == manifold::Init::Spectral ? "spectral" : "random"}};
  j["linkage"] = std::string(cluster::to_string(cfg.linkage));
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

PipelineConfig apply_json(PipelineConfig c, const Json& j) {
  if (!j.is_object()) throw Error("cli", "config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "input") {
        c.input = v.get<std::string>();
      } else if (key == "weighted") {
        c.weighted = v.get<bool>();
      } else if (key == "include_context") {
        c.include_context = v.get<bool>();
      } else if (key == "pca_dims") {
        c.pca_dims = v.get<int>();
      } else if (key == "linkage") {
        c.linkage = cluster::parse_linkage(v.get<std::string>());
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "output_dir") {
        c.output_dir = v.get<std::string>();
      } else if (key == "variant") {
        // derived from weighted/include_context; accepted for round trips
      } else if (key == "umap") {
        for (const auto& [uk, uv] : v.items()) {
          if (uk == "n_neighbors") {
            c.umap.n_neighbors = uv.get<int>();
          } else if (uk == "min_dist") {
            c.umap.min_dist = uv.get<double>();
          } else if (uk == "spread") {
            c.umap.spread = uv.get<double>();
          } else if (uk == "epochs") {
            c.umap.epochs = uv.get<int>();
          } else if (uk == "negative_samples") {
            c.umap.negative_samples = uv.get<int>();
          } else if (uk == "init") {
            const auto s = uv.get<std::string>();
            if (s != "spectral" && s != "random") throw Error("cli", "umap.init must be spectral or random");
            c.umap.init = s == "spectral" ? manifold::Init::Spectral : manifold::Init::Random;
          } else {
            throw Error("cli", "unknown config key 'umap." + uk + "'");
          }
        }
      } else {
        throw Error("cli", "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("cli", std::string("bad config value: ") + e.what());
  }
  return c;
}

PipelineResult run_pipeline(const Dataset& ds, const PipelineConfig& cfg) {
  PipelineResult r;
  r.cooccurrence = embed::assemble(ds, cfg.assembly());
  r.embeddings = embed::factorize(r.cooccurrence, cfg.pca_dims);
  const auto rows = embed::relation_rows(r.embeddings);
  r.projection = manifold::project(rows.rows, cfg.umap_config(), rows.names);
  r.tree = cluster::agglomerate(r.projection.coords, cfg.linkage, rows.names);
  r.selection = cluster::select_k(r.projection.coords, r.tree);
  r.clusters = cluster::cut(r.tree, r.selection.k_best);
  return r;
}

namespace {

// Usage problems detected after CLI11 has parsed the command line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pipeline flags shared by several subcommands. A flag overrides the config
// file only when it was given on the command line.
struct PipelineFlags {
  std::string config_path;
  std::string input;
  bool weighted = true;
  bool include_context = true;
  int pca_dims = 10;
  int n_neighbors = 5;
  double min_dist = 0.1;
  double spread = 1.0;
  int epochs = 500;
  int negative_samples = 5;
  std::string init = "spectral";
  std::string linkage = "average";
  std::uint64_t seed = 42;
  std::string output_dir = "out";

  CLI::Option* o_input = nullptr;
  CLI::Option* o_weighted = nullptr;
  CLI::Option* o_context = nullptr;
  CLI::Option* o_pca = nullptr;
  CLI::Option* o_nn = nullptr;
  CLI::Option* o_min_dist = nullptr;
  CLI::Option* o_spread = nullptr;
  CLI::Option* o_epochs = nullptr;
  CLI::Option* o_neg = nullptr;
  CLI::Option* o_init = nullptr;
  CLI::Option* o_linkage = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_out = nullptr;

  void add_common(CLI::App* app, bool input_positional = true) {
    app->add_option("--config", config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
    if (input_positional) {
      o_input = app->add_option("input", input, "annotation corpus (.jsonl or .csv)")->check(CLI::ExistingFile);
    }
    o_out = app->add_option("-o,--out-dir", output_dir, "output directory");
  }
  void add_embedding(CLI::App* app) {
    o_weighted = app->add_flag("--weighted,!--no-weight", weighted, "weight rows by confidence (default on)");
    o_context = app->add_flag("--include-context,!--no-context", include_context,
                              "append context-kind indicators (default on)");
    o_pca = app->add_option("--pca-dims", pca_dims, "embedding dimensions");
  }
  void add_umap(CLI::App* app) {
    o_nn = app->add_option("--n-neighbors", n_neighbors);
    o_min_dist = app->add_option("--min-dist", min_dist);
    o_spread = app->add_option("--spread", spread);
    o_epochs = app->add_option("--epochs", epochs);
    o_neg = app->add_option("--negative-samples", negative_samples);
    o_init = app->add_option("--init", init)->check(CLI::IsMember({"spectral", "random"}));
  }
  void add_linkage(CLI::App* app) {
    o_linkage = app->add_option("--linkage", linkage)->check(CLI::IsMember({"single", "complete", "average"}));
  }
  void add_seed(CLI::App* app, bool required) {
    o_seed = app->add_option("--seed", seed, "random seed");
    if (required) o_seed->required();
  }

  static bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config_path.empty()) {
      Json j;
      try {
        j = Json::parse(io::read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw Error("cli", "config file is not valid JSON: " + std::string(e.what()));
      }
      c = apply_json(c, j);
    }
    if (given(o_input)) c.input = fs::path(input).generic_string();
    if (given(o_weighted)) c.weighted = weighted;
    if (given(o_context)) c.include_context = include_context;
    if (given(o_pca)) c.pca_dims = pca_dims;
    if (given(o_nn)) c.umap.n_neighbors = n_neighbors;
    if (given(o_min_dist)) c.umap.min_dist = min_dist;
    if (given(o_spread)) c.umap.spread = spread;
    if (given(o_epochs)) c.umap.epochs = epochs;
    if (given(o_neg)) c.umap.negative_samples = negative_samples;
    if (given(o_init)) c.umap.init = init == "spectral" ? manifold::Init::Spectral : manifold::Init::Random;
    if (given(o_linkage)) c.linkage = cluster::parse_linkage(linkage);
    if (given(o_seed)) c.seed = seed;
    if (given(o_out)) c.output_dir = output_dir;
    if (c.input.empty() && o_input != nullptr) throw UsageError("no input corpus given");
    return c;
  }
};

void write(const PipelineConfig& c, const std::string& name, const std::string& text, std::ostream& out) {
  const auto path = fs::path(c.output_dir) / name;
  io::write_file(path, text);
  out << "wrote " << path.generic_string() << '\n';
}

// --- subcommand bodies ------------------------------------------------------

int do_validate(const std::string& input, std::ostream& out) {
  const Dataset ds = parse_dataset(input);
  std::size_t multi = 0;
  for (const auto& r : ds.records()) multi += r.labels.size() > 1 ? 1 : 0;
  out << fmt::format("valid: {} records, {} label tokens, {} multi-label records\n", ds.size(),
                     ds.total_label_tokens(), multi);
  out << fmt::format("annotators {}, teams {}, conversations {}, DU pairs {}\n", ds.by_annotator().levels.size(),
                     ds.by_team().levels.size(), ds.by_conversation().levels.size(),
                     ds.by_du_pair().levels.size());
  return 0;
}

void do_stats(const Dataset& ds, const PipelineConfig& c, const Json& cfg_json, std::ostream& out) {
  const auto counts = label_frequencies(ds);
  const auto text = io::counts_csv(counts, ds.total_label_tokens(), cfg_json);
  write(c, "counts.csv", text, out);
  write(c, "confidence_table.csv", io::confidence_csv(confidence_table(ds), cfg_json), out);
  // Table body without the provenance line.
  out << text.substr(text.find('\n') + 1);
}

void write_embed(const PipelineResult& r, const PipelineConfig& c, const Json& j, std::ostream& out) {
  write(c, "cooccurrence.csv", io::cooccurrence_csv(r.cooccurrence, j), out);
  write(c, "cooccurrence.json", io::cooccurrence_json(r.cooccurrence, j), out);
  write(c, "embeddings.csv", io::embeddings_csv(r.embeddings, j), out);
  write(c, "embeddings.json", io::embeddings_json(r.embeddings, j), out);
}

void write_projection(const manifold::Projection& p, std::span<const int> clusters, const PipelineConfig& c,
                      const Json& j, std::ostream& out) {
  write(c, "coords.csv", io::coords_csv(p, j), out);
  write(c, "coords.json", io::coords_json(p, j), out);
  write(c, "scatter.svg", io::scatter_svg(p, clusters, j), out);
  for (const auto& w : p.warnings) out << "warning: " << w << '\n';
}

void write_clustering(const cluster::ClusterTree& tree, const cluster::KSelection& sel,
                      std::span<const int> clusters, const std::string& variant, const PipelineConfig& c,
                      const Json& j, std::ostream& out) {
  write(c, "dendrogram.json", io::dendrogram_json(tree, j), out);
  write(c, "dendrogram.dot", io::dendrogram_dot(tree, j), out);
  write(c, "dendrogram.svg", io::dendrogram_svg(tree, clusters, j), out);
  write(c, "dendrogram.txt", io::dendrogram_text(tree), out);
  write(c, "kselect.json", io::kselect_json(sel, variant, j), out);
  write(c, "clusters.csv", io::clusters_csv(tree.leaves, clusters, j), out);
  out << fmt::format("k_best = {} (mean silhouette {:.4f})\n", sel.k_best,
                     sel.mean_silhouette_by_k.at(sel.k_best));
}

// Reads name,x,y rows as written by `project`; '#' lines are skipped.
manifold::Projection read_coords(const std::string& path) {
  manifold::Projection p;
  std::istringstream in(io::read_file(path));
  std::string line;
  std::vector<std::array<double, 2>> pts;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      if (line != "name,x,y") throw ValidationError("cli", fmt::format("{}: expected header name,x,y", path));
      header = false;
      continue;
    }
    const auto c2 = line.rfind(',');
    const auto c1 = c2 == std::string::npos ? std::string::npos : line.rfind(',', c2 - 1);
    if (c1 == std::string::npos) throw ValidationError("cli", fmt::format("{}: line {}: expected 3 fields", path, lineno));
    std::string name = line.substr(0, c1);
    if (name.size() >= 2 && name.front() == '"' && name.back() == '"') {
      std::string un;
      for (std::size_t i = 1; i + 1 < name.size(); ++i) {
        if (name[i] == '"' && name[i + 1] == '"') ++i;
        un += name[i];
      }
      name = un;
    }
    try {
      pts.push_back({std::stod(line.substr(c1 + 1, c2 - c1 - 1)), std::stod(line.substr(c2 + 1))});
    } catch (const std::exception&) {
      throw ValidationError("cli", fmt::format("{}: line {}: bad coordinate", path, lineno));
    }
    p.names.push_back(std::move(name));
  }
  p.coords.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    p.coords(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    p.coords(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  return p;
}

struct FitFlags {
  std::string formula;
  std::string method = "laplace";
  int nodes = 7;
  bool correlated = false;
  bool no_se = false;
};

ordinal::Method parse_method(const std::string& s) {
  if (s == "exact") return ordinal::Method::Exact;
  if (s == "aghq") return ordinal::Method::Aghq;
  return ordinal::Method::Laplace;
}

ordinal::OrdinalFit fit_formula(const Dataset& ds, const std::string& formula, const FitFlags& f) {
  const auto prob = ordinal::problem_from_formula(ds, formula, f.correlated);
  if (prob.random.empty()) return ordinal::clm_fit(prob);
  ordinal::Method m = parse_method(f.method);
  if (m == ordinal::Method::Exact) {
    throw UsageError("formula has random terms; use --method laplace or aghq");
  }
  ordinal::ClmmOptions opts;
  opts.quadrature_nodes = f.nodes;
  opts.compute_standard_errors = !f.no_se;
  return ordinal::clmm_fit(prob, m, opts);
}

Json fit_config(const std::string& input, const std::string& formula, const FitFlags& f) {
  return {{"input", input}, {"formula", formula},   {"method", f.method},
          {"nodes", f.nodes}, {"correlated", f.correlated}};
}

void add_fit_flags(CLI::App* app, FitFlags& f) {
  app->add_option("--method", f.method, "exact (no random terms), laplace or aghq")
      ->check(CLI::IsMember({"exact", "laplace", "aghq"}));
  app->add_option("--nodes", f.nodes, "quadrature nodes for aghq")->check(CLI::Range(1, 50));
  app->add_flag("--correlated", f.correlated, "correlated random intercepts and slopes for '|' terms");
  app->add_flag("--no-se", f.no_se, "skip standard errors of mixed models");
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discourse-relation annotation analysis", "drel"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // validate
  std::string validate_input;
  auto* validate = app.add_subcommand("validate", "check a corpus against the record schema");
  validate->add_option("input", validate_input)->required()->check(CLI::ExistingFile);

  // stats / embed / project / pipeline share the pipeline flags
  PipelineFlags stats_f, embed_f, project_f, pipe_f, cluster_f;
  auto* stats = app.add_subcommand("stats", "label counts and mean-confidence table");
  stats_f.add_common(stats);

  auto* embedc = app.add_subcommand("embed", "co-occurrence matrix and embeddings");
  embed_f.add_common(embedc);
  embed_f.add_embedding(embedc);

  auto* project = app.add_subcommand("project", "2-D projection of the relation embeddings");
  project_f.add_common(project);
  project_f.add_embedding(project);
  project_f.add_umap(project);
  project_f.add_seed(project, true);

  std::string coords_path;
  int forced_k = 0;
  auto* clusterc = app.add_subcommand("cluster", "hierarchical clustering of projected coordinates");
  clusterc->add_option("coords", coords_path, "coords.csv written by 'project'")->required()->check(CLI::ExistingFile);
  cluster_f.add_common(clusterc, false);
  cluster_f.add_linkage(clusterc);
  clusterc->add_option("--k", forced_k, "cut at this k instead of the silhouette choice")->check(CLI::PositiveNumber);

  auto* pipeline = app.add_subcommand("pipeline", "stats, embed, project and cluster in one run");
  pipe_f.add_common(pipeline);
  pipe_f.add_embedding(pipeline);
  pipe_f.add_umap(pipeline);
  pipe_f.add_linkage(pipeline);
  pipe_f.add_seed(pipeline, false);

  // fit
  std::string fit_input, fit_out;
  FitFlags fit_f;
  auto* fit = app.add_subcommand("fit", "cumulative link (mixed) model for confidence");
  fit->add_option("input", fit_input)->required()->check(CLI::ExistingFile);
  fit->add_option("--formula", fit_f.formula, "e.g. \"confidence ~ kind + (1 | annotator)\"")->required();
  fit->add_option("-o,--out", fit_out, "fit JSON path");
  add_fit_flags(fit, fit_f);

  // lrt
  std::string lrt_input, null_formula, full_formula, null_fit_path, full_fit_path;
  FitFlags lrt_f;
  auto* lrtc = app.add_subcommand("lrt", "likelihood-ratio test between nested fits");
  auto* o_lrt_input = lrtc->add_option("input", lrt_input, "corpus, when fitting from formulas")
                          ->check(CLI::ExistingFile);
  auto* o_nf = lrtc->add_option("--null-formula", null_formula);
  auto* o_ff = lrtc->add_option("--full-formula", full_formula);
  auto* o_nj = lrtc->add_option("--null-fit", null_fit_path, "fit JSON of the null model")->check(CLI::ExistingFile);
  auto* o_fj = lrtc->add_option("--full-fit", full_fit_path, "fit JSON of the full model")->check(CLI::ExistingFile);
  o_nf->needs(o_ff)->needs(o_lrt_input)->excludes(o_nj);
  o_ff->needs(o_nf);
  o_nj->needs(o_fj)->excludes(o_ff);
  o_fj->needs(o_nj);
  add_fit_flags(lrtc, lrt_f);

  // simulate
  std::uint64_t sim_seed = 0;
  std::string sim_config, sim_out, sim_truth, sim_preset = "default";
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic corpus with known ground truth");
  simulate->add_option("--seed", sim_seed)->required();
  simulate->add_option("--config", sim_config, "simulator config JSON")->check(CLI::ExistingFile);
  simulate->add_option("--preset", sim_preset, "default or two-group")
      ->check(CLI::IsMember({"default", "two-group"}));
  simulate->add_option("-o,--out", sim_out, "corpus path (.jsonl or .csv)")->required();
  simulate->add_option("--truth", sim_truth, "ground-truth JSON path (default: <out>.truth.json)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (validate->parsed()) return do_validate(validate_input, out);

    if (stats->parsed()) {
      const auto c = stats_f.resolve();
      Json j = {{"input", c.input}, {"output_dir", c.output_dir}};
      do_stats(parse_dataset(c.input), c, j, out);
      return 0;
    }

    if (embedc->parsed()) {
      const auto c = embed_f.resolve();
      const Dataset ds = parse_dataset(c.input);
      PipelineResult r;
      r.cooccurrence = embed::assemble(ds, c.assembly());
      r.embeddings = embed::factorize(r.cooccurrence, c.pca_dims);
      const Json j = {{"input", c.input},
                      {"weighted", c.weighted},
                      {"include_context", c.include_context},
                      {"variant", c.assembly().variant_name()},
                      {"pca_dims", c.pca_dims},
                      {"output_dir", c.output_dir}};
      write_embed(r, c, j, out);
      return 0;
    }

    if (project->parsed()) {
      const auto c = project_f.resolve();
      const Dataset ds = parse_dataset(c.input);
      const auto co = embed::assemble(ds, c.assembly());
      const auto rows = embed::relation_rows(embed::factorize(co, c.pca_dims));
      const auto p = manifold::project(rows.rows, c.umap_config(), rows.names);
      Json j = to_json(c);
      j.erase("linkage");
      write_projection(p, {}, c, j, out);
      return 0;
    }

    if (clusterc->parsed()) {
      auto c = cluster_f.resolve();
      const auto p = read_coords(coords_path);
      const auto tree = cluster::agglomerate(p.coords, c.linkage, p.names);
      const auto sel = cluster::select_k(p.coords, tree);
      const int k = forced_k > 0 ? forced_k : sel.k_best;
      const auto assignment = cluster::cut(tree, k);
      const Json j = {{"coords", fs::path(coords_path).generic_string()},
                      {"linkage", std::string(cluster::to_string(c.linkage))},
                      {"k", k},
                      {"output_dir", c.output_dir}};
      write_clustering(tree, sel, assignment, "", c, j, out);
      return 0;
    }

    if (pipeline->parsed()) {
      const auto c = pipe_f.resolve();
      const Dataset ds = parse_dataset(c.input);
      const Json j = to_json(c);
      do_stats(ds, c, j, out);
      const auto r = run_pipeline(ds, c);
      write_embed(r, c, j, out);
      write_projection(r.projection, r.clusters, c, j, out);
      write_clustering(r.tree, r.selection, r.clusters, c.assembly().variant_name(), c, j, out);
      return 0;
    }

    if (fit->parsed()) {
      const Dataset ds = parse_dataset(fit_input);
      const auto f = fit_formula(ds, fit_f.formula, fit_f);
      out << ordinal::fit_report(f);
      if (!fit_out.empty()) {
        Json j;
        j["config"] = fit_config(fs::path(fit_input).generic_string(), fit_f.formula, fit_f);
        j["fit"] = io::fit_to_json(f);
        io::write_file(fit_out, j.dump(2) + "\n");
        out << "wrote " << fit_out << '\n';
      }
      return 0;
    }

    if (lrtc->parsed()) {
      ordinal::OrdinalFit null_fit, full_fit;
      if (o_nj->count() > 0) {
        auto load = [](const std::string& path) {
          Json j;
          try {
            j = Json::parse(io::read_file(path));
          } catch (const nlohmann::json::exception& e) {
            throw Error("cli", path + " is not valid JSON: " + e.what());
          }
          return io::fit_from_json(j.contains("fit") ? j["fit"] : j);
        };
        null_fit = load(null_fit_path);
        full_fit = load(full_fit_path);
      } else if (o_nf->count() > 0) {
        const Dataset ds = parse_dataset(lrt_input);
        null_fit = fit_formula(ds, null_formula, lrt_f);
        full_fit = fit_formula(ds, full_formula, lrt_f);
      } else {
        throw UsageError("give either --null-fit/--full-fit or an input with --null-formula/--full-formula");
      }
      const auto res = ordinal::lrt(null_fit, full_fit);
      out << fmt::format("null: {} (loglik {:.4f}, {} parameters)\n", null_fit.formula, null_fit.loglik,
                         null_fit.n_params);
      out << fmt::format("full: {} (loglik {:.4f}, {} parameters)\n", full_fit.formula, full_fit.loglik,
                         full_fit.n_params);
      out << ordinal::format_lrt(res) << '\n';
      if (!null_fit.varcomp.empty() || !full_fit.varcomp.empty()) {
        out << "note: df counts variance parameters naively; tests on the variance boundary are conservative\n";
      }
      return 0;
    }

    if (simulate->parsed()) {
      sim::SimConfig cfg = sim_preset == "two-group" ? sim::two_group_config(sim_seed) : sim::SimConfig{};
      if (!sim_config.empty()) cfg = sim::config_from_json(io::read_file(sim_config));
      cfg.seed = sim_seed;
      const auto s = sim::generate(cfg);
      write_dataset(s.dataset, sim_out, format_from_path(sim_out));
      const std::string truth = sim_truth.empty() ? sim_out + ".truth.json" : sim_truth;
      io::write_file(truth, sim::truth_to_json(cfg, s.truth) + "\n");
      out << fmt::format("wrote {} ({} records) and {}\n", sim_out, s.dataset.size(), truth);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_subcommand(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_subcommand(args, std::cout, std::cerr);
}

}  // namespace drel::cli
