#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "drel/cli.hpp"
#include "drel/export.hpp"
#include "drel/simulate.hpp"

namespace fs = std::filesystem;
using namespace drel;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_subcommand(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("drel_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string simulate(const std::string& preset = "two-group", int seed = 3) {
    const auto corpus = path("corpus.jsonl");
    const auto r = run({"simulate", "--seed", std::to_string(seed), "--preset", preset, "-o", corpus});
    EXPECT_EQ(r.code, 0) << r.err;
    return corpus;
  }

  fs::path dir_;
};

std::string fixture() { return (fs::path(DREL_DATA_DIR) / "label_counts_fixture.jsonl").string(); }

}  // namespace

TEST_F(Cli, ValidateReportsCounts) {
  const auto r = run({"validate", fixture()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2470 records, 3681 label tokens"), std::string::npos) << r.out;
}

TEST_F(Cli, ValidationFailureExitsOne) {
  io::write_file(path("bad.jsonl"), "{\"record_id\": 1}\n");
  const auto r = run({"validate", path("bad.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("validation failed"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"stats", fixture(), "--bogus"}).code, 2);
  EXPECT_EQ(run({"stats", path("missing.jsonl")}).code, 2);
  EXPECT_EQ(run({"project", fixture(), "-o", path("p")}).code, 2);  // --seed is mandatory
  EXPECT_EQ(run({"simulate", "-o", path("x.jsonl")}).code, 2);
  EXPECT_EQ(run({"lrt", fixture()}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, StatsReproducesFixtureCounts) {
  const auto r = run({"stats", fixture(), "-o", path("s")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = io::read_file(path("s/counts.csv"));
  EXPECT_EQ(csv.substr(0, 10), "# config: ");
  const auto body = csv.substr(csv.find('\n') + 1);
  EXPECT_EQ(body,
            "label,name,count\n"
            "elaboration,Elaboration,636\n"
            "continuation,Continuation,554\n"
            "acknowledgement,Acknowledgement,494\n"
            "explanation,Explanation,383\n"
            "comment,Comment,265\n"
            "background,Background,252\n"
            "narration,Narration,249\n"
            "question_answer_pair,Question-Answer Pair,248\n"
            "contrast,Contrast,191\n"
            "clarification_question,Clarification Question,179\n"
            "result,Result,124\n"
            "other,Other,106\n"
            "total,Total,3681\n");
  EXPECT_TRUE(fs::exists(path("s/confidence_table.csv")));
}

TEST_F(Cli, PipelineWritesEverythingAndIsByteStable) {
  const auto corpus = simulate();
  const auto a = run({"pipeline", corpus, "-o", path("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run({"pipeline", corpus, "-o", path("b")});
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"counts.csv", "confidence_table.csv", "cooccurrence.csv", "cooccurrence.json",
                        "embeddings.csv", "embeddings.json", "coords.csv", "coords.json", "scatter.svg",
                        "dendrogram.json", "dendrogram.dot", "dendrogram.svg", "dendrogram.txt", "kselect.json",
                        "clusters.csv"}) {
    ASSERT_TRUE(fs::exists(path(std::string("a/") + f))) << f;
    const auto ta = io::read_file(path(std::string("a/") + f));
    auto tb = io::read_file(path(std::string("b/") + f));
    // The output directory is part of the echoed config.
    for (auto pos = tb.find(path("b")); pos != std::string::npos; pos = tb.find(path("b"), pos + 1)) {
      tb.replace(pos, path("b").size(), path("a"));
    }
    EXPECT_EQ(ta, tb) << f;
  }
  const auto k = nlohmann::json::parse(io::read_file(path("a/kselect.json")));
  EXPECT_EQ(k["k_best"].get<int>(), 2);
  EXPECT_EQ(k["variant"].get<std::string>(), "weighted");
  EXPECT_TRUE(k["config"].contains("seed"));
}

TEST_F(Cli, UnweightedVariant) {
  const auto corpus = simulate("default");
  const auto r = run({"pipeline", corpus, "--no-weight", "--no-context", "-o", path("u")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto k = nlohmann::json::parse(io::read_file(path("u/kselect.json")));
  EXPECT_EQ(k["variant"].get<std::string>(), "unweighted");
  EXPECT_FALSE(k["config"]["weighted"].get<bool>());
  const auto co = nlohmann::json::parse(io::read_file(path("u/cooccurrence.json")));
  EXPECT_EQ(co["features"].size(), 12u);
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  const auto corpus = simulate("default");
  io::write_file(path("cfg.json"), R"({"pca_dims": 4, "seed": 9, "linkage": "complete"})");
  const auto r = run({"pipeline", corpus, "--config", path("cfg.json"), "--seed", "5", "-o", path("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_file(path("o/kselect.json")))["config"];
  EXPECT_EQ(j["pca_dims"].get<int>(), 4);
  EXPECT_EQ(j["seed"].get<int>(), 5);
  EXPECT_EQ(j["linkage"].get<std::string>(), "complete");

  io::write_file(path("bad.json"), R"({"pca_dim": 4})");
  EXPECT_EQ(run({"pipeline", corpus, "--config", path("bad.json"), "-o", path("o2")}).code, 1);
}

TEST_F(Cli, StepwiseCommandsChain) {
  const auto corpus = simulate();
  ASSERT_EQ(run({"embed", corpus, "-o", path("e")}).code, 0);
  EXPECT_TRUE(fs::exists(path("e/embeddings.csv")));
  ASSERT_EQ(run({"project", corpus, "--seed", "7", "-o", path("p")}).code, 0);
  const auto r = run({"cluster", path("p/coords.csv"), "--k", "3", "-o", path("c")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto d = nlohmann::json::parse(io::read_file(path("c/dendrogram.json")));
  EXPECT_EQ(d["merges"].size(), 11u);
  const auto clusters = io::read_file(path("c/clusters.csv"));
  EXPECT_NE(clusters.find(",2\n"), std::string::npos);
}

TEST_F(Cli, FitAndLrtFromFiles) {
  const auto corpus = simulate("default");
  ASSERT_EQ(run({"fit", corpus, "--formula", "confidence ~ 1", "-o", path("null.json")}).code, 0);
  const auto full = run({"fit", corpus, "--formula", "confidence ~ kind", "-o", path("full.json")});
  ASSERT_EQ(full.code, 0) << full.err;
  EXPECT_NE(full.out.find("kind[cross_speaker]"), std::string::npos);

  const auto r = run({"lrt", "--null-fit", path("null.json"), "--full-fit", path("full.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("χ²(2) = "), std::string::npos) << r.out;

  const auto direct = run({"lrt", corpus, "--null-formula", "confidence ~ 1", "--full-formula", "confidence ~ kind"});
  ASSERT_EQ(direct.code, 0) << direct.err;
  EXPECT_EQ(direct.out.substr(direct.out.find("χ²")), r.out.substr(r.out.find("χ²")));

  // Swapped models are not nested.
  EXPECT_EQ(run({"lrt", "--null-fit", path("full.json"), "--full-fit", path("null.json")}).code, 1);
}

TEST_F(Cli, MixedFitRuns) {
  const auto corpus = simulate("default");
  const auto r = run({"fit", corpus, "--formula", "confidence ~ kind + (1 | annotator)", "--method", "aghq"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Cumulative link mixed model"), std::string::npos);
  EXPECT_EQ(run({"fit", corpus, "--formula", "confidence ~ kind + (1 | nobody)"}).code, 1);
}

TEST_F(Cli, SimulateWritesTruthSidecar) {
  const auto corpus = simulate("default", 12);
  EXPECT_TRUE(fs::exists(corpus + ".truth.json"));
  const auto a = io::read_file(corpus);
  ASSERT_EQ(run({"simulate", "--seed", "12", "-o", path("again.jsonl")}).code, 0);
  EXPECT_EQ(io::read_file(path("again.jsonl")), a);
}

TEST(PipelineApi, RecoversTwoGroups) {
  using L = RelationLabel;
  const std::vector<L> group_a = {L::Elaboration, L::Explanation, L::Background, L::Continuation};
  const std::vector<L> group_b = {L::Acknowledgement, L::Comment, L::ClarificationQuestion, L::QuestionAnswerPair};
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto ds = sim::generate(sim::two_group_config(1000 + s)).dataset;
    cli::PipelineConfig cfg;
    cfg.seed = s;
    const auto r = cli::run_pipeline(ds, cfg);
    EXPECT_EQ(r.selection.k_best, 2);
    const int ca = r.clusters[index(group_a[0])];
    for (auto l : group_a) EXPECT_EQ(r.clusters[index(l)], ca);
    for (auto l : group_b) EXPECT_NE(r.clusters[index(l)], ca);
    EXPECT_EQ(r.clusters[index(group_b[0])], r.clusters[index(group_b[1])]);
  }
}

TEST(Binary, ExitCodes) {
  const std::string exe = DREL_CLI_PATH;
  auto status = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("validate " + fixture()), 0);
  EXPECT_EQ(status("nonsense"), 2);
  EXPECT_EQ(status("--help"), 0);
}
