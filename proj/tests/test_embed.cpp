#include <gtest/gtest.h>

#include "drel/embed.hpp"
#include "drel/error.hpp"
#include "oracles.hpp"

using namespace drel;
using embed::AssemblyConfig;

namespace {

AnnotationRecord rec(std::string id, std::vector<RelationLabel> labels, ContextKind ctx, int conf) {
  AnnotationRecord r;
  r.record_id = std::move(id);
  r.annotator_id = "a";
  r.team_id = "t";
  r.conversation_id = "c";
  r.du_pair_id = id;
  r.context = ctx;
  r.labels = std::move(labels);
  r.confidence = conf;
  return r;
}

AssemblyConfig config(bool weighted, bool context, int d = 10) {
  AssemblyConfig c;
  c.weight_by_confidence = weighted;
  c.include_context = context;
  c.pca_dims = d;
  return c;
}

}  // namespace

TEST(Assemble, SingleRecordOuterProduct) {
  const Dataset ds({rec("r1", {RelationLabel::Elaboration}, ContextKind::SingleTurn, 2)});
  const auto co = embed::assemble(ds, config(true, true));
  EXPECT_EQ(co.annotation(0, 6), 2);
  EXPECT_EQ(co.annotation(0, 12), 2);
  EXPECT_EQ(co.annotation.sum(), 4);
  EXPECT_EQ(co.cooccurrence(6, 6), 4);
  EXPECT_EQ(co.cooccurrence(6, 12), 4);
  EXPECT_EQ(co.cooccurrence(12, 6), 4);
  EXPECT_EQ(co.cooccurrence(12, 12), 4);
  EXPECT_EQ(co.cooccurrence.sum(), 16);
}

TEST(Assemble, TwoRecordExample) {
  const Dataset ds({rec("r1", {RelationLabel::Elaboration, RelationLabel::Explanation},
                        ContextKind::WithinSpeakerCrossTurn, 3),
                    rec("r2", {RelationLabel::QuestionAnswerPair}, ContextKind::CrossSpeaker, 5)});
  const auto o = embed::assemble(ds, config(true, true)).cooccurrence;
  EXPECT_EQ(o(6, 7), 9);
  EXPECT_EQ(o(7, 6), 9);
  EXPECT_EQ(o(6, 6), 9);
  EXPECT_EQ(o(7, 7), 9);
  EXPECT_EQ(o(6, 13), 9);
  EXPECT_EQ(o(13, 13), 9);
  EXPECT_EQ(o(9, 9), 25);
  EXPECT_EQ(o(9, 14), 25);
  EXPECT_EQ(o(14, 14), 25);
  EXPECT_EQ(o, oracle::cooccurrence(ds, true, true).cast<std::int64_t>());

  const auto co = embed::assemble(ds, config(false, false));
  ASSERT_EQ(co.cooccurrence.rows(), 12);
  EXPECT_EQ(co.cooccurrence(6, 7), 1);
  EXPECT_EQ(co.cooccurrence(9, 9), 1);
  EXPECT_EQ(co.config.variant_name(), "unweighted");
  EXPECT_EQ(co.feature_names.back(), "other");
}

TEST(Assemble, MatchesBruteForceForAllVariants) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto ds = oracle::random_dataset(seed, 5 + seed);
    for (bool w : {true, false}) {
      for (bool c : {true, false}) {
        const auto expected = oracle::cooccurrence(ds, w, c);
        EXPECT_EQ(embed::assemble(ds, config(w, c), embed::Backend::Serial).cooccurrence, expected);
        EXPECT_EQ(embed::assemble(ds, config(w, c), embed::Backend::OpenMP).cooccurrence, expected);
      }
    }
  }
}

TEST(Assemble, PermutationInvarianceAdditivityScaling) {
  const auto ds = oracle::random_dataset(4, 40);
  auto recs = ds.records();
  std::reverse(recs.begin(), recs.end());
  const auto o = embed::assemble(ds, config(true, true)).cooccurrence;
  EXPECT_EQ(embed::assemble(Dataset(recs), config(true, true)).cooccurrence, o);

  std::vector<AnnotationRecord> first(recs.begin(), recs.begin() + 15), second(recs.begin() + 15, recs.end());
  EXPECT_EQ(embed::assemble(Dataset(first), config(true, true)).cooccurrence +
                embed::assemble(Dataset(second), config(true, true)).cooccurrence,
            o);

  // Confidences 1 and 2 doubled stay inside [1, 5].
  std::vector<AnnotationRecord> low, doubled;
  for (auto r : ds.records()) {
    if (r.confidence > 2) continue;
    low.push_back(r);
    r.confidence *= 2;
    doubled.push_back(r);
  }
  EXPECT_EQ(embed::assemble(Dataset(doubled), config(true, true)).cooccurrence,
            4 * embed::assemble(Dataset(low), config(true, true)).cooccurrence);
}

TEST(Assemble, RejectsBadDims) {
  const auto ds = oracle::random_dataset(1, 5);
  EXPECT_THROW(embed::assemble(ds, config(true, true, 16)), Error);
  EXPECT_THROW(embed::assemble(ds, config(true, false, 13)), Error);
  EXPECT_THROW(embed::assemble(ds, config(true, true, 0)), Error);
  EXPECT_NO_THROW(embed::assemble(ds, config(true, true, 15)));
}

TEST(Factorize, DiagonalCase) {
  linalg::Matrix o(2, 2);
  o << 4, 0, 0, 1;
  const auto e = embed::factorize_matrix(o, 2, {"a", "b"});
  EXPECT_DOUBLE_EQ(e.eigenvalues[0], 4.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues[1], 1.0);
  EXPECT_NEAR(e.vectors(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(e.vectors(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(e.vectors(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(e.vectors(1, 1), 1.0, 1e-12);
}

TEST(Factorize, ReconstructionAndOracleEigenvalues) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto ds = oracle::random_dataset(seed, 6);
    const auto co = embed::assemble(ds, config(true, true));
    const auto e = embed::factorize(co, 15);
    const auto o = co.cooccurrence_real();
    EXPECT_LE(linalg::max_abs_diff(e.vectors * e.vectors.transpose(), o), 1e-8);
    const auto ref = oracle::jacobi_eigenvalues(o);
    for (int i = 0; i < 15; ++i) {
      EXPECT_NEAR(e.eigenvalues[i], std::max(0.0, ref[static_cast<std::size_t>(i)]), 1e-8);
    }
    for (int i = 1; i < 15; ++i) EXPECT_GE(e.eigenvalues[i - 1], e.eigenvalues[i]);
  }
}

TEST(Factorize, SignConventionAndDeterminism) {
  const auto ds = oracle::random_dataset(8, 50);
  const auto co = embed::assemble(ds, config(true, true));
  const auto a = embed::factorize(co, 10);
  const auto b = embed::factorize(co, 10);
  EXPECT_EQ(a.vectors, b.vectors);
  for (Eigen::Index k = 0; k < a.vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    a.vectors.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GE(a.vectors(arg, k), 0.0);
  }
}

TEST(Factorize, Errors) {
  linalg::Matrix o = linalg::Matrix::Identity(3, 3);
  EXPECT_THROW(embed::factorize_matrix(o, 4, {"a", "b", "c"}), Error);
  o(1, 1) = std::nan("");
  EXPECT_THROW(embed::factorize_matrix(o, 2, {"a", "b", "c"}), Error);
}

TEST(RelationRows, FirstTwelveInCanonicalOrder) {
  const auto ds = oracle::random_dataset(2, 30);
  const auto e15 = embed::factorize(embed::assemble(ds, config(true, true)), 10);
  const auto r15 = embed::relation_rows(e15);
  EXPECT_EQ(r15.rows.rows(), 12);
  EXPECT_EQ(r15.rows, e15.vectors.topRows(12));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(r15.names[i], token(kAllLabels[i]));

  const auto e12 = embed::factorize(embed::assemble(ds, config(false, false)), 10);
  EXPECT_EQ(embed::relation_rows(e12).rows, e12.vectors);
}
