#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "nela/environment.hpp"
#include "nela/errors.hpp"
#include "nela/graph.hpp"

namespace nela {
namespace {

void expect_column_stochastic(const InfluenceMatrix& w) {
  EXPECT_GE(w.matrix().minCoeff(), 0.0);
  for (int j = 0; j < w.n(); ++j) EXPECT_NEAR(w.matrix().col(j).sum(), 1.0, 1e-9) << "column " << j;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / ("nela_graph_" + name);
  std::ofstream(path) << contents;
  return path;
}

TEST(UniformGraph, FullyConnectedIsUniform) {
  const auto w = build_uniform_graph(complete_edges(4), 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(w(i, j), 0.25);
}

TEST(UniformGraph, StarColumns) {
  const auto w = build_uniform_graph(star_edges(4, 0), 4);
  Eigen::Vector4d col0(0.25, 0.25, 0.25, 0.25);
  Eigen::Vector4d col1(0.5, 0.5, 0.0, 0.0);
  EXPECT_TRUE(w.matrix().col(0).isApprox(col0));
  EXPECT_TRUE(w.matrix().col(1).isApprox(col1));
  expect_column_stochastic(w);
}

TEST(UniformGraph, SingleNode) {
  const auto w = build_uniform_graph({}, 1);
  EXPECT_EQ(w.n(), 1);
  EXPECT_DOUBLE_EQ(w(0, 0), 1.0);
}

TEST(UniformGraph, RejectsBadInput) {
  EXPECT_THROW(build_uniform_graph({{0, 4}, {4, 0}}, 4), InputError);
  EXPECT_THROW(build_uniform_graph({{0, 1}}, 4), InputError);
  EXPECT_THROW(build_uniform_graph({{2, 2}}, 4), InputError);
}

TEST(UniformGraph, RegularGraphHasEqualWeights) {
  // 6-cycle: every node has degree 2.
  std::vector<Edge> ring;
  for (int i = 0; i < 6; ++i) ring.emplace_back(i, (i + 1) % 6);
  const auto w = build_uniform_graph(make_undirected(ring), 6);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 6; ++i)
      if (w(i, j) != 0.0) EXPECT_DOUBLE_EQ(w(i, j), 1.0 / 3.0);
  expect_column_stochastic(w);
}

TEST(SimilarityGraph, OrthonormalFeaturesGiveIdentity) {
  const auto w = build_similarity_graph(Eigen::MatrixXd::Identity(5, 5), 0.3);
  EXPECT_TRUE(w.matrix().isApprox(Eigen::MatrixXd::Identity(5, 5)));
}

TEST(SimilarityGraph, HandInstanceDropsWeakestPair) {
  // Unit vectors with pairwise inner products 0.9 (0,1), 0.5 (0,2), 0.1 (1,2).
  Eigen::Matrix3d gram;
  gram << 1.0, 0.9, 0.5, 0.9, 1.0, 0.1, 0.5, 0.1, 1.0;
  const Eigen::MatrixXd theta = gram.llt().matrixU();
  const auto w = build_similarity_graph(theta, 2.0 / 3.0);

  Eigen::Matrix3d expected;
  expected.col(0) << 1.0 / 2.4, 0.9 / 2.4, 0.5 / 2.4;
  expected.col(1) << 0.9 / 1.9, 1.0 / 1.9, 0.0;
  expected.col(2) << 0.5 / 1.5, 0.0, 1.0 / 1.5;
  EXPECT_TRUE(w.matrix().isApprox(expected, 1e-12)) << w.matrix();
}

TEST(SimilarityGraph, KeepAllIsNormalizedClippedGram) {
  Rng rng(7);
  const auto gt = generate_ground_truth(8, 4, 0, 0.0, 1, rng);
  const auto w = build_similarity_graph(gt.theta, 1.0);
  Eigen::MatrixXd s = (gt.theta.transpose() * gt.theta).cwiseMax(0.0);
  for (int j = 0; j < 8; ++j) s.col(j) /= s.col(j).sum();
  EXPECT_TRUE(w.matrix().isApprox(s, 1e-12));
}

TEST(SimilarityGraph, InvariantUnderGlobalSignFlip) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto gt = generate_ground_truth(10, 5, 0, 0.0, 1, rng);
    const auto a = build_similarity_graph(gt.theta, 0.3);
    const auto b = build_similarity_graph(-gt.theta, 0.3);
    EXPECT_TRUE(a.matrix().isApprox(b.matrix(), 1e-14));
    expect_column_stochastic(a);
  }
}

TEST(SimilarityGraph, IsolatedUserKeepsOnlySelfWeight) {
  // User 2 is orthogonal to everyone.
  Eigen::MatrixXd theta(3, 3);
  theta.col(0) = Eigen::Vector3d(1, 0, 0);
  theta.col(1) = Eigen::Vector3d(std::sqrt(0.5), std::sqrt(0.5), 0);
  theta.col(2) = Eigen::Vector3d(0, 0, 1);
  const auto w = build_similarity_graph(theta, 0.5);
  EXPECT_DOUBLE_EQ(w(2, 2), 1.0);
  expect_column_stochastic(w);
}

TEST(SimilarityGraph, RejectsNonUnitColumns) {
  EXPECT_THROW(build_similarity_graph(2.0 * Eigen::MatrixXd::Identity(3, 3), 0.3), InputError);
  EXPECT_THROW(build_similarity_graph(Eigen::MatrixXd::Identity(3, 3), 0.0), InputError);
}

TEST(InfluenceFile, LoadsIdentity) {
  const auto w = load_influence_matrix(temp_file("id.csv", "1,0\n0,1\n"));
  EXPECT_TRUE(w.matrix().isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST(InfluenceFile, RenormalizesWithinTolerance) {
  const auto w = load_influence_matrix(temp_file("near.csv", "0.49999996,0\n0.49999996,1\n"));
  EXPECT_NEAR(w.matrix().col(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(w(0, 0), 0.5, 1e-15);
}

TEST(InfluenceFile, RejectsBadFiles) {
  EXPECT_THROW(load_influence_matrix(temp_file("neg.csv", "1.5,0\n-0.5,1\n")), LoadError);
  EXPECT_THROW(load_influence_matrix(temp_file("sum.csv", "0.9,0\n0,1\n")), LoadError);
  EXPECT_THROW(load_influence_matrix(temp_file("ragged.csv", "1,0\n0\n")), LoadError);
  EXPECT_THROW(load_influence_matrix(temp_file("text.csv", "1,x\n0,1\n")), LoadError);
  try {
    load_influence_matrix(temp_file("neg2.csv", "1,0.5\n0,-0.5\n"));
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1, column 1"), std::string::npos) << e.what();
  }
}

TEST(InfluenceFile, EdgeListRoundTrip) {
  const auto edges = load_edge_list(temp_file("edges.csv", "0,1\n1,0\n\n1,2\n2,1\n"));
  EXPECT_EQ(edges.size(), 4u);
  const auto w = build_uniform_graph(edges, 3);
  EXPECT_DOUBLE_EQ(w(0, 1), 1.0 / 3.0);
  EXPECT_THROW(load_edge_list(temp_file("bad_edges.csv", "0;1\n")), LoadError);
}

}  // namespace
}  // namespace nela
