#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nela {

/// Column-stochastic user influence weights. Entry (i, j) is the influence of
/// user i on the payoff of user j, so column j mixes every user's parameters
/// into user j's reward. Instances are always valid: nonnegative entries and
/// unit column sums within 1e-9.
class InfluenceMatrix {
public:
  /// Validates `w`. Columns whose sum is within `renormalize_tol` of 1 are
  /// rescaled to sum to exactly 1; anything further off is rejected.
  static InfluenceMatrix from_matrix(Eigen::MatrixXd w, double renormalize_tol = 1e-9);

  static InfluenceMatrix identity(int n);

  int n() const { return static_cast<int>(w_.cols()); }
  const Eigen::MatrixXd& matrix() const { return w_; }
  double operator()(int i, int j) const { return w_(i, j); }
  /// Weights every user contributes to `user`'s payoff.
  Eigen::VectorXd column(int user) const { return w_.col(user); }

  /// Row indices with a nonzero weight in column `user`.
  const std::vector<int>& support(int user) const { return support_[user]; }

private:
  explicit InfluenceMatrix(Eigen::MatrixXd w);

  Eigen::MatrixXd w_;
  std::vector<std::vector<int>> support_;
};

using Edge = std::pair<int, int>;

/// Equal-influence weights: column j holds 1/(1+deg(j)) on j itself and on
/// each neighbour of j. `edges` must list both directions of every edge.
InfluenceMatrix build_uniform_graph(const std::vector<Edge>& edges, int n);

/// Similarity weights from unit-norm user features (columns of `theta`).
/// Scores are clipped inner products; off-diagonal scores strictly below the
/// (1 - keep_fraction) quantile are dropped (ties at the cutoff survive), then
/// each column is l1-normalized. An all-zero column becomes a self loop.
InfluenceMatrix build_similarity_graph(const Eigen::MatrixXd& theta, double keep_fraction);

/// Loads the header-less n x n CSV form (row i = W(i, :)).
InfluenceMatrix load_influence_matrix(const std::filesystem::path& path);
void save_influence_matrix(const std::filesystem::path& path, const InfluenceMatrix& w);

/// One `i,j` pair per line, 0-based.
std::vector<Edge> load_edge_list(const std::filesystem::path& path);

/// Adds the reverse of every edge and removes duplicates.
std::vector<Edge> make_undirected(const std::vector<Edge>& edges);

std::vector<Edge> star_edges(int n, int center = 0);
std::vector<Edge> complete_edges(int n);

}  // namespace nela
