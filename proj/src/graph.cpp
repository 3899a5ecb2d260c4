#include "nela/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "nela/csv.hpp"
#include "nela/errors.hpp"

namespace nela {

InfluenceMatrix::InfluenceMatrix(Eigen::MatrixXd w) : w_(std::move(w)) {
  support_.resize(static_cast<std::size_t>(w_.cols()));
  for (Eigen::Index j = 0; j < w_.cols(); ++j)
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
      if (w_(i, j) != 0.0) support_[j].push_back(static_cast<int>(i));
}

InfluenceMatrix InfluenceMatrix::from_matrix(Eigen::MatrixXd w, double renormalize_tol) {
  if (w.rows() < 1 || w.rows() != w.cols()) {
    throw InputError("influence matrix must be square with n >= 1, got " +
                     std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  }
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (!std::isfinite(w(i, j)) || w(i, j) < 0.0) {
        throw InputError("influence matrix entry at row " + std::to_string(i) + ", column " +
                         std::to_string(j) + " is negative or not finite");
      }
    }
    const double sum = w.col(j).sum();
    if (std::abs(sum - 1.0) > renormalize_tol) {
      throw InputError("influence matrix column " + std::to_string(j) + " sums to " +
                       csv::format_double(sum) + ", expected 1");
    }
    w.col(j) /= sum;
  }
  return InfluenceMatrix(std::move(w));
}

InfluenceMatrix InfluenceMatrix::identity(int n) {
  if (n < 1) throw InputError("n must be >= 1");
  return InfluenceMatrix(Eigen::MatrixXd::Identity(n, n));
}

InfluenceMatrix build_uniform_graph(const std::vector<Edge>& edges, int n) {
  if (n < 1) throw InputError("n must be >= 1");
  std::set<Edge> edge_set;
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      throw InputError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                       ") has a node id outside [0, " + std::to_string(n) + ")");
    }
    if (i == j) throw InputError("self loop on node " + std::to_string(i));
    edge_set.emplace(i, j);
  }
  for (const auto& [i, j] : edge_set) {
    if (!edge_set.count({j, i})) {
      throw InputError("edge list is not symmetric: (" + std::to_string(i) + "," +
                       std::to_string(j) + ") has no reverse");
    }
  }

  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  for (const auto& e : edge_set) ++degree[e.second];

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) w(j, j) = 1.0 / (1.0 + degree[j]);
  for (const auto& [i, j] : edge_set) w(i, j) = 1.0 / (1.0 + degree[j]);
  return InfluenceMatrix::from_matrix(std::move(w), 1e-12);
}

InfluenceMatrix build_similarity_graph(const Eigen::MatrixXd& theta, double keep_fraction) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw InputError("keep_fraction must lie in (0, 1]");
  }
  const Eigen::Index n = theta.cols();
  if (n < 1) throw InputError("theta has no columns");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (std::abs(theta.col(j).norm() - 1.0) > 1e-6) {
      throw InputError("theta column " + std::to_string(j) + " is not unit norm");
    }
  }

  Eigen::MatrixXd score = (theta.transpose() * theta).cwiseMax(0.0);

  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) off.push_back(score(i, j));

  if (!off.empty() && keep_fraction < 1.0) {
    std::sort(off.begin(), off.end());
    // Tolerance absorbs representation error in fractions like 2/3.
    auto drop = static_cast<std::size_t>(
        std::floor((1.0 - keep_fraction) * static_cast<double>(off.size()) + 1e-9));
    drop = std::min(drop, off.size() - 1);
    const double cutoff = off[drop];
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j && score(i, j) < cutoff) score(i, j) = 0.0;
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const double sum = score.col(j).sum();
    if (sum <= 0.0) {
      score.col(j).setZero();
      score(j, j) = 1.0;
    } else {
      score.col(j) /= sum;
    }
  }
  return InfluenceMatrix::from_matrix(std::move(score), 1e-12);
}

InfluenceMatrix load_influence_matrix(const std::filesystem::path& path) {
  Eigen::MatrixXd w = csv::read_matrix(path);
  try {
    return InfluenceMatrix::from_matrix(std::move(w), 1e-6);
  } catch (const InputError& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

void save_influence_matrix(const std::filesystem::path& path, const InfluenceMatrix& w) {
  csv::write_matrix(path, w.matrix());
}

std::vector<Edge> load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = csv::split(line, ',');
    try {
      if (fields.size() != 2) throw std::invalid_argument("expected two fields");
      edges.emplace_back(std::stoi(fields[0]), std::stoi(fields[1]));
    } catch (const std::exception&) {
      throw LoadError(path.string() + ": line " + std::to_string(line_no) +
                      ": expected 'i,j', got '" + line + "'");
    }
  }
  return edges;
}

std::vector<Edge> make_undirected(const std::vector<Edge>& edges) {
  std::set<Edge> s;
  for (const auto& [i, j] : edges) {
    s.emplace(i, j);
    s.emplace(j, i);
  }
  return {s.begin(), s.end()};
}

std::vector<Edge> star_edges(int n, int center) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    if (i == center) continue;
    edges.emplace_back(center, i);
    edges.emplace_back(i, center);
  }
  return edges;
}

std::vector<Edge> complete_edges(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.emplace_back(i, j);
  return edges;
}

}  // namespace nela
