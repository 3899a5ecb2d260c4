#pragma once

// Reference computations used only by tests. Each one takes a different route
// from the library code it checks (dense algebra, enumeration, grid search).

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace nela::oracle {

/// (1/t)||y - X v||^2 + lambda ||v||_1 from the dense design.
inline double lasso_objective_dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& v, double lambda) {
  const double t = static_cast<double>(x.rows());
  return (y - x * v).squaredNorm() / t + lambda * v.lpNorm<1>();
}

/// Exact Lasso minimum by enumerating every sign pattern in {-1, 0, +1}^p and
/// solving the stationarity equations on the active set. Feasible only for
/// p <= 8 or so. Returns the best objective among all candidates.
inline double lasso_enumerate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                              Eigen::VectorXd* argmin = nullptr) {
  const int p = static_cast<int>(x.cols());
  const double t = static_cast<double>(x.rows());
  double best = lasso_objective_dense(x, y, Eigen::VectorXd::Zero(p), lambda);
  if (argmin) *argmin = Eigen::VectorXd::Zero(p);
  int patterns = 1;
  for (int i = 0; i < p; ++i) patterns *= 3;
  for (int code = 1; code < patterns; ++code) {
    std::vector<int> active;
    std::vector<double> sign;
    int c = code;
    for (int j = 0; j < p; ++j, c /= 3) {
      if (c % 3 == 0) continue;
      active.push_back(j);
      sign.push_back(c % 3 == 1 ? 1.0 : -1.0);
    }
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd xa(x.rows(), k);
    Eigen::VectorXd s(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      xa.col(a) = x.col(active[a]);
      s(a) = sign[a];
    }
    const Eigen::MatrixXd g = xa.transpose() * xa;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd va = lu.solve(xa.transpose() * y - 0.5 * t * lambda * s);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
    for (Eigen::Index a = 0; a < k; ++a) v(active[a]) = va(a);
    const double obj = lasso_objective_dense(x, y, v, lambda);
    if (obj < best) {
      best = obj;
      if (argmin) *argmin = v;
    }
  }
  return best;
}

/// Exhaustive grid search for a separable Lasso (each design column touches
/// rows no other column touches): every coordinate is scanned over
/// [lo, hi] with the given step.
inline double lasso_grid_separable(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                   double lambda, double lo = -20.0, double hi = 20.0,
                                   double step = 1e-4) {
  const double t = static_cast<double>(x.rows());
  double total = 0.0;
  std::vector<bool> used(static_cast<std::size_t>(x.rows()), false);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    // Per-coordinate objective (1/t)(a v^2 - 2 b v + c) + lambda |v|.
    double a = 0, b = 0, c = 0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (x(r, j) == 0.0) continue;
      a += x(r, j) * x(r, j);
      b += x(r, j) * y(r);
      c += y(r) * y(r);
      used[r] = true;
    }
    double best = std::numeric_limits<double>::infinity();
    const long steps = std::lround((hi - lo) / step);
    for (long i = 0; i <= steps; ++i) {
      const double v = lo + static_cast<double>(i) * step;
      best = std::min(best, (a * v * v - 2 * b * v + c) / t + lambda * std::abs(v));
    }
    total += best;
  }
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    if (!used[r]) total += y(r) * y(r) / t;
  return total;
}

inline double log_det(const Eigen::MatrixXd& a) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& a) {
  return a.fullPivLu().inverse();
}

}  // namespace nela::oracle
