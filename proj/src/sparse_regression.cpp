#include "nela/sparse_regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "nela/csv.hpp"
#include "nela/errors.hpp"

namespace nela {

RegressionHistory::RegressionHistory(int n, int d) : n_(n), d_(d) {
  if (n < 1 || d < 1) throw InputError("regression history needs n, d >= 1");
  gram_.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(d, d));
  cross_.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(d));
  reward_cross_.assign(static_cast<std::size_t>(n), Eigen::VectorXd::Zero(d));
  reward_sq_.assign(static_cast<std::size_t>(n), 0.0);
  counts_.assign(static_cast<std::size_t>(n), 0);
}

void RegressionHistory::append(int user, const Eigen::Ref<const Eigen::VectorXd>& arm,
                               double target) {
  append(user, arm, target, target);
}

void RegressionHistory::append(int user, const Eigen::Ref<const Eigen::VectorXd>& arm,
                               double target, double reward) {
  if (user < 0 || user >= n_) throw InputError("user id out of range");
  if (arm.size() != d_) throw InputError("arm dimension mismatch");
  rows_.push_back({user, arm, target, reward});
  gram_[user].noalias() += arm * arm.transpose();
  cross_[user] += arm * target;
  reward_cross_[user] += arm * reward;
  reward_sq_[user] += reward * reward;
  ++counts_[user];
  target_sq_ += target * target;
}

void RegressionHistory::refresh_targets(const Eigen::Ref<const Eigen::MatrixXd>& offsets) {
  if (offsets.rows() != d_ || offsets.cols() != n_) throw InputError("offsets must be d x n");
  for (auto& row : rows_) row.target = row.reward - row.arm.dot(offsets.col(row.user));
  target_sq_ = 0.0;
  for (int u = 0; u < n_; ++u) {
    const auto c = offsets.col(u);
    cross_[u] = reward_cross_[u] - gram_[u] * c;
    target_sq_ += reward_sq_[u] - 2.0 * c.dot(reward_cross_[u]) + c.dot(gram_[u] * c);
  }
}

Eigen::MatrixXd RegressionHistory::dense_design() const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(size(), nd());
  for (long s = 0; s < size(); ++s) x.row(s).segment(rows_[s].user * d_, d_) = rows_[s].arm;
  return x;
}

Eigen::VectorXd RegressionHistory::targets() const {
  Eigen::VectorXd r(size());
  for (long s = 0; s < size(); ++s) r(s) = rows_[s].target;
  return r;
}

double lambda_schedule(long t, int n, int d, double lambda0) {
  if (t < 1) throw InputError("lambda schedule needs t >= 1");
  const double nd = static_cast<double>(n) * d;
  if (nd <= 1.0) throw InputError("lambda schedule needs nd > 1");
  const double log_t = std::log(static_cast<double>(std::max<long>(t, 2)));
  return lambda0 * std::sqrt(2.0 * log_t * std::log(nd) / static_cast<double>(t));
}

namespace {

double soft_threshold(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

struct Certificate {
  double objective;
  double gap;
  double kkt;
};

// Primal objective, duality gap and KKT violation from block statistics.
Certificate certify(const RegressionHistory& h, const Eigen::VectorXd& v, double lambda) {
  const double t = static_cast<double>(h.size());
  const int d = h.d();
  double vc = 0.0;
  double vgv = 0.0;
  double l1 = 0.0;
  double grad_inf = 0.0;
  double kkt = 0.0;
  for (int u = 0; u < h.n(); ++u) {
    const auto vu = v.segment(u * d, d);
    const Eigen::VectorXd gv = h.gram(u) * vu;
    const Eigen::VectorXd xtr = h.cross(u) - gv;  // X^T (R - X v) on this block
    vc += vu.dot(h.cross(u));
    vgv += vu.dot(gv);
    l1 += vu.lpNorm<1>();
    for (int k = 0; k < d; ++k) {
      const double g = -2.0 / t * xtr(k);  // gradient of the smooth part
      grad_inf = std::max(grad_inf, std::abs(g));
      const double viol = vu(k) != 0.0 ? std::abs(g + lambda * (vu(k) > 0 ? 1.0 : -1.0))
                                       : std::max(0.0, std::abs(g) - lambda);
      kkt = std::max(kkt, viol);
    }
  }
  const double rss = std::max(0.0, h.target_sq_sum() - 2.0 * vc + vgv);
  const double primal = rss / t + lambda * l1;

  // Dual point mu = s (2/t) r with s chosen so that ||X^T mu||_inf <= lambda.
  const double scale = grad_inf > lambda ? lambda / grad_inf : 1.0;
  const double ry = h.target_sq_sum() - vc;  // r^T y
  const double dual = scale * 2.0 / t * ry - scale * scale / t * rss;
  return {primal, std::max(0.0, primal - dual), kkt};
}

}  // namespace

double lasso_objective(const RegressionHistory& history, const Eigen::VectorXd& v,
                       double lambda) {
  return certify(history, v, lambda).objective;
}

LassoResult lasso_solve(const RegressionHistory& history, double lambda,
                        const LassoOptions& options,
                        const std::optional<Eigen::VectorXd>& warm_start) {
  if (history.empty()) throw InputError("lasso_solve needs a nonempty history");
  if (!(lambda >= 0.0)) throw InputError("lambda must be >= 0");
  if (!(options.tol > 0.0)) throw InputError("tol must be > 0");

  const int d = history.d();
  const double t = static_cast<double>(history.size());
  const double kill = t * lambda / 2.0;

  LassoResult result;
  result.coef = Eigen::VectorXd::Zero(history.nd());
  if (warm_start && warm_start->size() == history.nd()) result.coef = *warm_start;

  // Residual correlations c - G v per block, kept current across updates.
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(history.n()));
  for (int u = 0; u < history.n(); ++u) {
    if (history.row_count(u) == 0) {
      result.coef.segment(u * d, d).setZero();
      continue;
    }
    partial[u] = history.cross(u) - history.gram(u) * result.coef.segment(u * d, d);
  }

  Certificate cert{};
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int u = 0; u < history.n(); ++u) {
      if (history.row_count(u) == 0) continue;
      const Eigen::MatrixXd& g = history.gram(u);
      Eigen::VectorXd& p = partial[u];
      for (int k = 0; k < d; ++k) {
        const double gkk = g(k, k);
        if (gkk <= 0.0) continue;
        const int j = u * d + k;
        const double old = result.coef(j);
        const double rho = p(k) + gkk * old;
        const double updated = soft_threshold(rho, kill) / gkk;
        const double delta = updated - old;
        if (delta != 0.0) {
          result.coef(j) = updated;
          p -= g.col(k) * delta;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
    }
    result.sweeps = sweep;
    if (options.on_sweep) options.on_sweep(sweep, lasso_objective(history, result.coef, lambda));
    if (max_change < options.tol) {
      cert = certify(history, result.coef, lambda);
      if (cert.kkt <= options.tol * (1.0 + lambda)) {
        result.objective = cert.objective;
        result.duality_gap = cert.gap;
        result.kkt_violation = cert.kkt;
        return result;
      }
    }
  }
  cert = certify(history, result.coef, lambda);
  throw ConvergenceError("lasso did not converge in " + std::to_string(options.max_sweeps) +
                             " sweeps (duality gap " + csv::format_double(cert.gap) +
                             ", KKT violation " + csv::format_double(cert.kkt) + ")",
                         cert.gap, result.sweeps);
}

SupportEstimate two_stage_threshold(const Eigen::VectorXd& v0, double lambda_t) {
  if (!(lambda_t >= 0.0)) throw InputError("lambda_t must be >= 0");
  SupportEstimate est;
  est.lambda_t = lambda_t;
  const double first = 4.0 * lambda_t;
  for (Eigen::Index j = 0; j < v0.size(); ++j)
    if (std::abs(v0(j)) > first) est.j0.push_back(static_cast<int>(j));
  const double second = first * std::sqrt(static_cast<double>(est.j0.size()));
  for (int j : est.j0)
    if (std::abs(v0(j)) > second) est.j1.push_back(j);
  return est;
}

Eigen::VectorXd restricted_least_squares(const RegressionHistory& history,
                                         const std::vector<int>& support) {
  const int d = history.d();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(history.nd());

  std::vector<std::vector<int>> by_block(static_cast<std::size_t>(history.n()));
  for (int j : support) {
    if (j < 0 || j >= history.nd()) throw InputError("support index out of range");
    by_block[j / d].push_back(j % d);
  }

  for (int u = 0; u < history.n(); ++u) {
    auto& idx = by_block[u];
    if (idx.empty() || history.row_count(u) == 0) continue;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd c(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      c(a) = history.cross(u)(idx[a]);
      for (Eigen::Index b = 0; b < k; ++b) g(a, b) = history.gram(u)(idx[a], idx[b]);
    }
    // Pseudo-inverse: eigen-directions without data get a zero coefficient.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Eigen::VectorXd proj = eig.eigenvectors().transpose() * c;
    for (Eigen::Index a = 0; a < k; ++a) proj(a) = ev(a) > cutoff ? proj(a) / ev(a) : 0.0;
    const Eigen::VectorXd beta = eig.eigenvectors() * proj;
    for (Eigen::Index a = 0; a < k; ++a) v(u * d + idx[a]) = beta(a);
  }
  return v;
}

void dump_regression_debug(const std::filesystem::path& dir, const RegressionHistory& history,
                           const Eigen::VectorXd& lasso_coef, const SupportEstimate& support,
                           const Eigen::VectorXd& refit) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "rows.csv");
    if (!out) throw LoadError("cannot write " + (dir / "rows.csv").string());
    for (const auto& row : history.rows()) {
      out << row.user;
      for (Eigen::Index k = 0; k < row.arm.size(); ++k) out << ',' << csv::format_double(row.arm(k));
      out << ',' << csv::format_double(row.target) << '\n';
    }
  }
  Eigen::MatrixXd coef(lasso_coef.size(), 2);
  coef.col(0) = lasso_coef;
  coef.col(1) = refit;
  csv::write_matrix(dir / "coefficients.csv", coef);
  csv::write_int_column(dir / "support_j0.csv", support.j0);
  csv::write_int_column(dir / "support_j1.csv", support.j1);
}

}  // namespace nela
