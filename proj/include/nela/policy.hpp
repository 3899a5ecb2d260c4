#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nela/environment.hpp"

namespace nela {

/// Shared interface of every bandit policy run by the harness. Policies are
/// single-threaded state machines and never consume environment randomness.
class Policy {
public:
  virtual ~Policy() = default;

  virtual std::string name() const = 0;
  /// Index of the arm to serve to `user`. Ties resolve to the lowest index.
  virtual int select(int user, const ArmSet& arms) const = 0;
  virtual void update(int user, const Eigen::Ref<const Eigen::VectorXd>& arm, double reward) = 0;
  /// Users currently flagged as anomalous (sorted). Empty for policies that
  /// do not detect anomalies.
  virtual std::vector<int> detected_anomalies() const { return {}; }
};

/// First index attaining the maximum score.
inline int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  int best = 0;
  for (int m = 1; m < scores.size(); ++m)
    if (scores(m) > scores(best)) best = m;
  return best;
}

}  // namespace nela
