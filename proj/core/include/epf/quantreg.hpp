#pragma once

#include <Eigen/Core>

namespace epf {

struct QuantRegResult {
  Eigen::VectorXd beta;
  double objective = 0.0;  // sum of check losses at beta
  int iterations = 0;
  bool polished = false;   // true when snapped to an exact interpolation basis
};

/// Linear quantile regression: minimize the sum of check functions
/// rho_alpha(y - X b) over b. Solved by a primal-dual interior-point method
/// on the bounded-variable LP dual, followed by a vertex polish that fits the
/// p most interior observations exactly and keeps the better point. X must
/// contain its own intercept column if one is wanted.
QuantRegResult quantile_regression(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double alpha,
                                   int max_iterations = 100);

double check_loss_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta, double alpha);

}  // namespace epf
