#include "epf/quantreg.hpp"

#include "epf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace epf {

double check_loss_sum(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta, double alpha) {
  const Eigen::VectorXd r = y - X * beta;
  double s = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    s += r[i] * (alpha - (r[i] < 0.0 ? 1.0 : 0.0));
  }
  return s;
}

namespace {

// Fit exactly through the p observations the interior-point iterate marks as
// basic. Returns false when the basis is singular.
bool solve_basis(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const std::vector<int>& basis, Eigen::VectorXd* beta) {
  const int p = static_cast<int>(X.cols());
  Eigen::MatrixXd Xb(p, p);
  Eigen::VectorXd yb(p);
  for (int i = 0; i < p; ++i) {
    Xb.row(i) = X.row(basis[i]);
    yb[i] = y[basis[i]];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Xb);
  if (!lu.isInvertible()) return false;
  *beta = lu.solve(yb);
  return beta->allFinite();
}

}  // namespace

QuantRegResult quantile_regression(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y, double alpha,
                                   int max_iterations) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n != y.size() || n == 0 || p == 0) {
    throw ValidationError("bad quantile regression dimensions");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("quantile level must be in (0,1)");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw ValidationError("non-finite input to quantile_regression");
  }
  if (n < p) throw ValidationError("fewer observations than parameters");

  // Bounded-variable LP dual:  min c'a  s.t.  X'a = (1-alpha) X'1,
  // 0 <= a <= 1, with c = -y. The equality multipliers recover beta = -lam.
  const Eigen::MatrixXd At = X;  // A' = X, so A = X'
  const Eigen::VectorXd c = -y;

  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 - alpha);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, alpha);

  // Dual start from least squares of X lam ~ c.
  Eigen::LDLT<Eigen::MatrixXd> xtx(X.transpose() * X);
  Eigen::VectorXd lam = xtx.solve(X.transpose() * c);
  Eigen::VectorXd rd = c - At * lam;
  const double eps0 = std::max(1e-4, 1e-4 * rd.cwiseAbs().mean());
  Eigen::VectorXd z(n), w(n);
  for (int i = 0; i < n; ++i) {
    z[i] = std::max(rd[i], 0.0) + eps0;
    w[i] = z[i] - rd[i];
  }

  const double gap_tol = 1e-10 * n * (1.0 + y.cwiseAbs().maxCoeff());
  int iter = 0;
  double gap = x.dot(z) + s.dot(w);

  Eigen::VectorXd dx(n), ds(n), dz(n), dw(n), dlam(p);

  while (gap > gap_tol && iter < max_iterations) {
    ++iter;
    const Eigen::VectorXd d =
        (z.cwiseQuotient(x) + w.cwiseQuotient(s)).cwiseInverse();

    // Keep the iterate honest against drift.
    const Eigen::VectorXd rp =
        (1.0 - alpha) * (X.transpose() * Eigen::VectorXd::Ones(n)) -
        X.transpose() * x;
    const Eigen::VectorXd ru = -(x + s).array() + 1.0;
    rd = c - At * lam - z + w;

    Eigen::MatrixXd M = X.transpose() * d.asDiagonal() * X;
    Eigen::LDLT<Eigen::MatrixXd> chol(M);
    if (chol.info() != Eigen::Success) {
      throw ValidationError("singular design in quantile_regression");
    }

    auto solve_step = [&](const Eigen::VectorXd& rc1,
                          const Eigen::VectorXd& rc2) {
      const Eigen::VectorXd rhs_x = rd - rc1.cwiseQuotient(x) +
                                    rc2.cwiseQuotient(s) -
                                    w.cwiseQuotient(s).cwiseProduct(ru);
      dlam = chol.solve(rp + X.transpose() * (d.cwiseProduct(rhs_x)));
      dx = d.cwiseProduct(At * dlam - rhs_x);
      ds = ru - dx;
      dz = (rc1 - z.cwiseProduct(dx)).cwiseQuotient(x);
      dw = (rc2 - w.cwiseProduct(ds)).cwiseQuotient(s);
    };

    auto step_length = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      }
      return std::min(1.0, 0.9995 * a);
    };

    // Predictor.
    solve_step(-x.cwiseProduct(z), -s.cwiseProduct(w));
    double ap = std::min(step_length(x, dx), step_length(s, ds));
    double ad = std::min(step_length(z, dz), step_length(w, dw));
    const double gap_aff = (x + ap * dx).dot(z + ad * dz) +
                           (s + ap * ds).dot(w + ad * dw);
    const double sigma = std::pow(gap_aff / gap, 3.0);
    const double mu = sigma * gap / (2.0 * n);

    // Corrector, reusing the factorization.
    const Eigen::VectorXd rc1 =
        Eigen::VectorXd::Constant(n, mu) - x.cwiseProduct(z) -
        dx.cwiseProduct(dz);
    const Eigen::VectorXd rc2 =
        Eigen::VectorXd::Constant(n, mu) - s.cwiseProduct(w) -
        ds.cwiseProduct(dw);
    solve_step(rc1, rc2);
    ap = std::min(step_length(x, dx), step_length(s, ds));
    ad = std::min(step_length(z, dz), step_length(w, dw));

    x += ap * dx;
    s += ap * ds;
    lam += ad * dlam;
    z += ad * dz;
    w += ad * dw;
    gap = x.dot(z) + s.dot(w);
  }

  QuantRegResult res;
  res.beta = -lam;
  res.iterations = iter;
  res.objective = check_loss_sum(X, y, res.beta, alpha);

  // Vertex polish: the optimum interpolates p observations; take the p most
  // interior dual coordinates and fit through them exactly.
  if (n >= p) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + p, order.end(),
                      [&](int a, int b) {
                        return std::min(x[a], 1.0 - x[a]) >
                               std::min(x[b], 1.0 - x[b]);
                      });
    std::vector<int> basis(order.begin(), order.begin() + p);
    Eigen::VectorXd beta_v;
    if (solve_basis(X, y, basis, &beta_v)) {
      const double obj_v = check_loss_sum(X, y, beta_v, alpha);
      if (obj_v <= res.objective) {
        res.beta = beta_v;
        res.objective = obj_v;
        res.polished = true;
      }
    }
  }
  return res;
}

}  // namespace epf
