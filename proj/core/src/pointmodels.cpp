#include "epf/pointmodels.hpp"

#include "epf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace epf {

void RegularizationSpec::validate() const {
  if (lambda1 < 0 || lambda2 < 0 || !std::isfinite(lambda1) ||
      !std::isfinite(lambda2)) {
    throw ValidationError("negative or non-finite penalty");
  }
  switch (kind) {
    case Penalty::none:
      if (lambda1 != 0 || lambda2 != 0)
        throw ValidationError("kind=none requires zero penalties");
      break;
    case Penalty::lasso:
      if (lambda2 != 0) throw ValidationError("lasso uses lambda1 only");
      break;
    case Penalty::ridge:
      if (lambda1 != 0) throw ValidationError("ridge uses lambda2 only");
      break;
    case Penalty::elasticnet:
      break;
  }
}

Eigen::VectorXd ModelFit::predict(const Eigen::MatrixXd& X) const {
  return (X * coefficients).array() + intercept;
}

double ModelFit::predict_one(const Eigen::VectorXd& x) const {
  return x.dot(coefficients) + intercept;
}

int ModelFit::nonzero_count(double tol) const {
  int n = 0;
  for (int i = 0; i < coefficients.size(); ++i) {
    if (std::abs(coefficients[i]) > tol) ++n;
  }
  return n;
}

int ForecastSet::index_of(Date d) const {
  auto it = std::lower_bound(days.begin(), days.end(), d);
  if (it == days.end() || *it != d) return -1;
  return static_cast<int>(it - days.begin());
}

namespace {

const Eigen::MatrixXd& target_panel(const MarketDataset& data,
                                    PricePanel target) {
  if (target == PricePanel::da) return data.prices_da;
  if (!data.prices_id) throw ConfigError("dataset has no intraday price panel");
  return *data.prices_id;
}

int require_index(const MarketDataset& data, Date day) {
  const int idx = data.index_of(day);
  if (idx < 0) throw ValidationError("day " + format_date(day) + " not in dataset");
  return idx;
}

int require_history(const MarketDataset& data, Date day) {
  const int idx = require_index(data, day);
  if (idx < 7) {
    throw HistoryError("need 7 days of history before " + format_date(day));
  }
  return idx;
}

}  // namespace

Eigen::VectorXd naive_forecast(const MarketDataset& data, Date day) {
  const int idx = require_history(data, day);
  return data.prices_da.row(idx - 7).transpose();
}

Eigen::VectorXd expert_features(const MarketDataset& data, Date day, int hour) {
  if (hour < 1 || hour > 24) throw ValidationError("hour out of range");
  const int idx = require_history(data, day);
  const int h = hour - 1;
  Eigen::VectorXd f(kExpertFeatureCount);
  f[0] = data.prices_da(idx - 1, h);
  f[1] = data.prices_da(idx - 2, h);
  f[2] = data.prices_da(idx - 7, h);
  f[3] = data.prices_da(idx - 1, 23);
  f[4] = data.prices_da.row(idx - 1).maxCoeff();
  f[5] = data.prices_da.row(idx - 1).minCoeff();
  f[6] = data.exog1(idx, h);
  f[7] = data.exog2(idx, h);
  f.segment(8, 7) = data.calendar.dummies.row(idx).transpose();
  return f;
}

const std::vector<std::string>& expert_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"price_lag1", "price_lag2", "price_lag7",
                                  "price_last", "price_max1", "price_min1",
                                  "load_fc",    "res_fc"};
    for (int j = 1; j <= 7; ++j) n.push_back("wd" + std::to_string(j));
    return n;
  }();
  return names;
}

Eigen::VectorXd lear_features(const MarketDataset& data, Date day) {
  const int idx = require_history(data, day);
  Eigen::VectorXd f(kLearFeatureCount);
  f.segment(0, 24) = data.prices_da.row(idx - 1).transpose();
  f.segment(24, 24) = data.prices_da.row(idx - 2).transpose();
  f.segment(48, 24) = data.prices_da.row(idx - 3).transpose();
  f.segment(72, 24) = data.prices_da.row(idx - 7).transpose();
  f.segment(96, 24) = data.exog1.row(idx).transpose();
  f.segment(120, 24) = data.exog1.row(idx - 1).transpose();
  f.segment(144, 24) = data.exog1.row(idx - 7).transpose();
  f.segment(168, 24) = data.exog2.row(idx).transpose();
  f.segment(192, 24) = data.exog2.row(idx - 1).transpose();
  f.segment(216, 24) = data.exog2.row(idx - 7).transpose();
  f.segment(240, 7) = data.calendar.dummies.row(idx).transpose();
  return f;
}

const std::vector<std::string>& lear_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    n.reserve(kLearFeatureCount);
    auto block = [&](const std::string& stem) {
      for (int i = 1; i <= 24; ++i) n.push_back(stem + std::to_string(i));
    };
    block("p_lag1_h");
    block("p_lag2_h");
    block("p_lag3_h");
    block("p_lag7_h");
    block("load_d_h");
    block("load_lag1_h");
    block("load_lag7_h");
    block("res_d_h");
    block("res_lag1_h");
    block("res_lag7_h");
    for (int j = 1; j <= 7; ++j) n.push_back("wd" + std::to_string(j));
    return n;
  }();
  return names;
}

ModelFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 bool intercept) {
  if (!X.allFinite() || !y.allFinite()) {
    throw ValidationError("non-finite input to ols_fit");
  }
  if (X.rows() != y.size()) throw ValidationError("X/y row mismatch");
  if (X.rows() < X.cols() + (intercept ? 1 : 0)) {
    throw ValidationError("fewer rows than regressors");
  }
  Eigen::MatrixXd design;
  if (intercept) {
    design.resize(X.rows(), X.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(X.cols()) = X;
  } else {
    design = X;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd sol = cod.solve(y);

  ModelFit fit;
  fit.has_intercept = intercept;
  fit.rank_warning = cod.rank() < design.cols();
  if (intercept) {
    fit.intercept = sol[0];
    fit.coefficients = sol.tail(X.cols());
  } else {
    fit.intercept = 0.0;
    fit.coefficients = sol;
  }
  return fit;
}

namespace {

inline double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

struct WorkingScale {
  Eigen::VectorXd mean;   // 0 when not centering
  Eigen::VectorXd scale;  // 1 when not scaling; 0 marks an excluded column
  double y_mean = 0.0;
};

}  // namespace

ModelFit regularized_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const RegularizationSpec& spec,
                         const CdOptions& options) {
  spec.validate();
  if (!X.allFinite() || !y.allFinite()) {
    throw ValidationError("non-finite input to regularized_fit");
  }
  const int n = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  if (n != y.size() || n == 0 || k == 0) {
    throw ValidationError("bad design dimensions");
  }

  WorkingScale ws;
  ws.mean = options.intercept ? Eigen::VectorXd(X.colwise().mean())
                              : Eigen::VectorXd::Zero(k);
  ws.scale = Eigen::VectorXd::Ones(k);
  Eigen::MatrixXd Xw = X;
  if (options.intercept) Xw.rowwise() -= ws.mean.transpose();
  if (options.standardize) {
    for (int j = 0; j < k; ++j) {
      const double s = std::sqrt(Xw.col(j).squaredNorm() / n);
      ws.scale[j] = s;
      if (s > 0) Xw.col(j) /= s;
    }
  }
  ws.y_mean = options.intercept ? y.mean() : 0.0;
  Eigen::VectorXd yw = y.array() - ws.y_mean;

  // Per-column curvature (1/N) x_j'x_j; zero marks a constant column whose
  // coefficient stays pinned at 0.
  Eigen::VectorXd q(k);
  for (int j = 0; j < k; ++j) q[j] = Xw.col(j).squaredNorm() / n;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (options.warm_start && options.warm_start->size() == k) {
    for (int j = 0; j < k; ++j) {
      beta[j] = (*options.warm_start)[j] * ws.scale[j];
      if (q[j] == 0.0) beta[j] = 0.0;
    }
  }
  Eigen::VectorXd r = yw - Xw * beta;

  const double l1 = spec.lambda1;
  const double l2 = spec.lambda2;
  int sweeps = 0;
  bool converged = false;
  std::vector<int> active;

  auto update = [&](int j) -> double {
    if (q[j] == 0.0) return 0.0;
    const double rho = Xw.col(j).dot(r) / n + q[j] * beta[j];
    const double bnew = soft_threshold(rho, l1) / (q[j] + 2.0 * l2);
    const double delta = bnew - beta[j];
    if (delta != 0.0) {
      r -= Xw.col(j) * delta;
      beta[j] = bnew;
    }
    return std::abs(delta);
  };

  while (sweeps < options.max_sweeps) {
    // Full sweep; collect the active set.
    double max_delta = 0.0;
    active.clear();
    for (int j = 0; j < k; ++j) {
      max_delta = std::max(max_delta, update(j));
      if (beta[j] != 0.0) active.push_back(j);
    }
    ++sweeps;
    if (max_delta < options.tol) {
      converged = true;
      break;
    }
    // Inner sweeps restricted to the active set.
    while (sweeps < options.max_sweeps) {
      double inner_delta = 0.0;
      for (int j : active) inner_delta = std::max(inner_delta, update(j));
      ++sweeps;
      if (inner_delta < options.tol) break;
    }
  }

  ModelFit fit;
  fit.spec = spec;
  fit.has_intercept = options.intercept;
  fit.sweeps = sweeps;
  fit.coefficients.resize(k);
  for (int j = 0; j < k; ++j) {
    fit.coefficients[j] = ws.scale[j] > 0 ? beta[j] / ws.scale[j] : 0.0;
  }
  fit.intercept =
      options.intercept ? ws.y_mean - ws.mean.dot(fit.coefficients) : 0.0;

  if (!converged) {
    throw ConvergenceError("coordinate descent did not converge in " +
                               std::to_string(options.max_sweeps) + " sweeps",
                           fit.coefficients);
  }
  return fit;
}

double penalized_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& beta, double intercept,
                           const RegularizationSpec& spec) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd r = y - X * beta - Eigen::VectorXd::Constant(y.size(), intercept);
  return r.squaredNorm() / (2.0 * n) + spec.lambda1 * beta.lpNorm<1>() +
         spec.lambda2 * beta.squaredNorm();
}

double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        bool standardize) {
  const int n = static_cast<int>(X.rows());
  const Eigen::VectorXd yc = y.array() - y.mean();
  double lmax = 0.0;
  for (int j = 0; j < X.cols(); ++j) {
    Eigen::VectorXd xc = X.col(j).array() - X.col(j).mean();
    if (standardize) {
      const double s = std::sqrt(xc.squaredNorm() / n);
      if (s > 0) xc /= s;
    }
    lmax = std::max(lmax, std::abs(xc.dot(yc)) / n);
  }
  return lmax;
}

std::vector<double> make_lambda_grid(double lambda_max, int size,
                                     double ratio) {
  if (size < 1 || lambda_max <= 0 || ratio <= 0 || ratio >= 1) {
    throw ValidationError("bad lambda grid parameters");
  }
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double step = std::log(ratio) / (size - 1);
  for (int i = 0; i < size; ++i) grid[i] = lambda_max * std::exp(step * i);
  return grid;
}

RegularizationSpec select_lambda(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const std::vector<double>& grid, int folds,
                                 Penalty kind, double lambda2) {
  if (grid.empty()) throw ValidationError("empty lambda grid");
  for (size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] >= grid[i - 1]) {
      throw ValidationError("lambda grid must be strictly descending");
    }
  }
  const int n = static_cast<int>(X.rows());
  if (folds < 2) throw ValidationError("need at least 2 folds");
  const int blocks = folds + 1;
  if (n < 2 * blocks) throw ValidationError("too few rows for forward-chaining folds");

  auto spec_for = [&](double lam) {
    switch (kind) {
      case Penalty::lasso:
        return RegularizationSpec::lasso(lam);
      case Penalty::ridge:
        return RegularizationSpec::ridge(lam);
      case Penalty::elasticnet:
        return RegularizationSpec::elasticnet(lam, lambda2);
      default:
        throw ValidationError("select_lambda needs a penalized kind");
    }
  };

  std::vector<double> mean_mae(grid.size(), 0.0);
  for (int f = 1; f < blocks; ++f) {
    const int train_end = (n * f) / blocks;
    const int val_end = (n * (f + 1)) / blocks;
    const int n_val = val_end - train_end;
    const Eigen::MatrixXd Xtr = X.topRows(train_end);
    const Eigen::VectorXd ytr = y.head(train_end);
    const Eigen::MatrixXd Xval = X.middleRows(train_end, n_val);
    const Eigen::VectorXd yval = y.segment(train_end, n_val);

    Eigen::VectorXd warm;
    for (size_t g = 0; g < grid.size(); ++g) {
      CdOptions opt;
      // Validation MAE is insensitive to the last digits of the coefficients,
      // so the selection path runs looser than the final fit.
      opt.tol = 1e-5;
      if (warm.size() > 0) opt.warm_start = &warm;
      const ModelFit fit = regularized_fit(Xtr, ytr, spec_for(grid[g]), opt);
      warm = fit.coefficients;
      mean_mae[g] += (yval - fit.predict(Xval)).cwiseAbs().mean() / folds;
    }
  }

  size_t best = 0;
  for (size_t g = 1; g < grid.size(); ++g) {
    if (mean_mae[g] < mean_mae[best]) best = g;  // ties keep the larger lambda
  }
  return spec_for(grid[best]);
}

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::naive:
      return "naive";
    case ModelKind::expert:
      return "expert";
    case ModelKind::lear:
      return "lear";
  }
  return "unknown";
}

namespace {

struct DayContext {
  MarketDataset sub;          // window + 7 history days + the test day
  DatasetTransform transform; // identity when VST is off
  bool vst = false;
};

DayContext make_day_context(const MarketDataset& data, int day_idx,
                            const RollingOptions& opt) {
  const int span = opt.window_days + 7;
  DayContext ctx;
  ctx.vst = opt.vst;
  MarketDataset sub = data.slice(day_idx - span, span + 1);
  if (opt.vst) {
    // Parameters come from the history only; the test day is transformed with
    // them but its price is never read.
    ctx.transform = fit_vst(sub.slice(0, span));
    ctx.sub = apply_vst(sub, ctx.transform);
  } else {
    ctx.sub = std::move(sub);
  }
  return ctx;
}

double finish_forecast(double value, const DayContext& ctx) {
  if (!ctx.vst) return value;
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = value;
  return invert_vst(m, ctx.transform.price)(0, 0);
}

}  // namespace

ForecastSet rolling_backtest(const MarketDataset& data, ModelKind kind,
                             DateRange test_range,
                             const RollingOptions& options) {
  return rolling_backtest(data, kind, test_range, options, nullptr);
}

ForecastSet rolling_backtest(const MarketDataset& data, ModelKind kind,
                             DateRange test_range,
                             const RollingOptions& options,
                             RollingProvenance* provenance) {
  if (options.window_days < 8) throw ValidationError("window too short");
  const int t0 = data.index_of(test_range.first);
  const int t1 = data.index_of(test_range.last);
  if (t0 < 0 || t1 < 0 || t1 < t0) throw ValidationError("bad test range");
  if (kind != ModelKind::naive && t0 < options.window_days + 7) {
    throw HistoryError("need window_days + 7 days before the first test day");
  }
  if (kind == ModelKind::naive && t0 < 7) {
    throw HistoryError("need 7 days before the first test day");
  }
  target_panel(data, options.target);  // fail early if the panel is missing

  const int n_test = t1 - t0 + 1;
  ForecastSet fs;
  fs.model_id = model_kind_name(kind);
  fs.days.assign(data.days.begin() + t0, data.days.begin() + t1 + 1);
  fs.values.resize(n_test, 24);

  if (provenance) {
    *provenance = RollingProvenance{};
    provenance->window_days = options.window_days;
  }

  if (kind == ModelKind::naive) {
    const Eigen::MatrixXd& panel = target_panel(data, options.target);
    for (int i = 0; i < n_test; ++i) {
      fs.values.row(i) = panel.row(t0 + i - 7);
    }
    return fs;
  }

  std::vector<RegularizationSpec> hour_spec(24);
  std::vector<Eigen::VectorXd> warm(24);
  bool lambda_ready = false;

  for (int i = 0; i < n_test; ++i) {
    const int day_idx = t0 + i;
    const DayContext ctx = make_day_context(data, day_idx, options);
    const Eigen::MatrixXd& y_panel = target_panel(ctx.sub, options.target);
    const Date day = data.days[day_idx];
    int day_nnz = 0;

    if (kind == ModelKind::expert) {
      for (int h = 1; h <= 24; ++h) {
        Eigen::MatrixXd X(options.window_days, kExpertFeatureCount);
        Eigen::VectorXd y(options.window_days);
        for (int r = 0; r < options.window_days; ++r) {
          X.row(r) = expert_features(ctx.sub, ctx.sub.days[7 + r], h).transpose();
          y[r] = y_panel(7 + r, h - 1);
        }
        // Weekday dummies provide the level, no separate intercept.
        ModelFit fit = ols_fit(X, y, /*intercept=*/false);
        const double raw = fit.predict_one(expert_features(ctx.sub, day, h));
        fs.values(i, h - 1) = finish_forecast(raw, ctx);
      }
      continue;
    }

    // LEAR: the 247-regressor design is shared by all 24 hourly fits.
    Eigen::MatrixXd X(options.window_days, kLearFeatureCount);
    for (int r = 0; r < options.window_days; ++r) {
      X.row(r) = lear_features(ctx.sub, ctx.sub.days[7 + r]).transpose();
    }
    const Eigen::VectorXd x_day = lear_features(ctx.sub, day);

    const bool select_now =
        !lambda_ready ||
        (options.relambda_every > 0 && i % options.relambda_every == 0);
    // Smallest forward-chaining training block; when it has fewer rows than
    // regressors, tiny lambdas make the CV fits ill-posed, so the grid floor
    // rises to 1e-2 of lambda_max.
    const int min_train = options.window_days / (options.cv_folds + 1);
    const double grid_ratio = min_train < kLearFeatureCount
                                  ? std::max(options.lambda_grid_ratio, 1e-2)
                                  : options.lambda_grid_ratio;
    for (int h = 1; h <= 24; ++h) {
      const Eigen::VectorXd y = y_panel.middleRows(7, options.window_days).col(h - 1);
      if (select_now) {
        const double lmax = lasso_lambda_max(X, y);
        const auto grid =
            make_lambda_grid(lmax, options.lambda_grid_size, grid_ratio);
        hour_spec[h - 1] = select_lambda(X, y, grid, options.cv_folds);
      }
      CdOptions opt;
      if (warm[h - 1].size() > 0) opt.warm_start = &warm[h - 1];
      const ModelFit fit = regularized_fit(X, y, hour_spec[h - 1], opt);
      warm[h - 1] = fit.coefficients;
      day_nnz += fit.nonzero_count();
      fs.values(i, h - 1) = finish_forecast(fit.predict_one(x_day), ctx);
    }
    lambda_ready = true;

    if (provenance && i == n_test - 1) {
      provenance->lambda_by_hour.resize(24);
      for (int h = 0; h < 24; ++h) {
        provenance->lambda_by_hour[h] = hour_spec[h].lambda1;
      }
      provenance->nonzero_coefficients = day_nnz;
    }
  }
  return fs;
}

}  // namespace epf
