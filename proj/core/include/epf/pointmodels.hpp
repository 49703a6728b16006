#pragma once

#include "epf/dates.hpp"
#include "epf/marketdata.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace epf {

enum class Penalty { none, ridge, lasso, elasticnet };

/// Penalty specification for regularized_fit. The fitted objective is
///   (1/2N) * RSS + lambda1 * sum|b_i| + lambda2 * sum b_i^2
/// with the intercept always unpenalized.
struct RegularizationSpec {
  Penalty kind = Penalty::none;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const;
  static RegularizationSpec none() { return {}; }
  static RegularizationSpec lasso(double l1) {
    return {Penalty::lasso, l1, 0.0};
  }
  static RegularizationSpec ridge(double l2) {
    return {Penalty::ridge, 0.0, l2};
  }
  static RegularizationSpec elasticnet(double l1, double l2) {
    return {Penalty::elasticnet, l1, l2};
  }
};

struct ModelFit {
  Eigen::VectorXd coefficients;  // one per regressor
  double intercept = 0.0;
  bool has_intercept = true;
  RegularizationSpec spec;
  DateRange window{};            // calibration span (when known)
  int target_hour = 0;           // 1..24, 0 when not hour-specific
  std::vector<std::string> feature_names;
  bool rank_warning = false;     // set when the design was rank-deficient
  int sweeps = 0;                // coordinate-descent sweeps used

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  double predict_one(const Eigen::VectorXd& x) const;
  int nonzero_count(double tol = 0.0) const;
};

/// Out-of-sample point forecasts for a contiguous test range.
struct ForecastSet {
  std::vector<Date> days;
  Eigen::MatrixXd values;  // D_test x 24
  std::string model_id;

  int num_days() const { return static_cast<int>(days.size()); }
  int index_of(Date d) const;
};

/// Similar-day benchmark: hour h of `day` forecast by the price at day-7.
Eigen::VectorXd naive_forecast(const MarketDataset& data, Date day);

/// 15 regressors of the parsimonious expert model, in the documented order:
/// price lags (d-1, d-2, d-7) at the target hour, last price of d-1, max and
/// min of d-1, the two day-d exogenous values at the target hour, 7 weekday
/// dummies.
Eigen::VectorXd expert_features(const MarketDataset& data, Date day, int hour);
const std::vector<std::string>& expert_feature_names();

/// 247 regressors of the parameter-rich hourly design: 24 price lags for each
/// of days d-1, d-2, d-3, d-7; 24 values of each exogenous series for days d,
/// d-1, d-7; 7 weekday dummies. The vector is shared by all 24 hourly
/// regressions of day d, only the target differs.
Eigen::VectorXd lear_features(const MarketDataset& data, Date day);
const std::vector<std::string>& lear_feature_names();

constexpr int kExpertFeatureCount = 15;
constexpr int kLearFeatureCount = 247;

/// Least squares through a rank-revealing decomposition; rank-deficient
/// designs get the minimum-norm solution and a warning flag.
ModelFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 bool intercept = true);

struct CdOptions {
  bool standardize = true;  // internally scale columns to zero mean, unit var
  bool intercept = true;
  double tol = 1e-7;        // max coefficient change, standardized scale
  int max_sweeps = 10000;
  const Eigen::VectorXd* warm_start = nullptr;  // coefficients, original scale
};

/// Cyclic coordinate descent with soft-thresholding. With the built-in
/// standardize flag the penalty applies on the standardized scale (every
/// column weighted equally); pass pre-standardized columns and
/// standardize=false to penalize the design exactly as given. Throws
/// ConvergenceError (carrying the last iterate) if the sweep budget is
/// exhausted.
ModelFit regularized_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const RegularizationSpec& spec,
                         const CdOptions& options = {});

/// Objective evaluated at a candidate point, matching regularized_fit.
double penalized_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& beta, double intercept,
                           const RegularizationSpec& spec);

/// Smallest lambda1 for which the all-zero coefficient vector is optimal,
/// computed on the same internal scale regularized_fit uses.
double lasso_lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        bool standardize = true);

/// Log-spaced descending grid from lambda_max down to lambda_max * ratio.
std::vector<double> make_lambda_grid(double lambda_max, int size = 60,
                                     double ratio = 1e-4);

/// Forward-chaining (time-ordered) cross-validation over a descending grid;
/// picks the value minimizing mean validation MAE, ties resolved toward the
/// larger lambda.
RegularizationSpec select_lambda(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const std::vector<double>& grid, int folds,
                                 Penalty kind = Penalty::lasso,
                                 double lambda2 = 0.0);

enum class ModelKind { naive, expert, lear };
enum class PricePanel { da, id };

std::string model_kind_name(ModelKind kind);

struct RollingOptions {
  int window_days = 364;     // 52 full weeks keeps weekday balance
  bool vst = false;          // asinh VST per calibration window
  PricePanel target = PricePanel::da;
  int cv_folds = 3;
  int lambda_grid_size = 60;
  double lambda_grid_ratio = 1e-4;
  int relambda_every = 0;    // 0: select lambda once, at the first test day
};

/// Daily-recalibration backtest: for each test day, fit on the window ending
/// the day before (24 separate hourly regressions for expert/lear), predict
/// all 24 hours, advance one day. Forecasts for day d read only prices dated
/// <= d-1 plus day-d exogenous forecasts.
ForecastSet rolling_backtest(const MarketDataset& data, ModelKind kind,
                             DateRange test_range,
                             const RollingOptions& options = {});

/// Per-hour lambda values chosen during the last rolling_backtest call for
/// provenance reporting.
struct RollingProvenance {
  std::vector<double> lambda_by_hour;   // empty unless kind == lear
  int window_days = 0;
  int nonzero_coefficients = 0;         // summed over the last test day's fits
};

ForecastSet rolling_backtest(const MarketDataset& data, ModelKind kind,
                             DateRange test_range,
                             const RollingOptions& options,
                             RollingProvenance* provenance);

}  // namespace epf
