#pragma once

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"
#include "epf/probforecast.hpp"

#include <Eigen/Core>

#include <string>

namespace epf {

/// Realized DA prices aligned to a day list; throws if a day is missing.
Eigen::MatrixXd realized_prices(const MarketDataset& data,
                                const std::vector<Date>& days);

/// Out-of-sample errors, realized minus forecast.
struct ErrorPanel {
  Eigen::MatrixXd errors;  // D_test x 24
  std::string model_id;

  static ErrorPanel from_forecast(const ForecastSet& fc,
                                  const MarketDataset& data,
                                  PricePanel target = PricePanel::da);
};

struct PointMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};

PointMetrics point_metrics(const ErrorPanel& errors);

struct RelativeMetrics {
  double rmae = 0.0;  // MAE / out-of-sample naive MAE
  double mase = 0.0;  // MAE / in-sample naive MAE
};

RelativeMetrics relative_metrics(const ErrorPanel& errors,
                                 const ErrorPanel& naive_errors,
                                 double insample_naive_mae);

enum class LossKind { abs_error, squared_error, pinball, crps, energy };
enum class Granularity { hourly, daily };

/// Per-observation losses of one model, in time order.
struct LossSeries {
  Eigen::VectorXd values;
  LossKind kind = LossKind::abs_error;
  Granularity granularity = Granularity::daily;
};

/// Daily losses of one hour's forecasts.
LossSeries hour_losses(const ErrorPanel& errors, int hour, LossKind kind);

/// Daily p-norms of the 24-dimensional error vector, p in {1, 2}.
LossSeries daily_norm_losses(const ErrorPanel& errors, int p);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;       // two-sided for DM, canonical otherwise
  double p_one_sided = 1.0;   // DM only: H1 "model 1 worse"; 1 elsewhere
  std::string null_description;
  int observations = 0;
  bool degenerate = false;
};

/// Diebold-Mariano z-test on the loss differential. With long_run_variance
/// the denominator is a Newey-West estimate with floor(N^(1/3)) lags for
/// multi-step losses; otherwise the plain sample variance (1-step losses).
TestResult dm_test(const LossSeries& loss1, const LossSeries& loss2,
                   bool long_run_variance = false);

/// Per-hour variant: one independent test on that hour's daily losses.
TestResult dm_test_per_hour(const ErrorPanel& errors1, const ErrorPanel& errors2,
                            int hour, LossKind kind = LossKind::abs_error,
                            bool long_run_variance = false);

/// Multivariate variant: daily p-norms of the 24-dimensional error vectors.
TestResult dm_test_multivariate(const ErrorPanel& errors1,
                                const ErrorPanel& errors2, int p,
                                bool long_run_variance = false);

/// Giacomini-White conditional predictive ability: Wald test of phi = 0 in
/// the regression of the daily loss differential on a constant and its own
/// lags, with a heteroskedasticity-robust covariance.
TestResult gw_test(const LossSeries& delta, int lags = 1);
TestResult gw_test(const LossSeries& loss1, const LossSeries& loss2,
                   int lags = 1);

struct HitSeries {
  Eigen::VectorXi hits;  // 1 when the realized price fell inside the PI
  double nominal = 0.0;  // PINC
};

struct CoverageStats {
  HitSeries hits;
  double picp = 0.0;
  double pinc = 0.0;
  double ace = 0.0;  // picp - pinc
};

/// Hits and coverage of the closed interval [lower, upper] quantile pair.
CoverageStats coverage_stats(const QuantileFan& fan,
                             const Eigen::MatrixXd& prices, double lower_level,
                             double upper_level);

/// Unconditional coverage LR test (chi-square, 1 dof).
TestResult kupiec_test(const HitSeries& hits);

enum class ChristoffersenKind { independence, conditional_coverage };

/// Independence against a first-order Markov alternative (1 dof) or the joint
/// conditional-coverage test (2 dof).
TestResult christoffersen_test(const HitSeries& hits, ChristoffersenKind kind);

/// Probability integral transform of each realized price through the fan's
/// linearly interpolated CDF, flattened in (day, hour) order. Tails are
/// extrapolated with the nearest segment slope and clamped.
Eigen::VectorXd pit_series(const QuantileFan& fan,
                           const Eigen::MatrixXd& prices);

/// Joint LR test for zero mean, unit variance and no AR(1) dependence of the
/// normal-transformed PIT series (chi-square, 3 dof).
TestResult berkowitz_test(const Eigen::VectorXd& pit);

struct PinballResult {
  Eigen::MatrixXd cell_losses;  // D x 24
  double mean = 0.0;
};

PinballResult pinball(const QuantileFan& fan, const Eigen::MatrixXd& prices,
                      double level);

/// Mean pinball over all levels, hours and days (APS).
double aggregate_pinball(const QuantileFan& fan, const Eigen::MatrixXd& prices);

/// Sample CRPS estimator: mean|X_i - P| - (1/2M^2) sum |X_i - X_j|.
double crps_sample(const Eigen::VectorXd& samples, double price);

/// CRPS of one fan cell, treating the level-grid values as an equal-weight
/// sample.
double crps_fan_cell(const QuantileFan& fan, int day, int hour, double price);

double mean_crps(const QuantileFan& fan, const Eigen::MatrixXd& prices);

/// Energy score of an ensemble against the realized trajectory.
double energy_score(const Eigen::MatrixXd& paths, const Eigen::VectorXd& realized);
double energy_score(const PathEnsemble& ensemble, const Eigen::VectorXd& realized);

}  // namespace epf
