#pragma once

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace epf {

/// Per (day, hour) grid of quantile forecasts over a fixed level set,
/// non-decreasing across levels at each cell.
struct QuantileFan {
  std::vector<Date> days;
  std::vector<double> levels;   // strictly increasing, in (0,1)
  std::vector<double> storage;  // D*24*L, index ((d*24)+h-1)*L + l

  int num_days() const { return static_cast<int>(days.size()); }
  int num_levels() const { return static_cast<int>(levels.size()); }

  double value(int day, int hour, int level) const {
    return storage[static_cast<size_t>(day * 24 + hour - 1) * levels.size() +
                   level];
  }
  double& value(int day, int hour, int level) {
    return storage[static_cast<size_t>(day * 24 + hour - 1) * levels.size() +
                   level];
  }

  /// Index of a probability level, -1 if absent (1e-9 tolerance).
  int level_index(double level) const;
  int index_of(Date d) const;

  /// Sort values across levels at every cell (rearrangement repair).
  void enforce_monotone();
  bool is_monotone() const;

  static QuantileFan empty(std::vector<Date> days, std::vector<double> levels);
};

/// The default dense grid: 99 percentiles 0.01..0.99.
std::vector<double> percentile_levels(int n = 99);

/// Empirical quantile with linear CDF interpolation on a sorted sample.
double empirical_quantile(const std::vector<double>& sorted, double level);

/// Quantile forecasts by shifting the trailing empirical error distribution
/// of each hour by the point forecast. The first lookback_days forecast days
/// seed the error history, so the fan starts after them.
QuantileFan error_shift_quantiles(const ForecastSet& forecasts,
                                  const MarketDataset& data,
                                  const std::vector<double>& levels,
                                  int lookback_days);

/// Quantile regression weights over expert point forecasts for one
/// (level, hour) pair.
struct QraFit {
  double level = 0.5;
  Eigen::VectorXd beta;  // intercept first, then one weight per expert
  DateRange window{};
  double objective = 0.0;
};

/// Exact linear quantile regression of prices on K expert forecasts plus an
/// intercept. Requires N >= 10K; a constant expert column is rejected.
QraFit qra_fit(const Eigen::MatrixXd& experts, const Eigen::VectorXd& prices,
               double level);

/// Predicted quantiles for one (day, hour): X.beta per level, then sorted to
/// repair crossing. `fits` must be ordered by level.
Eigen::VectorXd qra_predict(const std::vector<QraFit>& fits,
                            const Eigen::VectorXd& expert_forecasts);

/// M simulated 24-hour price trajectories for one day.
struct PathEnsemble {
  Date day;
  Eigen::MatrixXd paths;  // M x 24
  std::uint64_t seed = 0;
};

/// Draw whole 24-dimensional daily error vectors with replacement from the
/// trailing history and add them to the day's point forecast, preserving the
/// intra-day dependence structure.
PathEnsemble bootstrap_paths(const ForecastSet& forecasts,
                             const MarketDataset& data, Date day, int num_paths,
                             int lookback_days, std::uint64_t seed);

}  // namespace epf
