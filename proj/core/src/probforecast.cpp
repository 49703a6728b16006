#include "epf/probforecast.hpp"

#include "epf/errors.hpp"
#include "epf/quantreg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace epf {

int QuantileFan::level_index(double level) const {
  for (int i = 0; i < num_levels(); ++i) {
    if (std::abs(levels[i] - level) < 1e-9) return i;
  }
  return -1;
}

int QuantileFan::index_of(Date d) const {
  auto it = std::lower_bound(days.begin(), days.end(), d);
  if (it == days.end() || *it != d) return -1;
  return static_cast<int>(it - days.begin());
}

void QuantileFan::enforce_monotone() {
  const int l = num_levels();
  for (size_t cell = 0; cell + l <= storage.size(); cell += l) {
    std::sort(storage.begin() + cell, storage.begin() + cell + l);
  }
}

bool QuantileFan::is_monotone() const {
  const int l = num_levels();
  for (size_t cell = 0; cell + l <= storage.size(); cell += l) {
    for (int i = 1; i < l; ++i) {
      if (storage[cell + i] < storage[cell + i - 1]) return false;
    }
  }
  return true;
}

QuantileFan QuantileFan::empty(std::vector<Date> days,
                               std::vector<double> levels) {
  if (levels.empty()) throw ValidationError("empty level grid");
  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] <= 0.0 || levels[i] >= 1.0 ||
        (i > 0 && levels[i] <= levels[i - 1])) {
      throw ValidationError("levels must be strictly increasing in (0,1)");
    }
  }
  QuantileFan fan;
  fan.storage.assign(days.size() * 24 * levels.size(), 0.0);
  fan.days = std::move(days);
  fan.levels = std::move(levels);
  return fan;
}

std::vector<double> percentile_levels(int n) {
  std::vector<double> levels(n);
  for (int i = 0; i < n; ++i) levels[i] = static_cast<double>(i + 1) / (n + 1);
  return levels;
}

double empirical_quantile(const std::vector<double>& sorted, double level) {
  if (sorted.empty()) throw ValidationError("quantile of empty sample");
  if (level <= 0.0) return sorted.front();
  if (level >= 1.0) return sorted.back();
  const double h = (sorted.size() - 1) * level;
  const size_t lo = static_cast<size_t>(h);
  const double frac = h - lo;
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

QuantileFan error_shift_quantiles(const ForecastSet& forecasts,
                                  const MarketDataset& data,
                                  const std::vector<double>& levels,
                                  int lookback_days) {
  if (lookback_days < 1) throw ValidationError("lookback_days must be >= 1");
  const int n_fc = forecasts.num_days();
  if (n_fc <= lookback_days) {
    throw HistoryError("need more forecast days than lookback_days");
  }
  // Errors require realized prices for every forecast day used as history.
  std::vector<int> data_idx(n_fc);
  for (int i = 0; i < n_fc; ++i) {
    data_idx[i] = data.index_of(forecasts.days[i]);
    if (data_idx[i] < 0) {
      throw ValidationError("forecast day " + format_date(forecasts.days[i]) +
                            " not in dataset");
    }
  }

  std::vector<Date> fan_days(forecasts.days.begin() + lookback_days,
                             forecasts.days.end());
  QuantileFan fan = QuantileFan::empty(std::move(fan_days), levels);

  std::vector<double> window(lookback_days);
  for (int i = lookback_days; i < n_fc; ++i) {
    for (int h = 0; h < 24; ++h) {
      for (int j = 0; j < lookback_days; ++j) {
        const int src = i - lookback_days + j;
        window[j] =
            data.prices_da(data_idx[src], h) - forecasts.values(src, h);
      }
      std::sort(window.begin(), window.end());
      const double point = forecasts.values(i, h);
      for (int l = 0; l < fan.num_levels(); ++l) {
        fan.value(i - lookback_days, h + 1, l) =
            point + empirical_quantile(window, levels[l]);
      }
    }
  }
  fan.enforce_monotone();
  return fan;
}

QraFit qra_fit(const Eigen::MatrixXd& experts, const Eigen::VectorXd& prices,
               double level) {
  const int n = static_cast<int>(experts.rows());
  const int k = static_cast<int>(experts.cols());
  if (k < 1) throw ValidationError("qra_fit needs at least one expert");
  if (n != prices.size()) throw ValidationError("expert/price row mismatch");
  if (n < 10 * k) {
    throw ValidationError("qra_fit needs at least 10 observations per expert");
  }
  for (int j = 0; j < k; ++j) {
    const double sd =
        std::sqrt((experts.col(j).array() - experts.col(j).mean())
                      .square()
                      .mean());
    if (sd == 0.0) {
      throw ValidationError("expert column " + std::to_string(j) +
                            " is constant");
    }
  }

  Eigen::MatrixXd X(n, k + 1);
  X.col(0).setOnes();
  X.rightCols(k) = experts;
  const QuantRegResult qr = quantile_regression(X, prices, level);

  QraFit fit;
  fit.level = level;
  fit.beta = qr.beta;
  fit.objective = qr.objective;
  return fit;
}

Eigen::VectorXd qra_predict(const std::vector<QraFit>& fits,
                            const Eigen::VectorXd& expert_forecasts) {
  if (fits.empty()) throw ConfigError("no QRA fits supplied");
  Eigen::VectorXd out(fits.size());
  for (size_t i = 0; i < fits.size(); ++i) {
    const auto& beta = fits[i].beta;
    if (beta.size() != expert_forecasts.size() + 1) {
      throw ConfigError("QRA fit size does not match expert forecasts");
    }
    out[i] = beta[0] + beta.tail(expert_forecasts.size()).dot(expert_forecasts);
  }
  std::sort(out.begin(), out.end());  // rearrangement repairs crossing
  return out;
}

PathEnsemble bootstrap_paths(const ForecastSet& forecasts,
                             const MarketDataset& data, Date day, int num_paths,
                             int lookback_days, std::uint64_t seed) {
  if (num_paths < 1) throw ValidationError("num_paths must be >= 1");
  if (lookback_days < 1) throw ValidationError("lookback_days must be >= 1");
  const int fc_idx = forecasts.index_of(day);
  if (fc_idx < 0) throw ValidationError("no point forecast for " + format_date(day));
  if (fc_idx < lookback_days) {
    throw HistoryError("need lookback_days of forecast errors before " +
                       format_date(day));
  }

  Eigen::MatrixXd errors(lookback_days, 24);
  for (int j = 0; j < lookback_days; ++j) {
    const int src = fc_idx - lookback_days + j;
    const int di = data.index_of(forecasts.days[src]);
    if (di < 0) {
      throw ValidationError("forecast day " + format_date(forecasts.days[src]) +
                            " not in dataset");
    }
    errors.row(j) = data.prices_da.row(di) - forecasts.values.row(src);
  }

  PathEnsemble ens;
  ens.day = day;
  ens.seed = seed;
  ens.paths.resize(num_paths, 24);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, lookback_days - 1);
  const Eigen::RowVectorXd point = forecasts.values.row(fc_idx);
  for (int m = 0; m < num_paths; ++m) {
    ens.paths.row(m) = point + errors.row(pick(rng));
  }
  return ens;
}

}  // namespace epf
