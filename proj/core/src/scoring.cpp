#include "epf/scoring.hpp"

#include "epf/errors.hpp"

#include <Eigen/Dense>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace epf {

namespace {

double normal_cdf(double x) {
  static const boost::math::normal dist;
  return boost::math::cdf(dist, x);
}

double normal_quantile(double p) {
  static const boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double chi2_sf(double x, int dof) {
  if (x <= 0.0) return 1.0;
  const boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, x));
}

// x*log(x) with the 0*log(0) = 0 convention used by the LR tests.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

Eigen::MatrixXd realized_prices(const MarketDataset& data,
                                const std::vector<Date>& days) {
  Eigen::MatrixXd out(days.size(), 24);
  for (size_t i = 0; i < days.size(); ++i) {
    const int idx = data.index_of(days[i]);
    if (idx < 0) {
      throw ValidationError("no realized prices for " + format_date(days[i]));
    }
    out.row(i) = data.prices_da.row(idx);
  }
  return out;
}

ErrorPanel ErrorPanel::from_forecast(const ForecastSet& fc,
                                     const MarketDataset& data,
                                     PricePanel target) {
  ErrorPanel panel;
  panel.model_id = fc.model_id;
  panel.errors.resize(fc.num_days(), 24);
  const Eigen::MatrixXd& prices =
      target == PricePanel::da
          ? data.prices_da
          : (data.prices_id ? *data.prices_id
                            : throw ConfigError("no intraday panel"));
  for (int i = 0; i < fc.num_days(); ++i) {
    const int idx = data.index_of(fc.days[i]);
    if (idx < 0) {
      throw ValidationError("no realized prices for " +
                            format_date(fc.days[i]));
    }
    panel.errors.row(i) = prices.row(idx) - fc.values.row(i);
  }
  return panel;
}

PointMetrics point_metrics(const ErrorPanel& errors) {
  if (errors.errors.size() == 0) throw ValidationError("empty error panel");
  PointMetrics m;
  m.mae = errors.errors.cwiseAbs().mean();
  m.rmse = std::sqrt(errors.errors.array().square().mean());
  return m;
}

RelativeMetrics relative_metrics(const ErrorPanel& errors,
                                 const ErrorPanel& naive_errors,
                                 double insample_naive_mae) {
  const double mae = point_metrics(errors).mae;
  const double naive_mae = point_metrics(naive_errors).mae;
  if (naive_mae <= 0.0) {
    throw DegenerateScaleError("naive out-of-sample MAE is zero");
  }
  if (insample_naive_mae <= 0.0) {
    throw DegenerateScaleError("naive in-sample MAE is zero");
  }
  return RelativeMetrics{mae / naive_mae, mae / insample_naive_mae};
}

LossSeries hour_losses(const ErrorPanel& errors, int hour, LossKind kind) {
  if (hour < 1 || hour > 24) throw ValidationError("hour out of range");
  if (kind != LossKind::abs_error && kind != LossKind::squared_error) {
    throw ValidationError("hour_losses expects abs or squared losses");
  }
  LossSeries s;
  s.kind = kind;
  s.granularity = Granularity::daily;
  const auto col = errors.errors.col(hour - 1);
  s.values = kind == LossKind::abs_error
                 ? col.cwiseAbs()
                 : Eigen::VectorXd(col.array().square());
  return s;
}

LossSeries daily_norm_losses(const ErrorPanel& errors, int p) {
  if (p != 1 && p != 2) throw ValidationError("p-norm must be 1 or 2");
  LossSeries s;
  s.kind = p == 1 ? LossKind::abs_error : LossKind::squared_error;
  s.granularity = Granularity::daily;
  s.values.resize(errors.errors.rows());
  for (int d = 0; d < errors.errors.rows(); ++d) {
    s.values[d] = p == 1 ? errors.errors.row(d).lpNorm<1>()
                         : errors.errors.row(d).lpNorm<2>();
  }
  return s;
}

TestResult dm_test(const LossSeries& loss1, const LossSeries& loss2,
                   bool long_run_variance) {
  if (loss1.values.size() != loss2.values.size()) {
    throw ValidationError("loss series length mismatch");
  }
  const int n = static_cast<int>(loss1.values.size());
  if (n < 2) throw ValidationError("too few observations for DM test");
  const Eigen::VectorXd delta = loss1.values - loss2.values;
  const double mean = delta.mean();
  const Eigen::VectorXd centered = delta.array() - mean;

  double variance = centered.squaredNorm() / n;
  if (long_run_variance) {
    const int max_lag = static_cast<int>(std::floor(std::cbrt(n)));
    for (int lag = 1; lag <= max_lag; ++lag) {
      const double gamma =
          centered.head(n - lag).dot(centered.tail(n - lag)) / n;
      variance += 2.0 * (1.0 - static_cast<double>(lag) / (max_lag + 1)) * gamma;
    }
    variance = std::max(variance, 0.0);
  }
  if (variance <= 0.0) {
    throw DegenerateTestError("loss differential has zero variance");
  }

  TestResult r;
  r.statistic = std::sqrt(static_cast<double>(n)) * mean / std::sqrt(variance);
  r.p_value = 2.0 * normal_cdf(-std::abs(r.statistic));
  r.p_one_sided = 1.0 - normal_cdf(r.statistic);
  r.observations = n;
  r.null_description = "equal predictive accuracy (mean loss differential 0)";
  return r;
}

TestResult dm_test_per_hour(const ErrorPanel& errors1,
                            const ErrorPanel& errors2, int hour, LossKind kind,
                            bool long_run_variance) {
  return dm_test(hour_losses(errors1, hour, kind),
                 hour_losses(errors2, hour, kind), long_run_variance);
}

TestResult dm_test_multivariate(const ErrorPanel& errors1,
                                const ErrorPanel& errors2, int p,
                                bool long_run_variance) {
  return dm_test(daily_norm_losses(errors1, p), daily_norm_losses(errors2, p),
                 long_run_variance);
}

namespace {

TestResult wald_cpa(const Eigen::VectorXd& delta, int lags) {
  const int n = static_cast<int>(delta.size());
  const int k = lags + 1;
  if (n <= 10 * k) {
    throw ValidationError("loss differential too short for GW test");
  }
  const int rows = n - lags;
  Eigen::MatrixXd X(rows, k);
  Eigen::VectorXd y(rows);
  for (int t = 0; t < rows; ++t) {
    X(t, 0) = 1.0;
    for (int l = 1; l <= lags; ++l) X(t, l) = delta[t + lags - l];
    y[t] = delta[t + lags];
  }

  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) {
    throw DegenerateTestError("singular regressor matrix in GW test");
  }
  const Eigen::VectorXd phi = lu.solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * phi;

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (int t = 0; t < rows; ++t) {
    meat += resid[t] * resid[t] * X.row(t).transpose() * X.row(t);
  }
  const Eigen::MatrixXd bread = lu.inverse();
  const Eigen::MatrixXd cov = bread * meat * bread;
  Eigen::FullPivLU<Eigen::MatrixXd> covlu(cov);
  if (!covlu.isInvertible()) {
    throw DegenerateTestError("degenerate covariance in GW test");
  }

  TestResult r;
  r.statistic = phi.dot(covlu.solve(phi));
  r.p_value = chi2_sf(r.statistic, k);
  r.observations = rows;
  r.null_description = "conditional predictive ability (phi = 0)";
  return r;
}

}  // namespace

TestResult gw_test(const LossSeries& delta, int lags) {
  if (lags < 1) throw ValidationError("GW test needs lags >= 1");
  return wald_cpa(delta.values, lags);
}

TestResult gw_test(const LossSeries& loss1, const LossSeries& loss2,
                   int lags) {
  if (loss1.values.size() != loss2.values.size()) {
    throw ValidationError("loss series length mismatch");
  }
  LossSeries d;
  d.values = loss1.values - loss2.values;
  d.kind = loss1.kind;
  d.granularity = loss1.granularity;
  return gw_test(d, lags);
}

CoverageStats coverage_stats(const QuantileFan& fan,
                             const Eigen::MatrixXd& prices, double lower_level,
                             double upper_level) {
  const int lo = fan.level_index(lower_level);
  const int hi = fan.level_index(upper_level);
  if (lo < 0 || hi < 0) throw ConfigError("interval levels not in fan");
  if (upper_level <= lower_level) throw ConfigError("empty interval");
  if (prices.rows() != fan.num_days() || prices.cols() != 24) {
    throw ValidationError("price panel not aligned with fan");
  }

  CoverageStats cs;
  cs.pinc = upper_level - lower_level;
  cs.hits.nominal = cs.pinc;
  cs.hits.hits.resize(fan.num_days() * 24);
  int inside = 0;
  for (int d = 0; d < fan.num_days(); ++d) {
    for (int h = 1; h <= 24; ++h) {
      const double p = prices(d, h - 1);
      const bool hit = p >= fan.value(d, h, lo) && p <= fan.value(d, h, hi);
      cs.hits.hits[d * 24 + h - 1] = hit ? 1 : 0;
      inside += hit ? 1 : 0;
    }
  }
  cs.picp = static_cast<double>(inside) / cs.hits.hits.size();
  cs.ace = cs.picp - cs.pinc;
  return cs;
}

TestResult kupiec_test(const HitSeries& hits) {
  const int n = static_cast<int>(hits.hits.size());
  if (n < 30) throw ValidationError("kupiec_test needs at least 30 hits");
  const double alpha = hits.nominal;
  if (alpha <= 0.0 || alpha >= 1.0) throw ValidationError("bad nominal level");
  const int x = hits.hits.sum();
  const double phat = static_cast<double>(x) / n;

  const double ll_hat = xlogx(static_cast<double>(x)) +
                        xlogx(static_cast<double>(n - x)) -
                        xlogx(static_cast<double>(n));
  const double ll_null = x * std::log(alpha) + (n - x) * std::log(1.0 - alpha);

  TestResult r;
  r.statistic = std::max(0.0, 2.0 * (ll_hat - ll_null));
  r.p_value = chi2_sf(r.statistic, 1);
  r.observations = n;
  r.degenerate = x == 0 || x == n;
  r.null_description = "unconditional coverage at nominal " +
                       std::to_string(alpha) +
                       " (empirical " + std::to_string(phat) + ")";
  return r;
}

namespace {

struct TransitionCounts {
  double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
};

TransitionCounts count_transitions(const Eigen::VectorXi& hits) {
  TransitionCounts c;
  for (int t = 1; t < hits.size(); ++t) {
    const int prev = hits[t - 1];
    const int cur = hits[t];
    if (prev == 0 && cur == 0) c.n00 += 1;
    if (prev == 0 && cur == 1) c.n01 += 1;
    if (prev == 1 && cur == 0) c.n10 += 1;
    if (prev == 1 && cur == 1) c.n11 += 1;
  }
  return c;
}

double independence_lr(const TransitionCounts& c) {
  // Markov log-likelihood minus the pooled Bernoulli one, 0*log(0) = 0.
  const double markov = xlogx(c.n00) + xlogx(c.n01) - xlogx(c.n00 + c.n01) +
                        xlogx(c.n10) + xlogx(c.n11) - xlogx(c.n10 + c.n11);
  const double total = c.n00 + c.n01 + c.n10 + c.n11;
  const double pooled = xlogx(c.n00 + c.n10) + xlogx(c.n01 + c.n11) -
                        xlogx(total);
  return std::max(0.0, 2.0 * (markov - pooled));
}

}  // namespace

TestResult christoffersen_test(const HitSeries& hits,
                               ChristoffersenKind kind) {
  const int n = static_cast<int>(hits.hits.size());
  if (n < 30) throw ValidationError("christoffersen_test needs >= 30 hits");
  const TransitionCounts c = count_transitions(hits.hits);
  if (c.n00 + c.n01 == 0 || c.n10 + c.n11 == 0) {
    throw DegenerateTestError(
        "hit series never leaves one state, Markov test undefined");
  }

  TestResult r;
  r.observations = n;
  r.degenerate = c.n00 == 0 || c.n01 == 0 || c.n10 == 0 || c.n11 == 0;
  if (kind == ChristoffersenKind::independence) {
    r.statistic = independence_lr(c);
    r.p_value = chi2_sf(r.statistic, 1);
    r.null_description = "independent hits vs first-order Markov";
  } else {
    const TestResult uc = kupiec_test(hits);
    r.statistic = independence_lr(c) + uc.statistic;
    r.p_value = chi2_sf(r.statistic, 2);
    r.degenerate = r.degenerate || uc.degenerate;
    r.null_description = "conditional coverage (UC + independence)";
  }
  return r;
}

namespace {

// Piecewise-linear CDF through (value, level) points; nearest-segment slope
// in the tails, clamped to [0, first] and [last, 1]. Flat runs at x resolve
// to the midpoint of their level range.
double interp_cdf(const QuantileFan& fan, int day, int hour, double x) {
  const int l = fan.num_levels();
  const double v0 = fan.value(day, hour, 0);
  const double vl = fan.value(day, hour, l - 1);

  if (x < v0) {
    int j = 1;
    while (j < l && fan.value(day, hour, j) <= v0) ++j;
    if (j >= l) return x < v0 ? 0.0 : fan.levels[0];  // fully degenerate cell
    const double slope =
        (fan.levels[j] - fan.levels[0]) / (fan.value(day, hour, j) - v0);
    return std::clamp(fan.levels[0] + (x - v0) * slope, 0.0, fan.levels[0]);
  }
  if (x > vl) {
    int j = l - 2;
    while (j >= 0 && fan.value(day, hour, j) >= vl) --j;
    if (j < 0) return 1.0;
    const double slope = (fan.levels[l - 1] - fan.levels[j]) /
                         (vl - fan.value(day, hour, j));
    return std::clamp(fan.levels[l - 1] + (x - vl) * slope,
                      fan.levels[l - 1], 1.0);
  }

  // Locate x within the sorted values.
  int lo = 0, hi = l - 1;  // v[lo] <= x <= v[hi]
  int first_ge = l;
  {
    int a = 0, b = l - 1;
    while (a <= b) {
      const int mid = (a + b) / 2;
      if (fan.value(day, hour, mid) >= x) {
        first_ge = mid;
        b = mid - 1;
      } else {
        a = mid + 1;
      }
    }
  }
  if (first_ge < l && fan.value(day, hour, first_ge) == x) {
    int last_eq = first_ge;
    while (last_eq + 1 < l && fan.value(day, hour, last_eq + 1) == x) {
      ++last_eq;
    }
    return 0.5 * (fan.levels[first_ge] + fan.levels[last_eq]);
  }
  lo = first_ge - 1;
  hi = first_ge;
  const double va = fan.value(day, hour, lo);
  const double vb = fan.value(day, hour, hi);
  return fan.levels[lo] +
         (x - va) / (vb - va) * (fan.levels[hi] - fan.levels[lo]);
}

}  // namespace

Eigen::VectorXd pit_series(const QuantileFan& fan,
                           const Eigen::MatrixXd& prices) {
  if (fan.num_levels() < 19) {
    throw ValidationError("PIT needs a dense fan (>= 19 levels)");
  }
  if (prices.rows() != fan.num_days() || prices.cols() != 24) {
    throw ValidationError("price panel not aligned with fan");
  }
  Eigen::VectorXd pit(fan.num_days() * 24);
  for (int d = 0; d < fan.num_days(); ++d) {
    for (int h = 1; h <= 24; ++h) {
      pit[d * 24 + h - 1] = interp_cdf(fan, d, h, prices(d, h - 1));
    }
  }
  return pit;
}

TestResult berkowitz_test(const Eigen::VectorXd& pit) {
  const int n = static_cast<int>(pit.size());
  if (n < 50) throw ValidationError("berkowitz_test needs >= 50 observations");

  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    const double u = std::clamp(pit[i], 1e-6, 1.0 - 1e-6);
    z[i] = normal_quantile(u);
    if (!std::isfinite(z[i])) {
      throw ValidationError("non-finite normal transform of PIT");
    }
  }

  // Conditional ML of z_t = c + rho z_{t-1} + e_t via OLS on t = 2..n.
  const int m = n - 1;
  Eigen::MatrixXd X(m, 2);
  Eigen::VectorXd y(m);
  for (int t = 0; t < m; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = z[t];
    y[t] = z[t + 1];
  }
  const Eigen::VectorXd phi =
      (X.transpose() * X).ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd resid = y - X * phi;
  const double sigma2 = resid.squaredNorm() / m;
  if (sigma2 <= 0.0) {
    throw DegenerateTestError("zero residual variance in Berkowitz test");
  }

  const double ll_alt = -0.5 * m * (std::log(2.0 * M_PI * sigma2) + 1.0);
  const double ll_null =
      -0.5 * m * std::log(2.0 * M_PI) - 0.5 * y.squaredNorm();

  TestResult r;
  r.statistic = std::max(0.0, 2.0 * (ll_alt - ll_null));
  r.p_value = chi2_sf(r.statistic, 3);
  r.observations = n;
  r.null_description = "PIT standard normal and serially independent";
  return r;
}

PinballResult pinball(const QuantileFan& fan, const Eigen::MatrixXd& prices,
                      double level) {
  const int li = fan.level_index(level);
  if (li < 0) throw ConfigError("level not in fan");
  if (prices.rows() != fan.num_days() || prices.cols() != 24) {
    throw ValidationError("price panel not aligned with fan");
  }
  PinballResult res;
  res.cell_losses.resize(fan.num_days(), 24);
  for (int d = 0; d < fan.num_days(); ++d) {
    for (int h = 1; h <= 24; ++h) {
      const double q = fan.value(d, h, li);
      const double p = prices(d, h - 1);
      res.cell_losses(d, h - 1) =
          p < q ? (1.0 - level) * (q - p) : level * (p - q);
    }
  }
  res.mean = res.cell_losses.mean();
  return res;
}

double aggregate_pinball(const QuantileFan& fan,
                         const Eigen::MatrixXd& prices) {
  double total = 0.0;
  for (double level : fan.levels) {
    total += pinball(fan, prices, level).mean;
  }
  return total / fan.num_levels();
}

double crps_sample(const Eigen::VectorXd& samples, double price) {
  const int m = static_cast<int>(samples.size());
  if (m < 1) throw ValidationError("crps_sample needs at least one sample");
  const double term1 = (samples.array() - price).abs().mean();

  std::vector<double> sorted(samples.data(), samples.data() + m);
  std::sort(sorted.begin(), sorted.end());
  double pair_sum = 0.0;  // sum over i<j of (x_j - x_i)
  double prefix = 0.0;
  for (int i = 0; i < m; ++i) {
    pair_sum += i * sorted[i] - prefix;
    prefix += sorted[i];
  }
  const double term2 = pair_sum / (static_cast<double>(m) * m);
  return term1 - term2;
}

double crps_fan_cell(const QuantileFan& fan, int day, int hour, double price) {
  Eigen::VectorXd samples(fan.num_levels());
  for (int l = 0; l < fan.num_levels(); ++l) {
    samples[l] = fan.value(day, hour, l);
  }
  return crps_sample(samples, price);
}

double mean_crps(const QuantileFan& fan, const Eigen::MatrixXd& prices) {
  if (prices.rows() != fan.num_days() || prices.cols() != 24) {
    throw ValidationError("price panel not aligned with fan");
  }
  double total = 0.0;
  for (int d = 0; d < fan.num_days(); ++d) {
    for (int h = 1; h <= 24; ++h) {
      total += crps_fan_cell(fan, d, h, prices(d, h - 1));
    }
  }
  return total / (fan.num_days() * 24.0);
}

double energy_score(const Eigen::MatrixXd& paths,
                    const Eigen::VectorXd& realized) {
  const int m = static_cast<int>(paths.rows());
  if (m < 1) throw ValidationError("energy_score needs at least one path");
  if (paths.cols() != realized.size()) {
    throw ValidationError("path dimension mismatch");
  }
  double term1 = 0.0;
  for (int i = 0; i < m; ++i) {
    term1 += (paths.row(i).transpose() - realized).norm();
  }
  term1 /= m;

  double term2 = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      term2 += (paths.row(i) - paths.row(j)).norm();
    }
  }
  term2 /= static_cast<double>(m) * m;  // off-diagonal pairs counted once
  return term1 - term2;
}

double energy_score(const PathEnsemble& ensemble,
                    const Eigen::VectorXd& realized) {
  return energy_score(ensemble.paths, realized);
}

}  // namespace epf
