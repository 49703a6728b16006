// Microbenchmarks for the hot paths: coordinate-descent fits on the
// 247-regressor design, the quantile-regression solver, scoring rules and a
// full daily recalibration step.

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"
#include "epf/probforecast.hpp"
#include "epf/quantreg.hpp"
#include "epf/scoring.hpp"
#include "epf/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

epf::MarketDataset bench_dataset(int days) {
  epf::SynthSpec spec;
  spec.days = days;
  spec.seed = 42;
  return epf::synth_generate(spec);
}

struct LearProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

LearProblem lear_problem(int window) {
  const auto data = bench_dataset(window + 10);
  LearProblem p;
  p.X.resize(window, epf::kLearFeatureCount);
  for (int r = 0; r < window; ++r) {
    p.X.row(r) = epf::lear_features(data, data.days[7 + r]).transpose();
  }
  p.y = data.prices_da.middleRows(7, window).col(11);
  return p;
}

void BM_lasso_fit_247(benchmark::State& state) {
  const auto p = lear_problem(364);
  const double lam = 0.05 * epf::lasso_lambda_max(p.X, p.y);
  for (auto _ : state) {
    auto fit =
        epf::regularized_fit(p.X, p.y, epf::RegularizationSpec::lasso(lam));
    benchmark::DoNotOptimize(fit.coefficients.data());
  }
}
BENCHMARK(BM_lasso_fit_247);

void BM_lasso_path_247(benchmark::State& state) {
  const auto p = lear_problem(364);
  const auto grid =
      epf::make_lambda_grid(epf::lasso_lambda_max(p.X, p.y), 60, 1e-2);
  for (auto _ : state) {
    Eigen::VectorXd warm;
    for (const double lam : grid) {
      epf::CdOptions opt;
      if (warm.size() > 0) opt.warm_start = &warm;
      auto fit =
          epf::regularized_fit(p.X, p.y, epf::RegularizationSpec::lasso(lam), opt);
      warm = fit.coefficients;
    }
    benchmark::DoNotOptimize(warm.data());
  }
}
BENCHMARK(BM_lasso_path_247);

void BM_quantile_regression(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const int n = 182, k = 3;
  Eigen::MatrixXd X(n, k + 1);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (int j = 1; j <= k; ++j) X(i, j) = 40.0 + 5.0 * g(rng);
    y[i] = X.row(i).tail(k).mean() + 2.0 * g(rng);
  }
  for (auto _ : state) {
    auto res = epf::quantile_regression(X, y, 0.9);
    benchmark::DoNotOptimize(res.beta.data());
  }
}
BENCHMARK(BM_quantile_regression);

void BM_energy_score_100(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Eigen::MatrixXd paths(100, 24);
  Eigen::VectorXd realized(24);
  for (int i = 0; i < paths.size(); ++i) paths.data()[i] = g(rng);
  for (int h = 0; h < 24; ++h) realized[h] = g(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(epf::energy_score(paths, realized));
  }
}
BENCHMARK(BM_energy_score_100);

void BM_error_shift_fan(benchmark::State& state) {
  const auto data = bench_dataset(200);
  epf::ForecastSet fc;
  fc.model_id = "bench";
  fc.days.assign(data.days.begin() + 10, data.days.end());
  fc.values = data.prices_da.bottomRows(190);
  const auto levels = epf::percentile_levels(99);
  for (auto _ : state) {
    auto fan = epf::error_shift_quantiles(fc, data, levels, 90);
    benchmark::DoNotOptimize(fan.storage.data());
  }
}
BENCHMARK(BM_error_shift_fan);

void BM_expert_day(benchmark::State& state) {
  const auto data = bench_dataset(440);
  epf::RollingOptions opt;
  opt.window_days = 364;
  const epf::DateRange range{data.days[431], data.days[431]};
  for (auto _ : state) {
    auto fc = epf::rolling_backtest(data, epf::ModelKind::expert, range, opt);
    benchmark::DoNotOptimize(fc.values.data());
  }
}
BENCHMARK(BM_expert_day);

}  // namespace

BENCHMARK_MAIN();
