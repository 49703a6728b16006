// Command-line front end: synthetic data generation, full pipeline runs,
// standalone scoring of forecast files, and battery trading backtests.

#include "epf/errors.hpp"
#include "epf/io.hpp"
#include "epf/pipeline.hpp"
#include "epf/probforecast.hpp"
#include "epf/scoring.hpp"
#include "epf/synth.hpp"
#include "epf/trading.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;

int cmd_generate(const std::string& config_path, const std::string& output,
                 std::int64_t seed_override, int days_override) {
  epf::SynthSpec spec;
  if (!config_path.empty()) {
    spec = epf::parse_synth_spec_json(epf::read_file(config_path));
  }
  if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);
  if (days_override > 0) spec.days = days_override;

  const epf::MarketDataset data = epf::synth_generate(spec);
  epf::save_dataset_csv(data, output);
  std::cout << "wrote " << output << " (" << data.num_days() << " days, seed "
            << spec.seed << ")\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& manifest_path,
            const std::string& outdir) {
  epf::RunArtifacts artifacts;
  if (!manifest_path.empty()) {
    artifacts = epf::run_manifest(manifest_path, outdir);
  } else {
    epf::RunConfig cfg = epf::parse_run_config_file(config_path);
    if (!outdir.empty()) cfg.outdir = outdir;
    artifacts = epf::run_pipeline(cfg);
  }
  for (const auto& f : artifacts.files) std::cout << "wrote " << f.string() << '\n';
  std::cout << "wrote " << artifacts.manifest_path << '\n';
  return 0;
}

int cmd_score(const std::string& forecast_path, const std::string& data_path,
              const std::string& output) {
  const epf::ForecastSet fc = epf::load_forecast_csv(forecast_path);
  const epf::MarketDataset data = epf::load_dataset(data_path).data;

  const epf::ErrorPanel panel = epf::ErrorPanel::from_forecast(fc, data);
  epf::ForecastSet naive;
  naive.model_id = "naive";
  naive.days = fc.days;
  naive.values.resize(fc.num_days(), 24);
  for (int d = 0; d < fc.num_days(); ++d) {
    naive.values.row(d) = epf::naive_forecast(data, fc.days[d]).transpose();
  }
  const epf::ErrorPanel naive_panel = epf::ErrorPanel::from_forecast(naive, data);

  const int t0 = data.index_of(fc.days.front());
  double insample_naive_mae = 0.0;
  int count = 0;
  for (int d = 7; d < t0; ++d) {
    insample_naive_mae +=
        (data.prices_da.row(d) - data.prices_da.row(d - 7)).cwiseAbs().sum();
    count += 24;
  }
  insample_naive_mae = count > 0 ? insample_naive_mae / count : 0.0;

  const epf::PointMetrics pm = epf::point_metrics(panel);
  json out;
  out["model"] = fc.model_id;
  out["days"] = fc.num_days();
  out["mae"] = pm.mae;
  out["rmse"] = pm.rmse;
  const epf::PointMetrics npm = epf::point_metrics(naive_panel);
  if (npm.mae > 0) {
    const epf::RelativeMetrics rm = epf::relative_metrics(
        panel, naive_panel,
        insample_naive_mae > 0 ? insample_naive_mae : npm.mae);
    out["rmae"] = rm.rmae;
    if (insample_naive_mae > 0) out["mase"] = rm.mase;
  }
  for (int p = 1; p <= 2; ++p) {
    try {
      const epf::TestResult t = epf::dm_test(
          epf::daily_norm_losses(panel, p), epf::daily_norm_losses(naive_panel, p));
      out["dm_vs_naive_p" + std::to_string(p)] = {
          {"statistic", t.statistic}, {"p_value", t.p_value}};
    } catch (const epf::Error& e) {
      out["dm_vs_naive_p" + std::to_string(p)] = {{"skipped", e.what()}};
    }
  }

  std::ofstream os(output);
  if (!os) throw epf::ConfigError("cannot write " + output);
  os << out.dump(2) << '\n';
  std::cout << "wrote " << output << '\n';
  return 0;
}

int cmd_trade(const std::string& fan_path, const std::string& data_path,
              double alpha, const std::string& mode, const std::string& output,
              const std::string& summary_path) {
  const epf::QuantileFan fan = epf::load_fan_csv(fan_path);
  const epf::MarketDataset data = epf::load_dataset(data_path).data;

  epf::BatteryConfig cfg;
  cfg.alpha = alpha;
  if (mode == "balancing_fallback") {
    cfg.mode = epf::BatteryMode::balancing_fallback;
  } else if (mode == "next_day_close") {
    cfg.mode = epf::BatteryMode::next_day_close;
  } else {
    throw epf::ConfigError("unknown battery mode '" + mode + "'");
  }

  const epf::TradeLedger ledger = epf::run_battery_backtest(fan, data, cfg);
  epf::save_ledger_csv(ledger, output);
  std::cout << "wrote " << output << '\n';

  json summary;
  summary["days"] = ledger.entries.size();
  summary["total_profit"] = ledger.total_profit();
  try {
    summary["sharpe_daily"] = epf::sharpe_ratio(ledger);
  } catch (const epf::Error& e) {
    summary["sharpe_daily"] = {{"skipped", e.what()}};
  }
  int buys = 0, sells = 0;
  for (const auto& e : ledger.entries) {
    buys += e.buy_accepted ? 1 : 0;
    sells += e.sell_accepted ? 1 : 0;
  }
  if (!ledger.entries.empty()) {
    summary["buy_acceptance_rate"] =
        static_cast<double>(buys) / ledger.entries.size();
    summary["sell_acceptance_rate"] =
        static_cast<double>(sells) / ledger.entries.size();
  }
  if (!summary_path.empty()) {
    std::ofstream os(summary_path);
    if (!os) throw epf::ConfigError("cannot write " + summary_path);
    os << summary.dump(2) << '\n';
    std::cout << "wrote " << summary_path << '\n';
  } else {
    std::cout << summary.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead electricity price forecasting toolkit"};
  app.require_subcommand(1);

  std::string gen_config, gen_output = "dataset.csv";
  std::int64_t gen_seed = -1;
  int gen_days = 0;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic market CSV");
  gen->add_option("-c,--config", gen_config, "SynthSpec JSON file");
  gen->add_option("-o,--output", gen_output, "Output CSV path");
  gen->add_option("--seed", gen_seed, "Override the RNG seed");
  gen->add_option("--days", gen_days, "Override the number of days");

  std::string run_config, run_manifest_path, run_outdir;
  auto* run = app.add_subcommand("run", "Run the full forecasting pipeline");
  run->add_option("-c,--config", run_config, "RunConfig JSON file");
  run->add_option("--manifest", run_manifest_path,
                  "Re-run the config embedded in a manifest");
  run->add_option("-o,--outdir", run_outdir, "Override the output directory");

  std::string score_forecast, score_data, score_output = "metrics.json";
  auto* score = app.add_subcommand("score", "Score a forecast CSV against data");
  score->add_option("--forecast", score_forecast, "Forecast CSV (date,h1..h24)")
      ->required();
  score->add_option("--data", score_data, "Market data CSV")->required();
  score->add_option("-o,--output", score_output, "Metrics JSON path");

  std::string trade_fan, trade_data, trade_output = "ledger.csv", trade_summary;
  std::string trade_mode = "balancing_fallback";
  double trade_alpha = 0.5;
  auto* trade = app.add_subcommand("trade", "Battery backtest from a fan CSV");
  trade->add_option("--fan", trade_fan, "Quantile fan CSV (date,hour,level,value)")
      ->required();
  trade->add_option("--data", trade_data, "Market data CSV")->required();
  trade->add_option("--alpha", trade_alpha, "Central PI level");
  trade->add_option("--mode", trade_mode,
                    "balancing_fallback or next_day_close");
  trade->add_option("-o,--output", trade_output, "Ledger CSV path");
  trade->add_option("--summary", trade_summary, "Summary JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_config, gen_output, gen_seed, gen_days);
    if (run->parsed()) {
      if (run_config.empty() && run_manifest_path.empty()) {
        throw epf::ConfigError("run needs --config or --manifest");
      }
      return cmd_run(run_config, run_manifest_path, run_outdir);
    }
    if (score->parsed()) return cmd_score(score_forecast, score_data, score_output);
    if (trade->parsed()) {
      return cmd_trade(trade_fan, trade_data, trade_alpha, trade_mode,
                       trade_output, trade_summary);
    }
  } catch (const epf::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
