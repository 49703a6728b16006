#include "epf/pipeline.hpp"

#include "epf/errors.hpp"
#include "epf/io.hpp"
#include "epf/probforecast.hpp"
#include "epf/quantreg.hpp"
#include "epf/scoring.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <utility>

namespace epf {

using nlohmann::json;

namespace {

ModelKind model_kind_from(const std::string& s) {
  if (s == "naive") return ModelKind::naive;
  if (s == "expert") return ModelKind::expert;
  if (s == "lear") return ModelKind::lear;
  throw ConfigError("unknown model kind '" + s + "'");
}

SynthSpec synth_from_json(const json& j, std::uint64_t default_seed) {
  SynthSpec s;
  s.seed = default_seed;
  if (j.contains("days")) s.days = j.at("days").get<int>();
  if (j.contains("start")) s.start = parse_date(j.at("start").get<std::string>());
  if (j.contains("base_level")) s.base_level = j.at("base_level").get<double>();
  if (j.contains("daily_amplitude")) s.daily_amplitude = j.at("daily_amplitude").get<double>();
  if (j.contains("weekly_amplitude")) s.weekly_amplitude = j.at("weekly_amplitude").get<double>();
  if (j.contains("ar1")) s.ar1 = j.at("ar1").get<double>();
  if (j.contains("noise_sd")) s.noise_sd = j.at("noise_sd").get<double>();
  if (j.contains("spike_prob")) s.spike_prob = j.at("spike_prob").get<double>();
  if (j.contains("spike_magnitude")) s.spike_magnitude = j.at("spike_magnitude").get<double>();
  if (j.contains("negative_prob")) s.negative_prob = j.at("negative_prob").get<double>();
  if (j.contains("negative_magnitude")) s.negative_magnitude = j.at("negative_magnitude").get<double>();
  if (j.contains("load_coupling")) s.load_coupling = j.at("load_coupling").get<double>();
  if (j.contains("res_coupling")) s.res_coupling = j.at("res_coupling").get<double>();
  if (j.contains("id_spread_sd")) s.id_spread_sd = j.at("id_spread_sd").get<double>();
  if (j.contains("bal_spread_sd")) s.bal_spread_sd = j.at("bal_spread_sd").get<double>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

json synth_to_json(const SynthSpec& s) {
  json j;
  j["days"] = s.days;
  j["start"] = format_date(s.start);
  j["base_level"] = s.base_level;
  j["daily_amplitude"] = s.daily_amplitude;
  j["weekly_amplitude"] = s.weekly_amplitude;
  j["ar1"] = s.ar1;
  j["noise_sd"] = s.noise_sd;
  j["spike_prob"] = s.spike_prob;
  j["spike_magnitude"] = s.spike_magnitude;
  j["negative_prob"] = s.negative_prob;
  j["negative_magnitude"] = s.negative_magnitude;
  j["load_coupling"] = s.load_coupling;
  j["res_coupling"] = s.res_coupling;
  j["id_spread_sd"] = s.id_spread_sd;
  j["bal_spread_sd"] = s.bal_spread_sd;
  j["seed"] = s.seed;
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (!csv_path && !synth) throw ConfigError("config needs a data source");
  if (csv_path && synth) throw ConfigError("config has two data sources");
  if (models.empty()) throw ConfigError("config lists no models");
  if (test_range.last < test_range.first) throw ConfigError("bad test range");
  if (prob.num_levels < 1) throw ConfigError("need at least one quantile level");
  if (prob.lookback_days < 1) throw ConfigError("lookback_days must be >= 1");
  if (prob.paths < 0) throw ConfigError("negative path count");
  if (strategies.battery) strategies.battery->validate();
}

RunConfig parse_run_config_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

  const json& data = j.at("data");
  if (data.contains("csv")) {
    cfg.csv_path = data.at("csv").get<std::string>();
  } else if (data.contains("synthetic")) {
    if (!j.contains("seed") && !data.at("synthetic").contains("seed")) {
      throw ConfigError("synthetic data requires an explicit seed");
    }
    cfg.synth = synth_from_json(data.at("synthetic"), cfg.seed);
  } else {
    throw ConfigError("data source must be 'csv' or 'synthetic'");
  }

  const json& range = j.at("test_range");
  cfg.test_range.first = parse_date(range.at("first").get<std::string>());
  cfg.test_range.last = parse_date(range.at("last").get<std::string>());

  for (const json& m : j.at("models")) {
    ModelConfig mc;
    mc.kind = model_kind_from(m.at("kind").get<std::string>());
    if (m.contains("window_days")) mc.options.window_days = m.at("window_days").get<int>();
    if (m.contains("vst")) mc.options.vst = m.at("vst").get<bool>();
    if (m.contains("cv_folds")) mc.options.cv_folds = m.at("cv_folds").get<int>();
    if (m.contains("relambda_every")) mc.options.relambda_every = m.at("relambda_every").get<int>();
    cfg.models.push_back(mc);
  }

  if (j.contains("probabilistic")) {
    const json& p = j.at("probabilistic");
    if (p.contains("method")) {
      const auto m = p.at("method").get<std::string>();
      if (m == "error_shift") {
        cfg.prob.method = ProbMethod::error_shift;
      } else if (m == "qra") {
        cfg.prob.method = ProbMethod::qra;
      } else {
        throw ConfigError("unknown probabilistic method '" + m + "'");
      }
    }
    if (p.contains("lookback_days")) cfg.prob.lookback_days = p.at("lookback_days").get<int>();
    if (p.contains("levels")) cfg.prob.num_levels = p.at("levels").get<int>();
    if (p.contains("paths")) cfg.prob.paths = p.at("paths").get<int>();
    if (p.contains("paths_lookback")) cfg.prob.paths_lookback = p.at("paths_lookback").get<int>();
    if (cfg.prob.paths > 0 && !j.contains("seed")) {
      throw ConfigError("path simulation requires an explicit seed");
    }
  }

  if (j.contains("strategies")) {
    const json& s = j.at("strategies");
    if (s.contains("spread")) cfg.strategies.spread = s.at("spread").get<bool>();
    if (s.contains("battery")) {
      const json& b = s.at("battery");
      BatteryConfig bc;
      if (b.contains("alpha")) bc.alpha = b.at("alpha").get<double>();
      if (b.contains("efficiency")) bc.efficiency = b.at("efficiency").get<double>();
      if (b.contains("capacity_mw")) bc.capacity_mw = b.at("capacity_mw").get<double>();
      if (b.contains("min_level_mw")) bc.min_level_mw = b.at("min_level_mw").get<double>();
      if (b.contains("mode")) {
        const auto m = b.at("mode").get<std::string>();
        if (m == "balancing_fallback") {
          bc.mode = BatteryMode::balancing_fallback;
        } else if (m == "next_day_close") {
          bc.mode = BatteryMode::next_day_close;
        } else {
          throw ConfigError("unknown battery mode '" + m + "'");
        }
      }
      cfg.strategies.battery = bc;
    }
  }

  if (j.contains("outdir")) cfg.outdir = j.at("outdir").get<std::string>();
  cfg.validate();
  return cfg;
}

RunConfig parse_run_config_file(const std::filesystem::path& path) {
  return parse_run_config_json(read_file(path));
}

SynthSpec parse_synth_spec_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth spec is not valid JSON: ") + e.what());
  }
  SynthSpec spec = synth_from_json(j, SynthSpec{}.seed);
  spec.validate();
  return spec;
}

std::string canonical_config_json(const RunConfig& config) {
  json j;
  j["seed"] = config.seed;
  if (config.csv_path) {
    j["data"]["csv"] = config.csv_path->string();
  } else {
    j["data"]["synthetic"] = synth_to_json(*config.synth);
  }
  j["test_range"]["first"] = format_date(config.test_range.first);
  j["test_range"]["last"] = format_date(config.test_range.last);
  j["models"] = json::array();
  for (const auto& m : config.models) {
    json mj;
    mj["kind"] = model_kind_name(m.kind);
    mj["window_days"] = m.options.window_days;
    mj["vst"] = m.options.vst;
    mj["cv_folds"] = m.options.cv_folds;
    mj["relambda_every"] = m.options.relambda_every;
    j["models"].push_back(mj);
  }
  j["probabilistic"]["method"] =
      config.prob.method == ProbMethod::error_shift ? "error_shift" : "qra";
  j["probabilistic"]["lookback_days"] = config.prob.lookback_days;
  j["probabilistic"]["levels"] = config.prob.num_levels;
  j["probabilistic"]["paths"] = config.prob.paths;
  j["probabilistic"]["paths_lookback"] = config.prob.paths_lookback;
  j["strategies"]["spread"] = config.strategies.spread;
  if (config.strategies.battery) {
    const auto& b = *config.strategies.battery;
    j["strategies"]["battery"]["alpha"] = b.alpha;
    j["strategies"]["battery"]["efficiency"] = b.efficiency;
    j["strategies"]["battery"]["capacity_mw"] = b.capacity_mw;
    j["strategies"]["battery"]["min_level_mw"] = b.min_level_mw;
    j["strategies"]["battery"]["mode"] =
        b.mode == BatteryMode::balancing_fallback ? "balancing_fallback"
                                                  : "next_day_close";
  }
  j["outdir"] = config.outdir.string();
  return j.dump(2);
}

namespace {

/// Files written so far; removed wholesale when a stage aborts.
class ArtifactTracker {
 public:
  explicit ArtifactTracker(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::filesystem::path declare(const std::string& name) {
    const auto p = dir_ / name;
    written_.push_back(p);
    return p;
  }

  void cleanup() {
    for (const auto& p : written_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }

  json hashes() const {
    json h = json::object();
    for (const auto& p : written_) {
      h[p.filename().string()] = fnv1a_hex(read_file(p));
    }
    return h;
  }

  const std::vector<std::filesystem::path>& files() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

[[noreturn]] void rethrow_tagged(const std::string& stage) {
  const std::string tag = "[" + stage + "] ";
  try {
    throw;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(tag + e.what(), e.last_iterate);
  } catch (const ParseError& e) {
    throw ParseError(tag + e.what());
  } catch (const GapError& e) {
    throw GapError(tag + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(tag + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const HistoryError& e) {
    throw HistoryError(tag + e.what());
  } catch (const DegenerateScaleError& e) {
    throw DegenerateScaleError(tag + e.what());
  } catch (const DegenerateTestError& e) {
    throw DegenerateTestError(tag + e.what());
  } catch (const Error& e) {
    throw Error(tag + e.what());
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ull);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

QuantileFan trim_last_day(const QuantileFan& fan) {
  QuantileFan out = fan;
  out.days.pop_back();
  out.storage.resize(out.days.size() * 24 * out.levels.size());
  return out;
}

json test_to_json(const TestResult& t) {
  json j;
  j["statistic"] = t.statistic;
  j["p_value"] = t.p_value;
  j["observations"] = t.observations;
  if (t.degenerate) j["degenerate"] = true;
  return j;
}

}  // namespace

RunArtifacts run_pipeline(const RunConfig& config) {
  config.validate();
  std::filesystem::create_directories(config.outdir);
  ArtifactTracker tracker(config.outdir);

  try {
    // ---- ingest ----------------------------------------------------------
    MarketDataset data;
    try {
      if (config.csv_path) {
        data = load_dataset(*config.csv_path).data;
      } else {
        data = synth_generate(*config.synth);
        save_dataset_csv(data, tracker.declare("dataset.csv"));
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("ingest");
    }

    json metrics;

    // ---- point models ----------------------------------------------------
    std::vector<ForecastSet> forecasts;
    std::optional<ForecastSet> id_forecasts;
    std::optional<ForecastSet> naive_fc;
    try {
      for (const auto& m : config.models) {
        RollingProvenance prov;
        ForecastSet fc = rolling_backtest(data, m.kind, config.test_range,
                                          m.options, &prov);
        save_forecast_csv(fc, tracker.declare("forecast_" + fc.model_id + ".csv"));

        json sidecar;
        sidecar["model"] = fc.model_id;
        sidecar["window_days"] = m.options.window_days;
        sidecar["vst"] = m.options.vst;
        if (m.kind == ModelKind::lear) {
          sidecar["lambda_by_hour"] = prov.lambda_by_hour;
          sidecar["nonzero_coefficients"] = prov.nonzero_coefficients;
        }
        std::ofstream side(tracker.declare("forecast_" + fc.model_id + ".json"));
        side << sidecar.dump(2) << '\n';

        if (m.kind == ModelKind::naive) naive_fc = fc;
        forecasts.push_back(std::move(fc));
      }
      if (!naive_fc) {
        RollingOptions opt;  // naive needs no window
        naive_fc = rolling_backtest(data, ModelKind::naive, config.test_range, opt);
      }
      if (config.strategies.spread) {
        RollingOptions opt = config.models.front().options;
        opt.target = PricePanel::id;
        id_forecasts = rolling_backtest(data, config.models.front().kind,
                                        config.test_range, opt);
        id_forecasts->model_id += "_id";
        save_forecast_csv(*id_forecasts,
                          tracker.declare("forecast_" + id_forecasts->model_id + ".csv"));
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("pointmodels");
    }

    // ---- scoring: point metrics and pairwise tests ------------------------
    std::vector<ErrorPanel> panels;
    try {
      const ErrorPanel naive_panel = ErrorPanel::from_forecast(*naive_fc, data);

      // In-sample naive MAE over everything before the test range feeds MASE.
      double insample_naive_mae = 0.0;
      {
        const int t0 = data.index_of(config.test_range.first);
        int count = 0;
        double total = 0.0;
        for (int d = 7; d < t0; ++d) {
          total += (data.prices_da.row(d) - data.prices_da.row(d - 7))
                       .cwiseAbs()
                       .sum();
          count += 24;
        }
        insample_naive_mae = count > 0 ? total / count : 0.0;
      }

      for (const auto& fc : forecasts) {
        ErrorPanel panel = ErrorPanel::from_forecast(fc, data);
        const PointMetrics pm = point_metrics(panel);
        json mj;
        mj["mae"] = pm.mae;
        mj["rmse"] = pm.rmse;
        if (point_metrics(naive_panel).mae > 0) {
          const RelativeMetrics rm = relative_metrics(
              panel, naive_panel,
              insample_naive_mae > 0 ? insample_naive_mae
                                     : point_metrics(naive_panel).mae);
          mj["rmae"] = rm.rmae;
          if (insample_naive_mae > 0) mj["mase"] = rm.mase;
        }
        metrics["models"][fc.model_id] = mj;
        panels.push_back(std::move(panel));
      }

      for (size_t a = 0; a < panels.size(); ++a) {
        for (size_t b = 0; b < panels.size(); ++b) {
          if (a == b) continue;
          const std::string key =
              panels[a].model_id + "_vs_" + panels[b].model_id;
          for (int p = 1; p <= 2; ++p) {
            const auto name = "dm_multivariate_p" + std::to_string(p);
            try {
              metrics["tests"][name][key] =
                  test_to_json(dm_test_multivariate(panels[a], panels[b], p));
            } catch (const Error& e) {
              metrics["tests"][name][key] = {{"skipped", e.what()}};
            }
          }
          try {
            metrics["tests"]["gw_lags1_p1"][key] =
                test_to_json(gw_test(daily_norm_losses(panels[a], 1),
                                     daily_norm_losses(panels[b], 1), 1));
          } catch (const Error& e) {
            metrics["tests"]["gw_lags1_p1"][key] = {{"skipped", e.what()}};
          }
        }
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("scoring");
    }

    // ---- probabilistic layer ----------------------------------------------
    std::vector<std::pair<std::string, QuantileFan>> fans;
    std::vector<PathEnsemble> ensembles;
    try {
      const auto levels = percentile_levels(config.prob.num_levels);
      if (config.prob.method == ProbMethod::error_shift) {
        for (const auto& fc : forecasts) {
          fans.emplace_back(fc.model_id,
                            error_shift_quantiles(fc, data, levels,
                                                  config.prob.lookback_days));
        }
      } else {
        // QRA: calibrate per (level, hour) on the first lookback_days of the
        // test range with all point models as experts, predict the rest.
        const int burn = config.prob.lookback_days;
        const int n_fc = forecasts.front().num_days();
        if (n_fc <= burn) {
          throw HistoryError("QRA needs more test days than lookback_days");
        }
        const int k = static_cast<int>(forecasts.size());
        std::vector<Date> fan_days(forecasts.front().days.begin() + burn,
                                   forecasts.front().days.end());
        QuantileFan fan = QuantileFan::empty(fan_days, levels);
        const Eigen::MatrixXd realized =
            realized_prices(data, forecasts.front().days);
        for (int h = 1; h <= 24; ++h) {
          Eigen::MatrixXd experts(burn, k);
          Eigen::VectorXd prices(burn);
          for (int d = 0; d < burn; ++d) {
            for (int e = 0; e < k; ++e) {
              experts(d, e) = forecasts[e].values(d, h - 1);
            }
            prices[d] = realized(d, h - 1);
          }
          std::vector<QraFit> fits;
          fits.reserve(levels.size());
          const DateRange calib{forecasts.front().days.front(),
                                forecasts.front().days[burn - 1]};
          for (double level : levels) {
            QraFit fit = qra_fit(experts, prices, level);
            fit.window = calib;
            fits.push_back(std::move(fit));
          }
          Eigen::VectorXd x(k);
          for (int d = burn; d < n_fc; ++d) {
            for (int e = 0; e < k; ++e) x[e] = forecasts[e].values(d, h - 1);
            const Eigen::VectorXd q = qra_predict(fits, x);
            for (int l = 0; l < fan.num_levels(); ++l) {
              fan.value(d - burn, h, l) = q[l];
            }
          }
        }
        fan.enforce_monotone();
        fans.emplace_back("qra", std::move(fan));
      }
      for (const auto& [name, fan] : fans) {
        save_fan_csv(fan, tracker.declare("fan_" + name + ".csv"));
      }

      if (config.prob.paths > 0) {
        const ForecastSet& fc = forecasts.front();
        for (int i = config.prob.paths_lookback; i < fc.num_days(); ++i) {
          ensembles.push_back(bootstrap_paths(
              fc, data, fc.days[i], config.prob.paths,
              config.prob.paths_lookback, mix_seed(config.seed, i + 1)));
        }
        if (!ensembles.empty()) {
          save_ensembles_csv(ensembles, tracker.declare("paths_" + fc.model_id + ".csv"));
        }
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("probforecast");
    }

    // ---- scoring: probabilistic -------------------------------------------
    try {
      for (const auto& [name, fan] : fans) {
        const Eigen::MatrixXd realized = realized_prices(data, fan.days);
        json pj;
        pj["aps"] = aggregate_pinball(fan, realized);
        pj["crps"] = mean_crps(fan, realized);
        for (double target : {0.5, 0.9}) {
          const double lo = (1.0 - target) / 2.0;
          const double hi = (1.0 + target) / 2.0;
          if (fan.level_index(lo) < 0 || fan.level_index(hi) < 0) continue;
          const CoverageStats cs = coverage_stats(fan, realized, lo, hi);
          json cj;
          cj["picp"] = cs.picp;
          cj["ace"] = cs.ace;
          try {
            cj["kupiec"] = test_to_json(kupiec_test(cs.hits));
            cj["christoffersen_cc"] = test_to_json(christoffersen_test(
                cs.hits, ChristoffersenKind::conditional_coverage));
          } catch (const Error& e) {
            cj["tests_skipped"] = e.what();
          }
          pj["coverage_" + std::to_string(static_cast<int>(target * 100))] = cj;
        }
        try {
          pj["berkowitz"] = test_to_json(berkowitz_test(pit_series(fan, realized)));
        } catch (const Error& e) {
          pj["berkowitz"] = {{"skipped", e.what()}};
        }
        metrics["probabilistic"][name] = pj;
      }
      if (!ensembles.empty()) {
        double total = 0.0;
        for (const auto& ens : ensembles) {
          const int idx = data.index_of(ens.day);
          total += energy_score(ens, data.prices_da.row(idx).transpose());
        }
        metrics["paths"]["energy_score_mean"] = total / ensembles.size();
        metrics["paths"]["ensemble_size"] = config.prob.paths;
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("scoring");
    }

    // ---- trading ----------------------------------------------------------
    try {
      if (config.strategies.spread) {
        if (!data.prices_id) {
          throw ConfigError("spread strategy needs an intraday price panel");
        }
        const ForecastSet& da_fc = forecasts.front();
        const Eigen::MatrixXi y = da_id_decision(da_fc, *id_forecasts);
        const TradeLedger ledger = spread_profit(y, data, da_fc.days);
        save_ledger_csv(ledger, tracker.declare("ledger_spread.csv"));

        json sj;
        sj["total_profit"] = ledger.total_profit();
        try {
          sj["sharpe_hourly"] = sharpe_ratio(ledger);
        } catch (const Error& e) {
          sj["sharpe_hourly"] = {{"skipped", e.what()}};
        }
        // Demand-side procurement cost of 1 MW per hour, bought in the
        // cheaper forecast market, against perfect foresight.
        double cost_fc = 0.0, cost_perfect = 0.0;
        for (int d = 0; d < da_fc.num_days(); ++d) {
          const int idx = data.index_of(da_fc.days[d]);
          for (int h = 0; h < 24; ++h) {
            const bool buy_da =
                da_fc.values(d, h) < id_forecasts->values(d, h);
            const double pda = data.prices_da(idx, h);
            const double pid = (*data.prices_id)(idx, h);
            cost_fc += buy_da ? pda : pid;
            cost_perfect += std::min(pda, pid);
          }
        }
        const FieiResult fr = fiei(cost_fc, cost_perfect);
        sj["fiei"] = fr.value;
        if (fr.negative_flagged) sj["fiei_negative_flagged"] = true;
        metrics["trading"]["spread"] = sj;
      }

      if (config.strategies.battery && !fans.empty()) {
        const BatteryConfig& bc = *config.strategies.battery;
        QuantileFan fan = fans.front().second;
        if (bc.mode == BatteryMode::next_day_close && !fan.days.empty() &&
            fan.days.back() == data.days.back()) {
          fan = trim_last_day(fan);
        }
        const TradeLedger ledger = run_battery_backtest(fan, data, bc);
        save_ledger_csv(ledger, tracker.declare("ledger_battery.csv"));

        json bj;
        bj["total_profit"] = ledger.total_profit();
        try {
          bj["sharpe_daily"] = sharpe_ratio(ledger);
        } catch (const Error& e) {
          bj["sharpe_daily"] = {{"skipped", e.what()}};
        }
        int buys = 0, sells = 0;
        for (const auto& e : ledger.entries) {
          buys += e.buy_accepted ? 1 : 0;
          sells += e.sell_accepted ? 1 : 0;
        }
        if (!ledger.entries.empty()) {
          bj["buy_acceptance_rate"] =
              static_cast<double>(buys) / ledger.entries.size();
          bj["sell_acceptance_rate"] =
              static_cast<double>(sells) / ledger.entries.size();
        }
        metrics["trading"]["battery"] = bj;
      }
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("trading");
    }

    // ---- reports ----------------------------------------------------------
    RunArtifacts artifacts;
    try {
      {
        std::ofstream out(tracker.declare("metrics.json"));
        out << metrics.dump(2) << '\n';
      }
      const std::string config_text = canonical_config_json(config);
      json manifest;
      manifest["version"] = kVersion;
      manifest["seed"] = config.seed;
      manifest["config"] = json::parse(config_text);
      manifest["config_hash"] = fnv1a_hex(config_text);
      manifest["artifacts"] = tracker.hashes();
      const auto manifest_path = config.outdir / "manifest.json";
      std::ofstream out(manifest_path);
      out << manifest.dump(2) << '\n';
      artifacts.manifest_path = manifest_path.string();
    } catch (...) {
      tracker.cleanup();
      rethrow_tagged("report");
    }
    artifacts.files = tracker.files();
    return artifacts;
  } catch (const Error&) {
    throw;
  }
}

RunArtifacts run_manifest(const std::filesystem::path& manifest_path,
                          const std::filesystem::path& outdir_override) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  RunConfig cfg = parse_run_config_json(manifest.at("config").dump());
  if (!outdir_override.empty()) cfg.outdir = outdir_override;
  return run_pipeline(cfg);
}

}  // namespace epf
