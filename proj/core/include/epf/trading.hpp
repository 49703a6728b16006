#pragma once

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"
#include "epf/probforecast.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace epf {

enum class StrategyKind { da_id_spread, battery };

/// One settled decision: hourly for the spread strategy, daily for the
/// battery strategy. Unused fields stay at their defaults.
struct TradeRecord {
  Date day{};
  int hour = 0;               // 1..24, 0 for daily records
  int decision = 0;           // spread: Y in {0,1}
  int buy_hour = 0;           // battery: h1
  int sell_hour = 0;          // battery: h2
  double bid = 0.0;           // battery: limit price of the buy order
  double ask = 0.0;           // battery: limit price of the sell order
  bool buy_accepted = true;
  bool sell_accepted = true;
  double buy_price = 0.0;     // executed price paid (battery)
  double sell_price = 0.0;    // executed price received per MWh (battery)
  double profit = 0.0;
  double cumulative = 0.0;
};

struct TradeLedger {
  StrategyKind kind = StrategyKind::da_id_spread;
  std::vector<TradeRecord> entries;

  double total_profit() const;
  Eigen::VectorXd profits() const;
};

/// Decision panel: sell day-ahead (Y=1) when the DA forecast exceeds the ID
/// forecast, otherwise sell intraday; ties go to the ID market.
Eigen::MatrixXi da_id_decision(const ForecastSet& da_fc,
                               const ForecastSet& id_fc);

/// Settle the decision panel against realized DA and ID prices. Profit per
/// cell is the additional income over the always-sell-DA benchmark.
TradeLedger spread_profit(const Eigen::MatrixXi& decisions,
                          const MarketDataset& data,
                          const std::vector<Date>& days);

/// Mean revenue over its standard deviation (sample, N-1).
double sharpe_ratio(const TradeLedger& ledger);

struct FieiResult {
  double value = 0.0;
  bool negative_flagged = false;  // forecast cost below perfect-foresight cost
};

/// Forecast inaccuracy economic impact: (cost(fc) - cost(perfect)) / cost(fc).
FieiResult fiei(double cost_with_forecast, double cost_perfect);

/// Limit-order pair for one day: buy buy_mw at bid in hour h1, sell sell_mw
/// at ask in hour h2, h1 < h2.
struct BatteryOrder {
  Date day{};
  int h1 = 0;
  int h2 = 0;
  double bid_price = 0.0;   // upper PI bound at h1
  double ask_price = 0.0;   // lower PI bound at h2
  double buy_mw = 1.0;
  double sell_mw = 0.8;
};

enum class BatteryMode { balancing_fallback, next_day_close };

struct BatteryConfig {
  double capacity_mw = 1.25;
  double efficiency = 0.8;        // sell volume per MW bought
  double min_level_mw = 0.25;
  double alpha = 0.5;             // central PI level of the quantile picks
  BatteryMode mode = BatteryMode::balancing_fallback;

  void validate() const;
};

/// Pick (h1, h2) maximizing 0.8 * lower(h2) - upper(h1) over the 276 ordered
/// pairs h1 < h2; ties resolved by smallest h1, then smallest h2.
BatteryOrder battery_optimize(const QuantileFan& fan, Date day,
                              const BatteryConfig& config);

/// Settle one order against realized prices: a leg executes at the DA price
/// when the limit allows it (weak inequality); a rejected leg transacts at
/// the balancing price, or at the next day's DA price for the same hour in
/// next_day_close mode. The efficiency factor applies to all sold volume.
TradeRecord battery_settle(const BatteryOrder& order, const MarketDataset& data,
                           const BatteryConfig& config);

/// One order pair per fan day, settled per mode, with cumulative profit.
TradeLedger run_battery_backtest(const QuantileFan& fan,
                                 const MarketDataset& data,
                                 const BatteryConfig& config);

}  // namespace epf
