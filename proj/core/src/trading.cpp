#include "epf/trading.hpp"

#include "epf/errors.hpp"

#include <cmath>
#include <limits>

namespace epf {

double TradeLedger::total_profit() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.profit;
  return total;
}

Eigen::VectorXd TradeLedger::profits() const {
  Eigen::VectorXd p(entries.size());
  for (size_t i = 0; i < entries.size(); ++i) p[i] = entries[i].profit;
  return p;
}

Eigen::MatrixXi da_id_decision(const ForecastSet& da_fc,
                               const ForecastSet& id_fc) {
  if (da_fc.days != id_fc.days) {
    throw ConfigError("DA and ID forecast panels are not aligned");
  }
  Eigen::MatrixXi y(da_fc.num_days(), 24);
  for (int d = 0; d < da_fc.num_days(); ++d) {
    for (int h = 0; h < 24; ++h) {
      y(d, h) = da_fc.values(d, h) > id_fc.values(d, h) ? 1 : 0;
    }
  }
  return y;
}

TradeLedger spread_profit(const Eigen::MatrixXi& decisions,
                          const MarketDataset& data,
                          const std::vector<Date>& days) {
  if (!data.prices_id) throw ConfigError("dataset has no intraday price panel");
  if (decisions.rows() != static_cast<int>(days.size()) ||
      decisions.cols() != 24) {
    throw ConfigError("decision panel not aligned with day list");
  }
  TradeLedger ledger;
  ledger.kind = StrategyKind::da_id_spread;
  ledger.entries.reserve(days.size() * 24);
  double cumulative = 0.0;
  for (size_t i = 0; i < days.size(); ++i) {
    const int idx = data.index_of(days[i]);
    if (idx < 0) {
      throw ValidationError("no realized prices for " + format_date(days[i]));
    }
    for (int h = 1; h <= 24; ++h) {
      const double da = data.prices_da(idx, h - 1);
      const double id = (*data.prices_id)(idx, h - 1);
      const int y = decisions(i, h - 1);
      TradeRecord rec;
      rec.day = days[i];
      rec.hour = h;
      rec.decision = y;
      rec.sell_price = y == 1 ? da : id;
      rec.profit = y * da + (1 - y) * id - da;
      cumulative += rec.profit;
      rec.cumulative = cumulative;
      ledger.entries.push_back(rec);
    }
  }
  return ledger;
}

double sharpe_ratio(const TradeLedger& ledger) {
  const Eigen::VectorXd p = ledger.profits();
  const int n = static_cast<int>(p.size());
  if (n < 2) throw ValidationError("sharpe_ratio needs at least 2 entries");
  const double mean = p.mean();
  const double var = (p.array() - mean).square().sum() / (n - 1);
  if (var <= 0.0) {
    throw DegenerateScaleError("revenue series has zero variance");
  }
  return mean / std::sqrt(var);
}

FieiResult fiei(double cost_with_forecast, double cost_perfect) {
  if (cost_with_forecast == 0.0) {
    throw DegenerateScaleError("zero forecast cost in FIEI");
  }
  FieiResult r;
  r.value = (cost_with_forecast - cost_perfect) / cost_with_forecast;
  r.negative_flagged = r.value < 0.0;
  return r;
}

void BatteryConfig::validate() const {
  if (efficiency <= 0.0 || efficiency > 1.0) {
    throw ConfigError("efficiency must be in (0, 1]");
  }
  if (min_level_mw >= capacity_mw) {
    throw ConfigError("min level must be below capacity");
  }
  if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must be in (0,1)");
}

namespace {

struct FanLevels {
  int lower = -1;
  int upper = -1;
};

FanLevels battery_levels(const QuantileFan& fan, const BatteryConfig& config) {
  FanLevels l;
  l.lower = fan.level_index((1.0 - config.alpha) / 2.0);
  l.upper = fan.level_index((1.0 + config.alpha) / 2.0);
  if (l.lower < 0 || l.upper < 0) {
    throw ConfigError("fan lacks the PI levels for alpha");
  }
  return l;
}

}  // namespace

BatteryOrder battery_optimize(const QuantileFan& fan, Date day,
                              const BatteryConfig& config) {
  config.validate();
  const int d = fan.index_of(day);
  if (d < 0) throw ConfigError("day not covered by fan");
  const FanLevels lv = battery_levels(fan, config);

  BatteryOrder best;
  best.day = day;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int h1 = 1; h1 <= 23; ++h1) {
    const double upper_h1 = fan.value(d, h1, lv.upper);
    for (int h2 = h1 + 1; h2 <= 24; ++h2) {
      const double lower_h2 = fan.value(d, h2, lv.lower);
      const double value = config.efficiency * lower_h2 - upper_h1;
      if (value > best_value) {
        best_value = value;
        best.h1 = h1;
        best.h2 = h2;
        best.bid_price = upper_h1;
        best.ask_price = lower_h2;
      }
    }
  }
  best.buy_mw = 1.0;
  best.sell_mw = config.efficiency;
  return best;
}

TradeRecord battery_settle(const BatteryOrder& order, const MarketDataset& data,
                           const BatteryConfig& config) {
  const int idx = data.index_of(order.day);
  if (idx < 0) {
    throw ValidationError("no realized prices for " + format_date(order.day));
  }
  const double p_buy = data.prices_da(idx, order.h1 - 1);
  const double p_sell = data.prices_da(idx, order.h2 - 1);

  TradeRecord rec;
  rec.day = order.day;
  rec.buy_hour = order.h1;
  rec.sell_hour = order.h2;
  rec.bid = order.bid_price;
  rec.ask = order.ask_price;
  rec.buy_accepted = p_buy <= order.bid_price;
  rec.sell_accepted = p_sell >= order.ask_price;

  auto fallback_price = [&](int hour) -> double {
    if (config.mode == BatteryMode::balancing_fallback) {
      if (!data.prices_bal) {
        throw ConfigError("balancing fallback needs a balancing price panel");
      }
      return (*data.prices_bal)(idx, hour - 1);
    }
    // next_day_close: the open leg is closed by a market order at the same
    // hour of the following day.
    if (idx + 1 >= data.num_days()) {
      throw ConfigError("no next day to close the position on " +
                        format_date(order.day));
    }
    return data.prices_da(idx + 1, hour - 1);
  };

  rec.buy_price = rec.buy_accepted ? p_buy : fallback_price(order.h1);
  rec.sell_price = rec.sell_accepted ? p_sell : fallback_price(order.h2);
  rec.profit = config.efficiency * rec.sell_price - rec.buy_price;
  return rec;
}

TradeLedger run_battery_backtest(const QuantileFan& fan,
                                 const MarketDataset& data,
                                 const BatteryConfig& config) {
  config.validate();
  battery_levels(fan, config);
  TradeLedger ledger;
  ledger.kind = StrategyKind::battery;
  ledger.entries.reserve(fan.num_days());
  double cumulative = 0.0;
  for (int i = 0; i < fan.num_days(); ++i) {
    const BatteryOrder order = battery_optimize(fan, fan.days[i], config);
    TradeRecord rec = battery_settle(order, data, config);
    cumulative += rec.profit;
    rec.cumulative = cumulative;
    ledger.entries.push_back(rec);
  }
  return ledger;
}

}  // namespace epf
