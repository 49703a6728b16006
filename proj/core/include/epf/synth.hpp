#pragma once

#include "epf/marketdata.hpp"

#include <cstdint>

namespace epf {

/// Synthetic hourly market generator covering the stylized facts of power
/// prices: daily and weekly seasonality, autocorrelated noise, occasional
/// spikes, occasional negative excursions, and a linear coupling of prices to
/// the exogenous load and RES panels.
struct SynthSpec {
  int days = 400;                    // >= 60
  Date start = parse_start_default();
  double base_level = 40.0;          // currency/MWh
  double daily_amplitude = 10.0;
  double weekly_amplitude = 5.0;
  double ar1 = 0.7;                  // AR(1) persistence of the hourly noise
  double noise_sd = 3.0;
  double spike_prob = 0.01;          // per hour
  double spike_magnitude = 60.0;
  double negative_prob = 0.002;      // per hour
  double negative_magnitude = 70.0;  // subtracted on a negative excursion
  double load_coupling = 6.0;        // price per sd of load
  double res_coupling = -4.0;        // price per sd of RES generation
  double id_spread_sd = 2.0;         // zero-mean DA/ID spread
  double bal_spread_sd = 4.0;        // zero-mean DA/balancing spread
  std::uint64_t seed = 1;

  void validate() const;

  static Date parse_start_default();
};

/// Deterministic for a fixed spec (including seed).
MarketDataset synth_generate(const SynthSpec& spec);

}  // namespace epf
