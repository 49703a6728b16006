#include "epf/synth.hpp"

#include "epf/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace epf {

Date SynthSpec::parse_start_default() {
  return parse_date("2015-01-05");  // a Monday
}

void SynthSpec::validate() const {
  if (days < 60) throw ConfigError("synthetic spec needs days >= 60");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(spike_prob) || !prob(negative_prob)) {
    throw ConfigError("probabilities must be in [0,1]");
  }
  if (noise_sd < 0 || id_spread_sd < 0 || bal_spread_sd < 0) {
    throw ConfigError("negative noise scale");
  }
  if (std::abs(ar1) >= 1.0) throw ConfigError("AR(1) persistence must be in (-1,1)");
}

MarketDataset synth_generate(const SynthSpec& spec) {
  spec.validate();
  const int nd = spec.days;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  MarketDataset data;
  data.days.reserve(nd);
  for (int d = 0; d < nd; ++d) data.days.push_back(add_days(spec.start, d));
  data.calendar = CalendarFrame::for_days(data.days);

  // Exogenous panels first: load with its own seasonality, RES mostly noise.
  constexpr double kLoadBase = 20000.0, kLoadDailyAmp = 4000.0,
                   kLoadWeeklyAmp = 1500.0, kLoadNoise = 500.0;
  constexpr double kResBase = 5000.0, kResNoise = 1500.0;
  data.exog1.resize(nd, 24);
  data.exog2.resize(nd, 24);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int d = 0; d < nd; ++d) {
    const int wd = data.calendar.weekday[d];
    for (int h = 0; h < 24; ++h) {
      const double tod = two_pi * h / 24.0;
      const double tow = two_pi * ((wd - 1) * 24 + h) / 168.0;
      const double load = kLoadBase + kLoadDailyAmp * std::sin(tod) +
                          kLoadWeeklyAmp * std::sin(tow) +
                          kLoadNoise * gauss(rng);
      const double res = kResBase + kResNoise * gauss(rng);
      data.exog1(d, h) = std::max(load, 0.0);
      data.exog2(d, h) = std::max(res, 0.0);
    }
  }

  data.prices_da.resize(nd, 24);
  Eigen::MatrixXd id(nd, 24), bal(nd, 24);
  double noise = 0.0;
  const double innovation_sd =
      spec.noise_sd * std::sqrt(1.0 - spec.ar1 * spec.ar1);
  for (int d = 0; d < nd; ++d) {
    const int wd = data.calendar.weekday[d];
    for (int h = 0; h < 24; ++h) {
      const double tod = two_pi * h / 24.0;
      const double tow = two_pi * ((wd - 1) * 24 + h) / 168.0;
      noise = spec.ar1 * noise + innovation_sd * gauss(rng);
      double price = spec.base_level + spec.daily_amplitude * std::sin(tod) +
                     spec.weekly_amplitude * std::sin(tow) + noise;
      price += spec.load_coupling * (data.exog1(d, h) - kLoadBase) / kLoadDailyAmp;
      price += spec.res_coupling * (data.exog2(d, h) - kResBase) / kResNoise;
      if (unif(rng) < spec.spike_prob) {
        price += spec.spike_magnitude * std::abs(gauss(rng));
      }
      if (unif(rng) < spec.negative_prob) {
        price -= spec.negative_magnitude * (1.0 + std::abs(gauss(rng)));
      }
      data.prices_da(d, h) = price;
      id(d, h) = price + (spec.id_spread_sd > 0 ? spec.id_spread_sd * gauss(rng) : 0.0);
      bal(d, h) = price + (spec.bal_spread_sd > 0 ? spec.bal_spread_sd * gauss(rng) : 0.0);
    }
  }
  data.prices_id = std::move(id);
  data.prices_bal = std::move(bal);
  data.validate(/*exog_nonneg=*/true);
  return data;
}

}  // namespace epf
