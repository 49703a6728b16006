#include "epf/scoring.hpp"

#include "epf/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <random>

namespace {

epf::ErrorPanel panel_from(const Eigen::MatrixXd& errors) {
  epf::ErrorPanel p;
  p.errors = errors;
  p.model_id = "m";
  return p;
}

// Fan whose every cell carries the same quantile curve `values` over `levels`.
epf::QuantileFan uniform_fan(int days, const std::vector<double>& levels,
                             const std::vector<double>& values) {
  std::vector<epf::Date> ds;
  for (int i = 0; i < days; ++i) {
    ds.push_back(epf::add_days(epf::parse_date("2020-01-01"), i));
  }
  auto fan = epf::QuantileFan::empty(ds, levels);
  for (int d = 0; d < days; ++d) {
    for (int h = 1; h <= 24; ++h) {
      for (size_t l = 0; l < levels.size(); ++l) {
        fan.value(d, h, static_cast<int>(l)) = values[l];
      }
    }
  }
  return fan;
}

}  // namespace

TEST_CASE("point_metrics hand values") {
  CHECK(epf::point_metrics(panel_from(Eigen::MatrixXd::Zero(3, 24))).mae == 0.0);
  CHECK(epf::point_metrics(panel_from(Eigen::MatrixXd::Zero(3, 24))).rmse == 0.0);

  Eigen::MatrixXd alt(1, 24);
  for (int h = 0; h < 24; ++h) alt(0, h) = h % 2 == 0 ? 1.0 : -1.0;
  const auto m = epf::point_metrics(panel_from(alt));
  CHECK(m.mae == doctest::Approx(1.0));
  CHECK(m.rmse == doctest::Approx(1.0));

  Eigen::MatrixXd two(1, 24);
  for (int h = 0; h < 24; ++h) two(0, h) = h % 2 == 0 ? 3.0 : -4.0;
  const auto m2 = epf::point_metrics(panel_from(two));
  CHECK(m2.mae == doctest::Approx(3.5));
  CHECK(m2.rmse == doctest::Approx(std::sqrt(12.5)));
}

TEST_CASE("relative_metrics") {
  Eigen::MatrixXd e = Eigen::MatrixXd::Constant(5, 24, 2.0);
  const auto self = epf::relative_metrics(panel_from(e), panel_from(e), 4.0);
  CHECK(self.rmae == doctest::Approx(1.0));
  CHECK(self.mase == doctest::Approx(0.5));

  Eigen::MatrixXd half = Eigen::MatrixXd::Constant(5, 24, 1.0);
  CHECK(epf::relative_metrics(panel_from(half), panel_from(e), 4.0).rmae ==
        doctest::Approx(0.5));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(5, 24);
  CHECK(epf::relative_metrics(panel_from(zero), panel_from(e), 4.0).rmae == 0.0);
  CHECK_THROWS_AS(epf::relative_metrics(panel_from(e), panel_from(zero), 4.0),
                  epf::DegenerateScaleError);
}

TEST_CASE("dm_test") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;

  SUBCASE("identical losses are degenerate") {
    epf::LossSeries a, b;
    a.values = Eigen::VectorXd::Constant(100, 1.0);
    b.values = a.values;
    CHECK_THROWS_AS(epf::dm_test(a, b), epf::DegenerateTestError);
  }
  SUBCASE("a constant positive differential rejects one-sided") {
    epf::LossSeries a, b;
    a.values.resize(500);
    b.values.resize(500);
    for (int i = 0; i < 500; ++i) {
      b.values[i] = std::abs(g(rng));
      a.values[i] = b.values[i] + 1.0 + 0.01 * g(rng);
    }
    const auto r = epf::dm_test(a, b);
    CHECK(r.p_one_sided < 1e-10);
    CHECK(r.p_value < 1e-10);
    CHECK(r.statistic > 0);
  }
  SUBCASE("per-hour and multivariate variants match their builders") {
    epf::ErrorPanel e1, e2;
    e1.errors.resize(60, 24);
    e2.errors.resize(60, 24);
    for (int i = 0; i < e1.errors.size(); ++i) {
      e1.errors.data()[i] = g(rng);
      e2.errors.data()[i] = 1.5 * g(rng);
    }
    const auto direct = epf::dm_test(epf::hour_losses(e1, 5, epf::LossKind::abs_error),
                                     epf::hour_losses(e2, 5, epf::LossKind::abs_error));
    const auto wrapped = epf::dm_test_per_hour(e1, e2, 5);
    CHECK(direct.statistic == wrapped.statistic);
    const auto mv = epf::dm_test_multivariate(e1, e2, 2);
    CHECK(mv.statistic ==
          epf::dm_test(epf::daily_norm_losses(e1, 2), epf::daily_norm_losses(e2, 2))
              .statistic);
    CHECK(mv.statistic < 0.0);  // e1 has the smaller errors
  }
  SUBCASE("p-values stay in [0,1] and match the statistic") {
    boost::math::normal n01;
    for (int rep = 0; rep < 20; ++rep) {
      epf::LossSeries a, b;
      a.values.resize(60);
      b.values.resize(60);
      for (int i = 0; i < 60; ++i) {
        a.values[i] = std::abs(g(rng));
        b.values[i] = std::abs(g(rng));
      }
      const auto r = epf::dm_test(a, b, rep % 2 == 0);
      CHECK(r.p_value >= 0.0);
      CHECK(r.p_value <= 1.0);
      CHECK(r.p_value ==
            doctest::Approx(2.0 * boost::math::cdf(n01, -std::abs(r.statistic))));
    }
  }
}

TEST_CASE("gw_test") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g;

  SUBCASE("positive-mean differential rejects through the intercept") {
    epf::LossSeries d;
    d.values.resize(400);
    for (int i = 0; i < 400; ++i) d.values[i] = 1.0 + 0.3 * g(rng);
    const auto r = epf::gw_test(d, 1);
    CHECK(r.p_value < 1e-12);
  }
  SUBCASE("an exactly constant differential is degenerate") {
    epf::LossSeries d;
    d.values = Eigen::VectorXd::Constant(400, 1.0);
    CHECK_THROWS_AS(epf::gw_test(d, 1), epf::DegenerateTestError);
  }
  SUBCASE("strong AR(1) with zero mean rejects through the lag") {
    epf::LossSeries d;
    d.values.resize(1000);
    double x = 0.0;
    for (int i = 0; i < 1000; ++i) {
      x = 0.6 * x + g(rng);
      d.values[i] = x;
    }
    CHECK(epf::gw_test(d, 1).p_value < 1e-6);
  }
  SUBCASE("length precondition") {
    epf::LossSeries d;
    d.values = Eigen::VectorXd::Zero(20);
    CHECK_THROWS_AS(epf::gw_test(d, 1), epf::ValidationError);
  }
}

TEST_CASE("coverage_stats") {
  const std::vector<double> levels = {0.25, 0.5, 0.75};
  const auto fan = uniform_fan(4, levels, {40.0, 50.0, 60.0});

  SUBCASE("always inside") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(4, 24, 50.0);
    const auto cs = epf::coverage_stats(fan, prices, 0.25, 0.75);
    CHECK(cs.picp == 1.0);
    CHECK(cs.pinc == doctest::Approx(0.5));
    CHECK(cs.ace == doctest::Approx(0.5));
  }
  SUBCASE("always outside") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(4, 24, 99.0);
    const auto cs = epf::coverage_stats(fan, prices, 0.25, 0.75);
    CHECK(cs.picp == 0.0);
    CHECK(cs.ace == doctest::Approx(-0.5));
  }
  SUBCASE("interval is closed") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(4, 24, 60.0);
    CHECK(epf::coverage_stats(fan, prices, 0.25, 0.75).picp == 1.0);
  }
  SUBCASE("ACE identity on random data") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(50.0, 15.0);
    Eigen::MatrixXd prices(4, 24);
    for (int i = 0; i < prices.size(); ++i) prices.data()[i] = g(rng);
    const auto cs = epf::coverage_stats(fan, prices, 0.25, 0.75);
    CHECK(cs.ace == cs.picp - cs.pinc);
  }
  SUBCASE("missing level") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(4, 24, 50.0);
    CHECK_THROWS_AS(epf::coverage_stats(fan, prices, 0.1, 0.9),
                    epf::ConfigError);
  }
}

TEST_CASE("kupiec_test") {
  SUBCASE("empirical rate exactly at nominal") {
    epf::HitSeries h;
    h.nominal = 0.5;
    h.hits.resize(100);
    for (int i = 0; i < 100; ++i) h.hits[i] = i % 2;
    const auto r = epf::kupiec_test(h);
    CHECK(r.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(1.0));
  }
  SUBCASE("900 of 1000 at nominal one-half rejects, closed form") {
    epf::HitSeries h;
    h.nominal = 0.5;
    h.hits = Eigen::VectorXi::Zero(1000);
    for (int i = 0; i < 900; ++i) h.hits[i] = 1;
    const auto r = epf::kupiec_test(h);
    const double expected =
        2.0 * (900 * std::log(0.9) + 100 * std::log(0.1) - 1000 * std::log(0.5));
    CHECK(r.statistic == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.p_value < 1e-12);
  }
  SUBCASE("boundary cases carry the degenerate flag") {
    epf::HitSeries h;
    h.nominal = 0.95;
    h.hits = Eigen::VectorXi::Ones(50);
    const auto r = epf::kupiec_test(h);
    CHECK(r.degenerate);
    CHECK(std::isfinite(r.statistic));
  }
}

TEST_CASE("christoffersen_test") {
  SUBCASE("alternating hits reject independence, closed form") {
    epf::HitSeries h;
    h.nominal = 0.5;
    h.hits.resize(200);
    for (int i = 0; i < 200; ++i) h.hits[i] = i % 2;
    const auto r =
        epf::christoffersen_test(h, epf::ChristoffersenKind::independence);
    // n01 = 100, n10 = 99, n00 = n11 = 0: the Markov likelihood is exactly 0
    // and the pooled Bernoulli one has pi = 100/199.
    const double n01 = 100, n10 = 99;
    const double pooled =
        n10 * std::log(n10 / (n01 + n10)) + n01 * std::log(n01 / (n01 + n10));
    const double expected = 2.0 * (0.0 - pooled);
    CHECK(r.statistic == doctest::Approx(expected).epsilon(1e-9));
    CHECK(r.p_value < 1e-12);
  }
  SUBCASE("clustered hits: CC rejects while UC does not") {
    epf::HitSeries h;
    h.nominal = 0.5;
    h.hits.resize(200);
    for (int i = 0; i < 200; ++i) h.hits[i] = i < 100 ? 1 : 0;
    CHECK(epf::kupiec_test(h).p_value == doctest::Approx(1.0));
    const auto cc = epf::christoffersen_test(
        h, epf::ChristoffersenKind::conditional_coverage);
    CHECK(cc.p_value < 1e-10);
  }
  SUBCASE("one-state series is undefined") {
    epf::HitSeries h;
    h.nominal = 0.5;
    h.hits = Eigen::VectorXi::Ones(100);
    CHECK_THROWS_AS(
        epf::christoffersen_test(h, epf::ChristoffersenKind::independence),
        epf::DegenerateTestError);
  }
}

TEST_CASE("pit_series") {
  const auto levels = epf::percentile_levels(99);
  std::vector<double> values(99);
  boost::math::normal n01;
  for (int i = 0; i < 99; ++i) {
    values[i] = 50.0 + 10.0 * boost::math::quantile(n01, levels[i]);
  }
  const auto fan = uniform_fan(2, levels, values);

  SUBCASE("price at the median gives one half") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(2, 24, 50.0);
    const Eigen::VectorXd pit = epf::pit_series(fan, prices);
    for (int i = 0; i < pit.size(); ++i) {
      CHECK(pit[i] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  SUBCASE("price below the lowest quantile clamps into [0, 0.01]") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(2, 24, -500.0);
    const Eigen::VectorXd pit = epf::pit_series(fan, prices);
    for (int i = 0; i < pit.size(); ++i) {
      CHECK(pit[i] >= 0.0);
      CHECK(pit[i] <= 0.01);
    }
  }
  SUBCASE("self-sampled prices give uniform PIT (KS)") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int ok = 0;
    const int runs = 500;
    for (int run = 0; run < runs; ++run) {
      std::vector<double> u(48);
      Eigen::MatrixXd prices(2, 24);
      for (int d = 0; d < 2; ++d) {
        for (int h = 0; h < 24; ++h) {
          const double v = u01(rng);
          u[d * 24 + h] = v;
          // Invert the fan's piecewise-linear CDF, including its linear tails.
          double price;
          if (v <= levels.front()) {
            const double slope = (values[1] - values[0]) / (levels[1] - levels[0]);
            price = values[0] + (v - levels[0]) * slope;
          } else if (v >= levels.back()) {
            const double slope =
                (values[98] - values[97]) / (levels[98] - levels[97]);
            price = values[98] + (v - levels[98]) * slope;
          } else {
            const auto it = std::upper_bound(levels.begin(), levels.end(), v);
            const int j = static_cast<int>(it - levels.begin());
            const double frac = (v - levels[j - 1]) / (levels[j] - levels[j - 1]);
            price = values[j - 1] + frac * (values[j] - values[j - 1]);
          }
          prices(d, h) = price;
        }
      }
      const Eigen::VectorXd pit = epf::pit_series(fan, prices);
      std::vector<double> pv(pit.data(), pit.data() + pit.size());
      if (oracles::ks_uniform_pvalue(pv) > 0.01) ++ok;
    }
    CHECK(ok >= static_cast<int>(0.95 * runs));
  }
}

TEST_CASE("berkowitz_test") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  boost::math::normal n01;

  SUBCASE("overdispersed forecaster rejects via the variance") {
    Eigen::VectorXd pit(600);
    for (int i = 0; i < 600; ++i) pit[i] = 0.5 + 0.05 * (u01(rng) - 0.5);
    CHECK(epf::berkowitz_test(pit).p_value < 1e-12);
  }
  SUBCASE("autocorrelated transform rejects via the AR coefficient") {
    Eigen::VectorXd pit(600);
    double z = 0.0;
    for (int i = 0; i < 600; ++i) {
      std::normal_distribution<double> g;
      z = 0.7 * z + std::sqrt(1.0 - 0.49) * g(rng);
      pit[i] = boost::math::cdf(n01, z);
    }
    CHECK(epf::berkowitz_test(pit).p_value < 1e-6);
  }
  SUBCASE("iid uniform PIT is accepted at roughly nominal size") {
    int rejections = 0;
    const int reps = 300;
    for (int rep = 0; rep < reps; ++rep) {
      Eigen::VectorXd pit(400);
      for (int i = 0; i < 400; ++i) pit[i] = u01(rng);
      if (epf::berkowitz_test(pit).p_value < 0.05) ++rejections;
    }
    CHECK(rejections >= 2);
    CHECK(rejections <= 30);
  }
}

TEST_CASE("pinball and APS") {
  const std::vector<double> levels = {0.1, 0.5, 0.9};
  const auto fan = uniform_fan(3, levels, {40.0, 50.0, 60.0});

  SUBCASE("zero at the realized quantile") {
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(3, 24, 50.0);
    CHECK(epf::pinball(fan, prices, 0.5).mean == 0.0);
  }
  SUBCASE("median pinball is half the absolute error, cell-wise") {
    std::mt19937_64 rng(26);
    std::normal_distribution<double> g(50.0, 20.0);
    Eigen::MatrixXd prices(3, 24);
    for (int i = 0; i < prices.size(); ++i) prices.data()[i] = g(rng);
    const auto pb = epf::pinball(fan, prices, 0.5);
    for (int d = 0; d < 3; ++d) {
      for (int h = 0; h < 24; ++h) {
        CHECK(pb.cell_losses(d, h) == 0.5 * std::abs(prices(d, h) - 50.0));
      }
    }
  }
  SUBCASE("level 0.9 hand value") {
    // forecast quantile 10 below the price: alpha * (P - q) = 0.9 * 10
    const auto f = uniform_fan(1, {0.9}, {10.0});
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(1, 24, 20.0);
    CHECK(epf::pinball(f, prices, 0.9).mean == doctest::Approx(9.0));
  }
  SUBCASE("degenerate fan equal to prices has zero APS") {
    const auto f = uniform_fan(2, levels, {50.0, 50.0, 50.0});
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(2, 24, 50.0);
    CHECK(epf::aggregate_pinball(f, prices) == 0.0);
  }
  SUBCASE("uniform fan closed form") {
    // Quantiles of U(a,b) with the price at the distribution median.
    const double a = 10.0, b = 30.0;
    const auto grid = epf::percentile_levels(99);
    std::vector<double> q(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) q[i] = a + grid[i] * (b - a);
    const auto f = uniform_fan(1, grid, q);
    const Eigen::MatrixXd prices = Eigen::MatrixXd::Constant(1, 24, 0.5 * (a + b));
    double closed = 0.0;
    for (const double al : grid) {
      closed += (b - a) * (al <= 0.5 ? al * (0.5 - al) : (1 - al) * (al - 0.5));
    }
    closed /= grid.size();
    CHECK(epf::aggregate_pinball(f, prices) ==
          doctest::Approx(closed).epsilon(1e-10));
  }
  SUBCASE("recentering a biased fan lowers the APS") {
    std::mt19937_64 rng(27);
    std::normal_distribution<double> g;
    boost::math::normal n01;
    const auto grid = epf::percentile_levels(99);
    std::vector<double> centered(99), biased(99);
    for (int i = 0; i < 99; ++i) {
      const double z = boost::math::quantile(n01, grid[i]);
      centered[i] = 50.0 + 5.0 * z;
      biased[i] = 58.0 + 5.0 * z;
    }
    const auto fan_c = uniform_fan(20, grid, centered);
    const auto fan_b = uniform_fan(20, grid, biased);
    Eigen::MatrixXd prices(20, 24);
    for (int i = 0; i < prices.size(); ++i) prices.data()[i] = 50.0 + 5.0 * g(rng);
    CHECK(epf::aggregate_pinball(fan_c, prices) <
          epf::aggregate_pinball(fan_b, prices));
  }
}

TEST_CASE("crps") {
  SUBCASE("point mass gives the absolute error") {
    Eigen::VectorXd one(1);
    one << 42.0;
    CHECK(epf::crps_sample(one, 30.0) == doctest::Approx(12.0));
    Eigen::VectorXd five = Eigen::VectorXd::Constant(5, 42.0);
    CHECK(epf::crps_sample(five, 30.0) == doctest::Approx(12.0).epsilon(1e-12));
  }
  SUBCASE("two-point hand value") {
    Eigen::VectorXd s(2);
    s << 0.0, 2.0;
    CHECK(epf::crps_sample(s, 1.0) == doctest::Approx(0.5));
  }
  SUBCASE("dense-grid CRPS is about twice the APS") {
    boost::math::normal n01;
    const auto grid = epf::percentile_levels(99);
    std::vector<double> q(99);
    for (int i = 0; i < 99; ++i) {
      q[i] = 50.0 + 8.0 * boost::math::quantile(n01, grid[i]);
    }
    const auto fan = uniform_fan(10, grid, q);
    std::mt19937_64 rng(28);
    std::normal_distribution<double> g(50.0, 8.0);
    Eigen::MatrixXd prices(10, 24);
    for (int i = 0; i < prices.size(); ++i) prices.data()[i] = g(rng);
    const double crps = epf::mean_crps(fan, prices);
    const double aps = epf::aggregate_pinball(fan, prices);
    CHECK(crps == doctest::Approx(2.0 * aps).epsilon(0.02));
  }
}

TEST_CASE("DM and GW run on scoring-rule loss series") {
  // Compare two fans through daily pinball losses instead of point errors.
  boost::math::normal n01;
  const auto grid = epf::percentile_levels(19);
  std::vector<double> sharp(19), wide(19);
  for (int i = 0; i < 19; ++i) {
    const double z = boost::math::quantile(n01, grid[i]);
    sharp[i] = 50.0 + 4.0 * z;
    wide[i] = 50.0 + 16.0 * z;
  }
  const auto fan_sharp = uniform_fan(80, grid, sharp);
  const auto fan_wide = uniform_fan(80, grid, wide);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(50.0, 4.0);
  Eigen::MatrixXd prices(80, 24);
  for (int i = 0; i < prices.size(); ++i) prices.data()[i] = g(rng);

  auto daily_pinball = [&](const epf::QuantileFan& fan) {
    epf::LossSeries s;
    s.kind = epf::LossKind::pinball;
    s.granularity = epf::Granularity::daily;
    const auto cells = epf::pinball(fan, prices, 0.9).cell_losses;
    s.values = cells.rowwise().mean();
    return s;
  };
  const auto r = epf::dm_test(daily_pinball(fan_sharp), daily_pinball(fan_wide));
  CHECK(r.statistic < 0.0);  // the sharp calibrated fan loses less
  CHECK(r.p_one_sided > 0.999);
  CHECK(epf::gw_test(daily_pinball(fan_sharp), daily_pinball(fan_wide), 1)
            .p_value < 0.01);
}

TEST_CASE("energy_score") {
  SUBCASE("single path is the Euclidean distance") {
    Eigen::MatrixXd path(1, 24);
    Eigen::VectorXd realized(24);
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g;
    for (int h = 0; h < 24; ++h) {
      path(0, h) = g(rng);
      realized[h] = g(rng);
    }
    CHECK(epf::energy_score(path, realized) ==
          doctest::Approx((path.row(0).transpose() - realized).norm()));
  }
  SUBCASE("all paths equal to the realization score zero") {
    Eigen::VectorXd realized(24);
    realized.setLinSpaced(24, 10.0, 80.0);
    Eigen::MatrixXd paths(7, 24);
    for (int m = 0; m < 7; ++m) paths.row(m) = realized.transpose();
    CHECK(epf::energy_score(paths, realized) == 0.0);
  }
  SUBCASE("dimension one reduces to the sample CRPS") {
    std::mt19937_64 rng(30);
    std::normal_distribution<double> g;
    Eigen::MatrixXd paths(40, 1);
    for (int m = 0; m < 40; ++m) paths(m, 0) = g(rng);
    Eigen::VectorXd realized(1);
    realized << 0.3;
    CHECK(epf::energy_score(paths, realized) ==
          doctest::Approx(epf::crps_sample(paths.col(0), 0.3)).epsilon(1e-12));
  }
}
