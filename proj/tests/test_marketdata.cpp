#include "epf/marketdata.hpp"

#include "epf/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace {

std::filesystem::path write_temp_csv(const std::string& name,
                                     const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string hourly_rows(const std::string& date, int from_hour, int to_hour,
                        double price, double load = 1000, double res = 500) {
  std::ostringstream ss;
  for (int h = from_hour; h <= to_hour; ++h) {
    char ts[40];
    std::snprintf(ts, sizeof(ts), "%sT%02d:00:00+01:00", date.c_str(), h);
    ss << ts << ',' << price << ',' << load << ',' << res << '\n';
  }
  return ss.str();
}

constexpr const char* kHeader = "timestamp,price_da,load_fc,res_fc\n";

}  // namespace

TEST_CASE("load_dataset accepts two full days") {
  std::string body = kHeader;
  body += hourly_rows("2021-01-01", 0, 23, 42.0);
  body += hourly_rows("2021-01-02", 0, 23, 43.0);
  const auto path = write_temp_csv("md_two_days.csv", body);

  const auto res = epf::load_dataset(path);
  CHECK(res.data.num_days() == 2);
  CHECK(res.data.prices_da(0, 0) == 42.0);
  CHECK(res.data.prices_da(1, 23) == 43.0);
  CHECK(res.report.duplicates_averaged == 0);
  CHECK(res.report.gaps_interpolated == 0);
  CHECK_FALSE(res.data.prices_id.has_value());
}

TEST_CASE("load_dataset averages the duplicated clock-change hour") {
  std::string body = kHeader;
  body += hourly_rows("2021-10-31", 0, 1, 40.0);
  body += "2021-10-31T02:00:00+02:00,40,1000,500\n";
  body += "2021-10-31T02:00:00+01:00,60,1000,500\n";
  body += hourly_rows("2021-10-31", 3, 23, 40.0);
  const auto path = write_temp_csv("md_dup_hour.csv", body);

  const auto res = epf::load_dataset(path);
  CHECK(res.data.num_days() == 1);
  CHECK(res.data.prices_da(0, 2) == 50.0);
  CHECK(res.report.duplicates_averaged == 1);
}

TEST_CASE("load_dataset interpolates a single missing hour") {
  std::string body = kHeader;
  body += hourly_rows("2021-03-28", 0, 1, 30.0);
  // hour index 2 (load period 3) missing
  body += hourly_rows("2021-03-28", 3, 3, 50.0);
  body += hourly_rows("2021-03-28", 4, 23, 50.0);
  const auto path = write_temp_csv("md_gap_hour.csv", body);

  const auto res = epf::load_dataset(path);
  CHECK(res.data.prices_da(0, 2) == doctest::Approx(40.0));
  CHECK(res.report.gaps_interpolated == 1);
}

TEST_CASE("load_dataset error paths") {
  SUBCASE("malformed timestamp") {
    std::string body = kHeader;
    body += "2021-13-01T00:00:00,40,1000,500\n";
    const auto path = write_temp_csv("md_bad_ts.csv", body);
    CHECK_THROWS_AS(epf::load_dataset(path), epf::ParseError);
  }
  SUBCASE("two-hour gap") {
    std::string body = kHeader;
    body += hourly_rows("2021-01-01", 0, 10, 40.0);
    body += hourly_rows("2021-01-01", 13, 23, 40.0);
    const auto path = write_temp_csv("md_big_gap.csv", body);
    CHECK_THROWS_AS(epf::load_dataset(path), epf::GapError);
  }
  SUBCASE("negative exogenous value") {
    std::string body = kHeader;
    body += hourly_rows("2021-01-01", 0, 22, 40.0);
    body += "2021-01-01T23:00:00,40,-5,500\n";
    const auto path = write_temp_csv("md_neg_exog.csv", body);
    CHECK_THROWS_AS(epf::load_dataset(path), epf::ValidationError);
  }
  SUBCASE("negative prices are fine") {
    std::string body = kHeader;
    body += hourly_rows("2021-01-01", 0, 23, -25.0);
    const auto path = write_temp_csv("md_neg_price.csv", body);
    CHECK(epf::load_dataset(path).data.prices_da(0, 5) == -25.0);
  }
  SUBCASE("partial boundary days are rejected") {
    std::string body = kHeader;
    body += hourly_rows("2021-01-01", 5, 23, 40.0);
    body += hourly_rows("2021-01-02", 0, 23, 40.0);
    const auto path = write_temp_csv("md_partial_day.csv", body);
    CHECK_THROWS_AS(epf::load_dataset(path), epf::ValidationError);
  }
}

TEST_CASE("load_dataset is deterministic") {
  std::string body = kHeader;
  std::mt19937_64 rng(3);
  std::ostringstream rows;
  for (int d = 1; d <= 3; ++d) {
    for (int h = 0; h < 24; ++h) {
      char ts[48];
      std::snprintf(ts, sizeof(ts), "2021-02-0%dT%02d:00:00", d, h);
      rows << ts << ',' << (30.0 + (rng() % 1000) * 0.173) << ",1000,500\n";
    }
  }
  body += rows.str();
  const auto path = write_temp_csv("md_det.csv", body);

  const auto a = epf::load_dataset(path);
  const auto b = epf::load_dataset(path);
  CHECK(a.data.prices_da == b.data.prices_da);
  CHECK(a.data.exog1 == b.data.exog1);
}

TEST_CASE("calendar dummies are one-hot") {
  const auto data = oracles::make_dataset(14);
  CHECK(data.calendar.weekday[0] == 1);  // 2015-01-05 is a Monday
  CHECK(data.calendar.weekday[5] == 6);
  for (int d = 0; d < data.num_days(); ++d) {
    CHECK(data.calendar.dummies.row(d).sum() == 1.0);
    CHECK(data.calendar.dummies(d, data.calendar.weekday[d] - 1) == 1.0);
  }
}

TEST_CASE("asinh_transform basics") {
  SUBCASE("constant panel is degenerate") {
    const auto data = oracles::make_dataset(40, 50.0);
    CHECK_THROWS_AS(epf::asinh_transform(data), epf::DegenerateScaleError);
  }
  SUBCASE("needs 30 days") {
    auto data = oracles::make_dataset(20);
    data.prices_da.col(3).setConstant(99.0);
    CHECK_THROWS_AS(epf::asinh_transform(data), epf::ValidationError);
  }
  SUBCASE("median maps to zero and exog standardizes") {
    auto data = oracles::make_dataset(41);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(50.0, 10.0);
    for (int d = 0; d < data.num_days(); ++d) {
      for (int h = 0; h < 24; ++h) {
        data.prices_da(d, h) = g(rng);
        data.exog1(d, h) = 900.0 + 100.0 * (d % 5);
        data.exog2(d, h) = 400.0 + 10.0 * h;
      }
    }
    const auto res = epf::asinh_transform(data);
    // A cell holding exactly the median value maps to asinh(0) = 0.
    const Eigen::MatrixXd back = epf::invert_vst(Eigen::MatrixXd::Zero(1, 1),
                                                 res.transform.price);
    CHECK(back(0, 0) == doctest::Approx(res.transform.price.center));
    CHECK(res.data.exog1.mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(res.data.exog1.array().square().mean() == doctest::Approx(1.0));
  }
}

TEST_CASE("invert_vst closed-form points") {
  epf::VstParams p{50.0, 10.0};
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  CHECK(epf::invert_vst(zero, p)(0, 0) == doctest::Approx(50.0));

  epf::VstParams unit{0.0, 1.0};
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = std::asinh(1.0);
  CHECK(epf::invert_vst(v, unit)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("VST round trip is the identity on heavy-tailed data") {
  auto data = oracles::make_dataset(60);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int d = 0; d < data.num_days(); ++d) {
    for (int h = 0; h < 24; ++h) {
      data.prices_da(d, h) = 45.0 + 12.0 * g(rng) / u(rng);  // fat tails
    }
  }
  const auto res = epf::asinh_transform(data);
  const Eigen::MatrixXd back =
      epf::invert_vst(res.data.prices_da, res.transform.price);
  const double rel_err =
      ((back - data.prices_da).cwiseAbs().array() /
       (1.0 + data.prices_da.cwiseAbs().array()))
          .maxCoeff();
  CHECK(rel_err < 1e-10);
}

TEST_CASE("slice keeps alignment") {
  auto data = oracles::make_dataset(20);
  for (int d = 0; d < 20; ++d) data.prices_da.row(d).setConstant(d);
  const auto sub = data.slice(5, 10);
  CHECK(sub.num_days() == 10);
  CHECK(sub.prices_da(0, 0) == 5.0);
  CHECK(sub.days[0] == data.days[5]);
  CHECK(sub.calendar.weekday[0] == data.calendar.weekday[5]);
  CHECK_THROWS_AS(data.slice(15, 10), epf::ValidationError);
}
