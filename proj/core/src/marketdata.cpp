#include "epf/marketdata.hpp"

#include "epf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace epf {

CalendarFrame CalendarFrame::for_days(const std::vector<Date>& days) {
  const int d = static_cast<int>(days.size());
  CalendarFrame cal;
  cal.weekday.resize(d);
  cal.dummies = Eigen::MatrixXd::Zero(d, 7);
  for (int i = 0; i < d; ++i) {
    const int wd = iso_weekday(days[i]);
    cal.weekday[i] = wd;
    cal.dummies(i, wd - 1) = 1.0;
  }
  return cal;
}

int MarketDataset::index_of(Date d) const {
  auto it = std::lower_bound(days.begin(), days.end(), d);
  if (it == days.end() || *it != d) return -1;
  return static_cast<int>(it - days.begin());
}

MarketDataset MarketDataset::slice(int first, int count) const {
  if (first < 0 || count <= 0 || first + count > num_days()) {
    throw ValidationError("slice out of range");
  }
  MarketDataset out;
  out.days.assign(days.begin() + first, days.begin() + first + count);
  out.prices_da = prices_da.middleRows(first, count);
  if (prices_id) out.prices_id = prices_id->middleRows(first, count);
  if (prices_bal) out.prices_bal = prices_bal->middleRows(first, count);
  out.exog1 = exog1.middleRows(first, count);
  out.exog2 = exog2.middleRows(first, count);
  out.calendar = CalendarFrame::for_days(out.days);
  return out;
}

void MarketDataset::validate(bool exog_nonneg) const {
  const int d = num_days();
  if (d == 0) throw ValidationError("empty dataset");
  auto check_shape = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != d || m.cols() != 24) {
      throw ValidationError(std::string(name) + " panel is not D x 24");
    }
    if (!m.allFinite()) {
      throw ValidationError(std::string(name) + " panel has non-finite values");
    }
  };
  check_shape(prices_da, "price_da");
  if (prices_id) check_shape(*prices_id, "price_id");
  if (prices_bal) check_shape(*prices_bal, "price_bal");
  check_shape(exog1, "load_fc");
  check_shape(exog2, "res_fc");
  for (int i = 1; i < d; ++i) {
    if ((days[i] - days[i - 1]).count() != 1) {
      throw ValidationError("days are not consecutive at " + format_date(days[i]));
    }
  }
  if (exog_nonneg && ((exog1.array() < 0).any() || (exog2.array() < 0).any())) {
    throw ValidationError("negative exogenous value");
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, int line_no, const std::string& col) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(line_no) + ": bad value '" + s +
                     "' in column " + col);
  }
}

struct RawCell {
  double sum = 0.0;
  int count = 0;
};

}  // namespace

LoadResult load_dataset(const std::filesystem::path& path,
                        const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file " + path.string());
  const auto header = split_csv_line(line);
  auto col_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_ts = col_index(schema.timestamp);
  const int c_da = col_index(schema.price_da);
  const int c_id = col_index(schema.price_id);
  const int c_bal = col_index(schema.price_bal);
  const int c_load = col_index(schema.load_fc);
  const int c_res = col_index(schema.res_fc);
  if (c_ts < 0 || c_da < 0 || c_load < 0 || c_res < 0) {
    throw ParseError("missing required column in " + path.string());
  }
  const bool has_id = c_id >= 0;
  const bool has_bal = c_bal >= 0;

  // One bucket per local (day, hour); duplicated DST rows land in the same
  // bucket and get averaged.
  const int ncols = 3 + (has_id ? 1 : 0) + (has_bal ? 1 : 0);
  std::map<LocalHour, std::vector<RawCell>> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <
        std::max({c_ts, c_da, c_id, c_bal, c_load, c_res}) + 1) {
      throw ParseError("row " + std::to_string(line_no) + ": too few fields");
    }
    LocalHour key;
    try {
      key = parse_local_hour(fields[c_ts]);
    } catch (const ParseError& e) {
      throw ParseError("row " + std::to_string(line_no) + ": " + e.what());
    }
    auto& vec = cells[key];
    if (vec.empty()) vec.resize(ncols);
    int k = 0;
    auto add = [&](int col, const std::string& name) {
      vec[k].sum += parse_number(fields[col], line_no, name);
      vec[k].count += 1;
      ++k;
    };
    add(c_da, schema.price_da);
    if (has_id) add(c_id, schema.price_id);
    if (has_bal) add(c_bal, schema.price_bal);
    add(c_load, schema.load_fc);
    add(c_res, schema.res_fc);
  }
  if (cells.empty()) throw ParseError("no data rows in " + path.string());

  LoadReport report;
  for (auto& [key, vec] : cells) {
    if (vec[0].count > 1) report.duplicates_averaged += 1;
  }

  const LocalHour first = cells.begin()->first;
  const LocalHour last = cells.rbegin()->first;
  if (first.hour != 1) {
    throw ValidationError("first day is incomplete, starts at hour " +
                          std::to_string(first.hour));
  }
  if (last.hour != 24) {
    throw ValidationError("last day is incomplete, ends at hour " +
                          std::to_string(last.hour));
  }

  std::vector<Date> days;
  for (Date d = first.day; d <= last.day; d = add_days(d, 1)) days.push_back(d);
  const int nd = static_cast<int>(days.size());

  // Flatten to an hour grid, marking holes for interpolation.
  std::vector<std::vector<double>> grid(
      ncols, std::vector<double>(static_cast<size_t>(nd) * 24,
                                 std::numeric_limits<double>::quiet_NaN()));
  for (const auto& [key, vec] : cells) {
    const int di = static_cast<int>((key.day - first.day).count());
    const size_t t = static_cast<size_t>(di) * 24 + (key.hour - 1);
    for (int c = 0; c < ncols; ++c) grid[c][t] = vec[c].sum / vec[c].count;
  }

  const size_t total = static_cast<size_t>(nd) * 24;
  for (size_t t = 0; t < total; ++t) {
    if (!std::isnan(grid[0][t])) continue;
    const bool next_missing = t + 1 < total && std::isnan(grid[0][t + 1]);
    if (t == 0 || t + 1 >= total || next_missing) {
      const int di = static_cast<int>(t / 24);
      throw GapError("gap longer than 1 hour around " + format_date(days[di]) +
                     " hour " + std::to_string(t % 24 + 1));
    }
    for (int c = 0; c < ncols; ++c) {
      grid[c][t] = 0.5 * (grid[c][t - 1] + grid[c][t + 1]);
    }
    report.gaps_interpolated += 1;
  }

  MarketDataset data;
  data.days = std::move(days);
  auto to_panel = [&](int c) {
    Eigen::MatrixXd m(nd, 24);
    for (int d = 0; d < nd; ++d)
      for (int h = 0; h < 24; ++h) m(d, h) = grid[c][static_cast<size_t>(d) * 24 + h];
    return m;
  };
  int c = 0;
  data.prices_da = to_panel(c++);
  if (has_id) data.prices_id = to_panel(c++);
  if (has_bal) data.prices_bal = to_panel(c++);
  data.exog1 = to_panel(c++);
  data.exog2 = to_panel(c++);
  data.calendar = CalendarFrame::for_days(data.days);
  data.validate(/*exog_nonneg=*/true);
  return LoadResult{std::move(data), report};
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of empty vector");
  const size_t n = values.size();
  auto mid = values.begin() + n / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(values.begin(), mid);
  return 0.5 * (lo + hi);
}

namespace {

// MAD scaled to estimate the standard deviation under normality.
constexpr double kMadToSd = 1.4826;

PanelScaler fit_scaler(const Eigen::MatrixXd& panel) {
  PanelScaler s;
  s.mean = panel.mean();
  const double var = (panel.array() - s.mean).square().mean();
  s.sd = std::sqrt(var);
  if (s.sd <= 0.0) s.sd = 1.0;  // constant panel maps to all zeros
  return s;
}

}  // namespace

DatasetTransform fit_vst(const MarketDataset& data) {
  if (data.num_days() < 30) {
    throw ValidationError("VST needs at least 30 days, got " +
                          std::to_string(data.num_days()));
  }
  std::vector<double> flat(data.prices_da.data(),
                           data.prices_da.data() + data.prices_da.size());
  DatasetTransform t;
  t.price.center = median(flat);
  std::vector<double> dev(flat.size());
  for (size_t i = 0; i < flat.size(); ++i) {
    dev[i] = std::abs(flat[i] - t.price.center);
  }
  t.price.scale = kMadToSd * median(dev);
  if (t.price.scale <= 0.0) {
    throw DegenerateScaleError("zero MAD: price panel has no dispersion");
  }
  t.exog1 = fit_scaler(data.exog1);
  t.exog2 = fit_scaler(data.exog2);
  return t;
}

MarketDataset apply_vst(const MarketDataset& data, const DatasetTransform& t) {
  MarketDataset out = data;
  auto vst = [&](Eigen::MatrixXd& m) {
    m = ((m.array() - t.price.center) / t.price.scale).asinh().matrix();
  };
  vst(out.prices_da);
  if (out.prices_id) vst(*out.prices_id);
  if (out.prices_bal) vst(*out.prices_bal);
  out.exog1 = (out.exog1.array() - t.exog1.mean).matrix() / t.exog1.sd;
  out.exog2 = (out.exog2.array() - t.exog2.mean).matrix() / t.exog2.sd;
  return out;
}

TransformResult asinh_transform(const MarketDataset& data) {
  DatasetTransform t = fit_vst(data);
  return TransformResult{apply_vst(data, t), t};
}

Eigen::MatrixXd invert_vst(const Eigen::MatrixXd& values, const VstParams& p) {
  return (p.center + p.scale * values.array().sinh()).matrix();
}

}  // namespace epf
