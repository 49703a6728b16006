#include "epf/io.hpp"

#include "epf/errors.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace epf {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line) {
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

double to_double(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(line_no) + ": bad number '" + s +
                     "'");
  }
}

}  // namespace

void save_dataset_csv(const MarketDataset& data,
                      const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "timestamp,price_da";
  if (data.prices_id) out << ",price_id";
  if (data.prices_bal) out << ",price_bal";
  out << ",load_fc,res_fc\n";
  for (int d = 0; d < data.num_days(); ++d) {
    const std::string date = format_date(data.days[d]);
    for (int h = 0; h < 24; ++h) {
      char ts[40];
      std::snprintf(ts, sizeof(ts), "%sT%02d:00:00", date.c_str(), h);
      out << ts << ',' << format_number(data.prices_da(d, h));
      if (data.prices_id) out << ',' << format_number((*data.prices_id)(d, h));
      if (data.prices_bal) out << ',' << format_number((*data.prices_bal)(d, h));
      out << ',' << format_number(data.exog1(d, h)) << ','
          << format_number(data.exog2(d, h)) << '\n';
    }
  }
}

void save_forecast_csv(const ForecastSet& fc,
                       const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "date";
  for (int h = 1; h <= 24; ++h) out << ",h" << h;
  out << '\n';
  for (int d = 0; d < fc.num_days(); ++d) {
    out << format_date(fc.days[d]);
    for (int h = 0; h < 24; ++h) out << ',' << format_number(fc.values(d, h));
    out << '\n';
  }
}

ForecastSet load_forecast_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file " + path.string());
  ForecastSet fc;
  fc.model_id = path.stem().string();
  std::vector<std::array<double, 24>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != 25) {
      throw ParseError("row " + std::to_string(line_no) +
                       ": expected 25 fields");
    }
    fc.days.push_back(parse_date(fields[0]));
    std::array<double, 24> row{};
    for (int h = 0; h < 24; ++h) row[h] = to_double(fields[h + 1], line_no);
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("no forecasts in " + path.string());
  fc.values.resize(rows.size(), 24);
  for (size_t d = 0; d < rows.size(); ++d) {
    for (int h = 0; h < 24; ++h) fc.values(d, h) = rows[d][h];
  }
  for (size_t d = 1; d < fc.days.size(); ++d) {
    if (fc.days[d] <= fc.days[d - 1]) {
      throw ParseError("forecast days not strictly increasing");
    }
  }
  return fc;
}

void save_fan_csv(const QuantileFan& fan, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "date,hour,level,value\n";
  for (int d = 0; d < fan.num_days(); ++d) {
    const std::string date = format_date(fan.days[d]);
    for (int h = 1; h <= 24; ++h) {
      for (int l = 0; l < fan.num_levels(); ++l) {
        out << date << ',' << h << ',' << format_number(fan.levels[l]) << ','
            << format_number(fan.value(d, h, l)) << '\n';
      }
    }
  }
}

QuantileFan load_fan_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file " + path.string());

  std::set<Date> day_set;
  std::set<double> level_set;
  struct Cell {
    Date day;
    int hour;
    double level;
    double value;
  };
  std::vector<Cell> cells;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    if (fields.size() != 4) {
      throw ParseError("row " + std::to_string(line_no) + ": expected 4 fields");
    }
    Cell c;
    c.day = parse_date(fields[0]);
    c.hour = static_cast<int>(to_double(fields[1], line_no));
    c.level = to_double(fields[2], line_no);
    c.value = to_double(fields[3], line_no);
    if (c.hour < 1 || c.hour > 24) {
      throw ParseError("row " + std::to_string(line_no) + ": hour out of range");
    }
    day_set.insert(c.day);
    level_set.insert(c.level);
    cells.push_back(c);
  }
  if (cells.empty()) throw ParseError("no fan rows in " + path.string());

  std::vector<Date> days(day_set.begin(), day_set.end());
  std::vector<double> levels(level_set.begin(), level_set.end());
  QuantileFan fan = QuantileFan::empty(days, levels);
  std::vector<bool> seen(fan.storage.size(), false);
  for (const auto& c : cells) {
    const int d = fan.index_of(c.day);
    const int l = fan.level_index(c.level);
    const size_t pos =
        static_cast<size_t>(d * 24 + c.hour - 1) * levels.size() + l;
    fan.storage[pos] = c.value;
    seen[pos] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ParseError("fan file " + path.string() +
                     " does not cover every (date, hour, level) cell");
  }
  fan.enforce_monotone();
  return fan;
}

void save_ensembles_csv(const std::vector<PathEnsemble>& ensembles,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "date,path_id";
  for (int h = 1; h <= 24; ++h) out << ",h" << h;
  out << '\n';
  for (const auto& ens : ensembles) {
    const std::string date = format_date(ens.day);
    for (int m = 0; m < ens.paths.rows(); ++m) {
      out << date << ',' << m;
      for (int h = 0; h < 24; ++h) out << ',' << format_number(ens.paths(m, h));
      out << '\n';
    }
  }
}

void save_ledger_csv(const TradeLedger& ledger,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  if (ledger.kind == StrategyKind::da_id_spread) {
    out << "date,hour,decision,executed_price,profit,cumulative\n";
    for (const auto& e : ledger.entries) {
      out << format_date(e.day) << ',' << e.hour << ',' << e.decision << ','
          << format_number(e.sell_price) << ',' << format_number(e.profit)
          << ',' << format_number(e.cumulative) << '\n';
    }
  } else {
    out << "date,buy_hour,sell_hour,bid,ask,buy_accepted,sell_accepted,"
           "buy_price,sell_price,profit,cumulative\n";
    for (const auto& e : ledger.entries) {
      out << format_date(e.day) << ',' << e.buy_hour << ',' << e.sell_hour
          << ',' << format_number(e.bid) << ',' << format_number(e.ask) << ','
          << (e.buy_accepted ? 1 : 0) << ',' << (e.sell_accepted ? 1 : 0)
          << ',' << format_number(e.buy_price) << ','
          << format_number(e.sell_price) << ',' << format_number(e.profit)
          << ',' << format_number(e.cumulative) << '\n';
    }
  }
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace epf
