#pragma once

#include "epf/dates.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace epf {

/// Weekday bookkeeping for a day panel: ISO weekday per day and the matching
/// one-hot dummy matrix (column j is 1 iff weekday == j+1).
struct CalendarFrame {
  Eigen::VectorXi weekday;   // D, values 1..7
  Eigen::MatrixXd dummies;   // D x 7

  static CalendarFrame for_days(const std::vector<Date>& days);
};

/// Immutable D x 24 hourly panel of day-ahead prices plus aligned exogenous
/// forecasts and calendar. Hours are load periods 1..24 stored in columns
/// 0..23. Safe to share across threads once built.
struct MarketDataset {
  std::vector<Date> days;
  Eigen::MatrixXd prices_da;                 // D x 24
  std::optional<Eigen::MatrixXd> prices_id;  // D x 24
  std::optional<Eigen::MatrixXd> prices_bal; // D x 24
  Eigen::MatrixXd exog1;                     // D x 24, system load forecast
  Eigen::MatrixXd exog2;                     // D x 24, RES generation forecast
  CalendarFrame calendar;

  int num_days() const { return static_cast<int>(days.size()); }

  /// Row index of a calendar date, or -1 if absent.
  int index_of(Date d) const;

  /// Contiguous day slice [first, first+count).
  MarketDataset slice(int first, int count) const;

  /// Shape and finiteness checks; `exog_nonneg` additionally rejects negative
  /// exogenous values (enforced at ingestion, not after standardization).
  void validate(bool exog_nonneg) const;
};

/// Column names expected in the input CSV. `price_id`/`price_bal` are picked
/// up when present in the header.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string price_da = "price_da";
  std::string price_id = "price_id";
  std::string price_bal = "price_bal";
  std::string load_fc = "load_fc";
  std::string res_fc = "res_fc";
};

struct LoadReport {
  int duplicates_averaged = 0;
  int gaps_interpolated = 0;
};

struct LoadResult {
  MarketDataset data;
  LoadReport report;
};

/// Load and validate an hourly CSV. Duplicated clock-change hours are
/// averaged, single missing hours linearly interpolated; anything longer is a
/// GapError. Negative exogenous values raise ValidationError.
LoadResult load_dataset(const std::filesystem::path& path,
                        const CsvSchema& schema = {});

/// Location/scale of the price VST: asinh((P - center) / scale).
struct VstParams {
  double center = 0.0;
  double scale = 1.0;  // > 0
};

/// Zero-mean unit-variance scaler for one exogenous panel.
struct PanelScaler {
  double mean = 0.0;
  double sd = 1.0;
};

struct DatasetTransform {
  VstParams price;
  PanelScaler exog1;
  PanelScaler exog2;
};

struct TransformResult {
  MarketDataset data;
  DatasetTransform transform;
};

/// Estimate transform parameters on a dataset: price center = median, scale =
/// MAD scaled by 1.4826 (consistent with the normal standard deviation);
/// exogenous panels get plain mean/sd scalers. Requires >= 30 days; zero MAD
/// raises DegenerateScaleError.
DatasetTransform fit_vst(const MarketDataset& data);

/// Apply previously estimated parameters: all price panels mapped through
/// asinh((P - center)/scale), exogenous panels standardized.
MarketDataset apply_vst(const MarketDataset& data, const DatasetTransform& t);

/// fit_vst + apply_vst on the same data.
TransformResult asinh_transform(const MarketDataset& data);

/// Exact inverse of the price VST: center + scale * sinh(v).
Eigen::MatrixXd invert_vst(const Eigen::MatrixXd& values, const VstParams& p);

double median(std::vector<double> values);

}  // namespace epf
