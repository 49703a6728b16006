#pragma once

#include "epf/marketdata.hpp"
#include "epf/pointmodels.hpp"
#include "epf/probforecast.hpp"
#include "epf/trading.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace epf {

/// Deterministic numeric formatting shared by every CSV writer (%.12g).
std::string format_number(double v);

/// FNV-1a 64-bit hash, hex-encoded; used for config and artifact hashes.
std::string fnv1a_hex(const std::string& bytes);

void save_dataset_csv(const MarketDataset& data,
                      const std::filesystem::path& path);

/// `date,h1..h24` wide format.
void save_forecast_csv(const ForecastSet& fc, const std::filesystem::path& path);
ForecastSet load_forecast_csv(const std::filesystem::path& path);

/// `date,hour,level,value` long format.
void save_fan_csv(const QuantileFan& fan, const std::filesystem::path& path);
QuantileFan load_fan_csv(const std::filesystem::path& path);

/// `date,path_id,h1..h24`; multiple days may share one file.
void save_ensembles_csv(const std::vector<PathEnsemble>& ensembles,
                        const std::filesystem::path& path);

void save_ledger_csv(const TradeLedger& ledger,
                     const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace epf
