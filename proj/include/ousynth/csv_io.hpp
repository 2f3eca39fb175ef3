#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ousynth/stats_eval.hpp"
#include "ousynth/timeseries.hpp"

namespace ousynth {

enum class MissingPolicy { error, forward_fill };

MissingPolicy parse_missing_policy(const std::string& name);

struct IngestConfig {
    std::string path;
    std::string date_column = "date";
    std::vector<std::string> tickers;  // empty = every non-date column
    MissingPolicy policy = MissingPolicy::error;
    std::optional<int64_t> anchor_date;  // applied by the panel builders
    std::string market_ticker;
};

struct IngestResult {
    std::vector<PriceSeries> series;
    Axis axis = Axis::calendar;
};

/// Wide CSV: header `date,TICKER,...`, one row per day, cells positive
/// decimal prices. Rows are sorted by date; duplicate dates, unparseable
/// cells (reported with row/column coordinates) and — under the error
/// policy — missing cells are ParseErrors. forward_fill carries the
/// previous day's value. The date column holds either YYYY-MM-DD dates or
/// plain step indices; the axis is detected from the first row.
IngestResult read_price_csv(const std::string& path,
                            MissingPolicy policy = MissingPolicy::error,
                            const std::string& date_column = "date");

/// read_price_csv plus ticker selection and market-ticker validation.
IngestResult ingest_csv(const IngestConfig& config);

PricePanel panel_from_csv(const std::string& path,
                          MissingPolicy policy = MissingPolicy::error,
                          const std::string& date_column = "date");

/// Shortest round-trip decimals; mutually inverse with read_price_csv.
void write_panel_csv(const PricePanel& panel, const std::filesystem::path& path);

/// ks.csv, moments.csv, kde_<ticker>.csv, kde2d_<market>_<sector>.csv.
void write_eval_report(const EvalReport& report, const std::filesystem::path& dir);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace ousynth
