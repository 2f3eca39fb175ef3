#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ousynth {

// Date axes are carried as int64 throughout: days since 1970-01-01 for
// calendar panels, plain step indices 0,1,2,... for generated panels.
// All model math uses the row index; the axis only matters for I/O.
enum class Axis { calendar, step };

int64_t parse_iso_date(const std::string& text);
std::string format_iso_date(int64_t serial);

/// Normalized (start-anchored) price levels on strictly increasing dates.
struct PriceSeries {
    std::string id;
    std::vector<int64_t> dates;
    std::vector<double> values;
};

/// Simple per-step returns; dates are the end-day of each return.
struct ReturnSeries {
    std::string id;
    std::vector<int64_t> dates;
    std::vector<double> values;
};

/// Aligned T x N value matrix over a shared trading-day axis.
/// Column order is stable and recorded in `columns`.
struct PricePanel {
    Axis axis = Axis::calendar;
    std::vector<int64_t> dates;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // T x N

    int rows() const { return static_cast<int>(values.rows()); }
    int cols() const { return static_cast<int>(values.cols()); }
    int column_index(const std::string& id) const;  // -1 when absent
};

/// Throws DomainError unless length >= 2, strictly increasing dates,
/// all values > 0.
void check_price_series(const PriceSeries& series);

/// out[t] = p[t+1]/p[t] - 1. Any non-positive price is a DomainError
/// naming the offending date.
ReturnSeries returns_from_prices(const PriceSeries& prices);

/// Cumulative propagation out[0] = start, out[t+1] = out[t] * (1 + r[t]).
/// The start date defaults to one axis step before the first return date.
PriceSeries prices_from_returns(const ReturnSeries& returns, double start = 1.0,
                                std::optional<int64_t> start_date = std::nullopt);

/// sector - market, elementwise on an identical date axis.
ReturnSeries relative_returns(const ReturnSeries& sector, const ReturnSeries& market);

/// relative + market; exact inverse of relative_returns.
ReturnSeries recombine_returns(const ReturnSeries& relative, const ReturnSeries& market);

/// Inner join on dates, columns in input order. Throws AlignmentError
/// (listing per-series date ranges) when fewer than 2 shared dates remain.
PricePanel align_panel(const std::vector<PriceSeries>& series, Axis axis = Axis::calendar);

// Panel utilities.
PriceSeries panel_column(const PricePanel& panel, int j);
std::vector<double> column_returns(const PricePanel& panel, int j);
PricePanel select_columns(const PricePanel& panel, const std::vector<std::string>& ids);

}  // namespace ousynth
