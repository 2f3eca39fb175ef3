#include "ousynth/timeseries.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <unordered_set>

#include "ousynth/errors.hpp"

namespace ousynth {

int64_t parse_iso_date(const std::string& text) {
    // YYYY-MM-DD, fixed width
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ParseError("invalid date '" + text + "' (expected YYYY-MM-DD)");
    auto digits = [&](int from, int to) {
        int v = 0;
        for (int i = from; i < to; ++i) {
            if (text[i] < '0' || text[i] > '9')
                throw ParseError("invalid date '" + text + "' (expected YYYY-MM-DD)");
            v = v * 10 + (text[i] - '0');
        }
        return v;
    };
    const int y = digits(0, 4), m = digits(5, 7), d = digits(8, 10);
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + text + "'");
    return std::chrono::sys_days(ymd).time_since_epoch().count();
}

std::string format_iso_date(int64_t serial) {
    const std::chrono::year_month_day ymd{
        std::chrono::sys_days{std::chrono::days{serial}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

int PricePanel::column_index(const std::string& id) const {
    for (size_t j = 0; j < columns.size(); ++j)
        if (columns[j] == id) return static_cast<int>(j);
    return -1;
}

void check_price_series(const PriceSeries& series) {
    if (series.values.size() != series.dates.size())
        throw DomainError("series '" + series.id + "': values/dates length mismatch");
    if (series.values.size() < 2)
        throw DomainError("series '" + series.id + "': needs at least 2 observations, has " +
                          std::to_string(series.values.size()));
    for (size_t t = 0; t + 1 < series.dates.size(); ++t)
        if (series.dates[t + 1] <= series.dates[t])
            throw DomainError("series '" + series.id + "': dates not strictly increasing at index " +
                              std::to_string(t + 1));
    for (size_t t = 0; t < series.values.size(); ++t)
        if (!(series.values[t] > 0.0))
            throw DomainError("series '" + series.id + "': non-positive price at date " +
                              std::to_string(series.dates[t]));
}

ReturnSeries returns_from_prices(const PriceSeries& prices) {
    if (prices.values.size() != prices.dates.size() || prices.values.size() < 2)
        throw DomainError("series '" + prices.id + "': needs at least 2 prices");
    ReturnSeries out;
    out.id = prices.id;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.values.resize(prices.values.size() - 1);
    for (size_t t = 0; t < out.values.size(); ++t) {
        const double p0 = prices.values[t], p1 = prices.values[t + 1];
        if (!(p0 > 0.0))
            throw DomainError("series '" + prices.id + "': non-positive price at date " +
                              std::to_string(prices.dates[t]));
        if (!(p1 > 0.0))
            throw DomainError("series '" + prices.id + "': non-positive price at date " +
                              std::to_string(prices.dates[t + 1]));
        out.values[t] = p1 / p0 - 1.0;
    }
    return out;
}

PriceSeries prices_from_returns(const ReturnSeries& returns, double start,
                                std::optional<int64_t> start_date) {
    if (!(start > 0.0)) throw DomainError("start level must be positive");
    PriceSeries out;
    out.id = returns.id;
    out.dates.reserve(returns.dates.size() + 1);
    out.dates.push_back(start_date.value_or(returns.dates.empty() ? 0 : returns.dates.front() - 1));
    out.dates.insert(out.dates.end(), returns.dates.begin(), returns.dates.end());
    out.values.reserve(returns.values.size() + 1);
    out.values.push_back(start);
    double level = start;
    for (size_t t = 0; t < returns.values.size(); ++t) {
        const double r = returns.values[t];
        if (!(r > -1.0))
            throw DomainError("series '" + returns.id + "': return <= -1 at index " +
                              std::to_string(t));
        level *= 1.0 + r;
        out.values.push_back(level);
    }
    return out;
}

namespace {

void require_same_axis(const ReturnSeries& a, const ReturnSeries& b, const char* op) {
    if (a.dates != b.dates)
        throw AlignmentError(std::string(op) + ": date axes differ ('" + a.id + "' has " +
                             std::to_string(a.dates.size()) + " dates, '" + b.id + "' has " +
                             std::to_string(b.dates.size()) + ")");
}

}  // namespace

ReturnSeries relative_returns(const ReturnSeries& sector, const ReturnSeries& market) {
    require_same_axis(sector, market, "relative_returns");
    ReturnSeries out;
    out.id = sector.id;
    out.dates = sector.dates;
    out.values.resize(sector.values.size());
    for (size_t t = 0; t < out.values.size(); ++t)
        out.values[t] = sector.values[t] - market.values[t];
    return out;
}

ReturnSeries recombine_returns(const ReturnSeries& relative, const ReturnSeries& market) {
    require_same_axis(relative, market, "recombine_returns");
    ReturnSeries out;
    out.id = relative.id;
    out.dates = relative.dates;
    out.values.resize(relative.values.size());
    for (size_t t = 0; t < out.values.size(); ++t)
        out.values[t] = relative.values[t] + market.values[t];
    return out;
}

PricePanel align_panel(const std::vector<PriceSeries>& series, Axis axis) {
    if (series.empty()) throw AlignmentError("align_panel: no input series");
    for (const auto& s : series) check_price_series(s);

    // intersection of all (strictly increasing) date axes
    std::vector<int64_t> common(series[0].dates);
    for (size_t k = 1; k < series.size(); ++k) {
        std::vector<int64_t> next;
        std::set_intersection(common.begin(), common.end(), series[k].dates.begin(),
                              series[k].dates.end(), std::back_inserter(next));
        common.swap(next);
    }
    if (common.size() < 2) {
        const auto show = [axis](int64_t d) {
            return axis == Axis::calendar ? format_iso_date(d) : std::to_string(d);
        };
        std::string ranges;
        for (const auto& s : series) {
            ranges += "\n  " + s.id + ": [" + show(s.dates.front()) + ", " + show(s.dates.back()) +
                      "] (" + std::to_string(s.dates.size()) + " dates)";
        }
        throw AlignmentError("align_panel: fewer than 2 shared dates across inputs;" + ranges);
    }

    PricePanel panel;
    panel.axis = axis;
    panel.dates = common;
    panel.values.resize(static_cast<Eigen::Index>(common.size()),
                        static_cast<Eigen::Index>(series.size()));
    for (size_t k = 0; k < series.size(); ++k) {
        panel.columns.push_back(series[k].id);
        size_t i = 0;
        for (size_t t = 0; t < common.size(); ++t) {
            while (series[k].dates[i] != common[t]) ++i;
            panel.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) =
                series[k].values[i];
        }
    }
    return panel;
}

PriceSeries panel_column(const PricePanel& panel, int j) {
    if (j < 0 || j >= panel.cols())
        throw DomainError("panel column index " + std::to_string(j) + " out of range");
    PriceSeries out;
    out.id = panel.columns[static_cast<size_t>(j)];
    out.dates = panel.dates;
    out.values.resize(panel.dates.size());
    for (int t = 0; t < panel.rows(); ++t) out.values[static_cast<size_t>(t)] = panel.values(t, j);
    return out;
}

std::vector<double> column_returns(const PricePanel& panel, int j) {
    ReturnSeries r = returns_from_prices(panel_column(panel, j));
    return r.values;
}

PricePanel select_columns(const PricePanel& panel, const std::vector<std::string>& ids) {
    PricePanel out;
    out.axis = panel.axis;
    out.dates = panel.dates;
    out.columns = ids;
    out.values.resize(panel.values.rows(), static_cast<Eigen::Index>(ids.size()));
    for (size_t j = 0; j < ids.size(); ++j) {
        const int src = panel.column_index(ids[j]);
        if (src < 0) throw DomainError("panel has no column '" + ids[j] + "'");
        out.values.col(static_cast<Eigen::Index>(j)) = panel.values.col(src);
    }
    return out;
}

}  // namespace ousynth
