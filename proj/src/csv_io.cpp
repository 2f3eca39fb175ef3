#include "ousynth/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ousynth/errors.hpp"
#include "ousynth/model_io.hpp"

namespace ousynth {

MissingPolicy parse_missing_policy(const std::string& name) {
    if (name == "error") return MissingPolicy::error;
    if (name == "forward_fill") return MissingPolicy::forward_fill;
    throw DomainError("unknown missing-data policy '" + name + "' (expected error|forward_fill)");
}

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r')
        cells.back().pop_back();
    return cells;
}

double parse_price_cell(const std::string& cell, size_t row, size_t col) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError("unparseable price cell '" + cell + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    if (!(value > 0.0))
        throw ParseError("non-positive price '" + cell + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    return value;
}

// calendar dates or plain step indices, detected from the first data row
int64_t parse_axis_cell(const std::string& cell, Axis axis, size_t row) {
    if (axis == Axis::calendar) return parse_iso_date(cell);
    int64_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError("unparseable step index '" + cell + "' at row " + std::to_string(row));
    return v;
}

bool looks_like_iso_date(const std::string& cell) {
    return cell.size() == 10 && cell[4] == '-' && cell[7] == '-';
}

}  // namespace

IngestResult read_price_csv(const std::string& path, MissingPolicy policy,
                            const std::string& date_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "': empty file (header expected)");
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2)
        throw ParseError("'" + path + "': header needs a date column and at least one ticker");
    if (header[0] != date_column)
        throw ParseError("'" + path + "': first header cell is '" + header[0] + "', expected '" +
                         date_column + "'");
    const size_t n_cols = header.size() - 1;

    struct Row {
        int64_t date;
        std::vector<std::string> cells;
    };
    std::vector<Row> rows;
    Axis axis = Axis::calendar;
    size_t row_no = 1;  // header is row 0 in reported coordinates
    bool axis_known = false;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") { ++row_no; continue; }
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ParseError("'" + path + "': row " + std::to_string(row_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        if (!axis_known) {
            axis = looks_like_iso_date(cells[0]) ? Axis::calendar : Axis::step;
            axis_known = true;
        }
        Row row;
        row.date = parse_axis_cell(cells[0], axis, row_no);
        row.cells.assign(cells.begin() + 1, cells.end());
        rows.push_back(std::move(row));
        ++row_no;
    }
    if (rows.size() < 2)
        throw ParseError("'" + path + "': needs at least 2 data rows, has " +
                         std::to_string(rows.size()));

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (size_t t = 0; t + 1 < rows.size(); ++t)
        if (rows[t].date == rows[t + 1].date)
            throw ParseError("'" + path + "': duplicate date " +
                             (axis == Axis::calendar ? format_iso_date(rows[t].date)
                                                     : std::to_string(rows[t].date)));

    IngestResult out;
    out.axis = axis;
    out.series.resize(n_cols);
    for (size_t j = 0; j < n_cols; ++j) {
        out.series[j].id = header[j + 1];
        out.series[j].dates.reserve(rows.size());
        out.series[j].values.reserve(rows.size());
    }
    for (size_t t = 0; t < rows.size(); ++t) {
        for (size_t j = 0; j < n_cols; ++j) {
            auto& series = out.series[j];
            const std::string& cell = rows[t].cells[j];
            double value;
            if (cell.empty()) {
                if (policy == MissingPolicy::error || series.values.empty())
                    throw ParseError("'" + path + "': missing value at row " + std::to_string(t + 1) +
                                     ", column " + std::to_string(j + 1) + " (" + series.id + ")");
                value = series.values.back();  // forward fill
            } else {
                value = parse_price_cell(cell, t + 1, j + 1);
            }
            series.dates.push_back(rows[t].date);
            series.values.push_back(value);
        }
    }
    return out;
}

IngestResult ingest_csv(const IngestConfig& config) {
    IngestResult result = read_price_csv(config.path, config.policy, config.date_column);
    if (!config.tickers.empty()) {
        std::vector<PriceSeries> picked;
        for (const auto& id : config.tickers) {
            auto it = std::find_if(result.series.begin(), result.series.end(),
                                   [&](const PriceSeries& s) { return s.id == id; });
            if (it == result.series.end())
                throw DomainError("'" + config.path + "' has no ticker column '" + id + "'");
            picked.push_back(std::move(*it));
        }
        result.series = std::move(picked);
    }
    if (!config.market_ticker.empty()) {
        const bool found = std::any_of(result.series.begin(), result.series.end(),
                                       [&](const PriceSeries& s) { return s.id == config.market_ticker; });
        if (!found)
            throw DomainError("unknown market ticker '" + config.market_ticker + "' in '" +
                              config.path + "'");
    }
    return result;
}

PricePanel panel_from_csv(const std::string& path, MissingPolicy policy,
                          const std::string& date_column) {
    IngestResult in = read_price_csv(path, policy, date_column);
    return align_panel(in.series, in.axis);
}

void write_panel_csv(const PricePanel& panel, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "date";
    for (const auto& id : panel.columns) out << ',' << id;
    out << '\n';
    for (int t = 0; t < panel.rows(); ++t) {
        const int64_t d = panel.dates[static_cast<size_t>(t)];
        out << (panel.axis == Axis::calendar ? format_iso_date(d) : std::to_string(d));
        for (int j = 0; j < panel.cols(); ++j) out << ',' << format_double(panel.values(t, j));
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

namespace {

void write_kde_pair_csv(const KdeEstimate& real, const KdeEstimate& synth,
                        const std::filesystem::path& path) {
    std::ostringstream out;
    out << "grid,real_density,synth_density\n";
    for (size_t i = 0; i < real.grid_x.size(); ++i)
        out << format_double(real.grid_x[i]) << ',' << format_double(real.density(static_cast<Eigen::Index>(i), 0))
            << ',' << format_double(synth.density(static_cast<Eigen::Index>(i), 0)) << '\n';
    write_text_atomic(path, out.str());
}

void write_kde2d_pair_csv(const KdeEstimate& real, const KdeEstimate& synth,
                          const std::filesystem::path& path) {
    std::ostringstream out;
    out << "x,y,real_density,synth_density\n";
    for (size_t i = 0; i < real.grid_x.size(); ++i)
        for (size_t j = 0; j < real.grid_y.size(); ++j)
            out << format_double(real.grid_x[i]) << ',' << format_double(real.grid_y[j]) << ','
                << format_double(real.density(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                << ','
                << format_double(synth.density(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                << '\n';
    write_text_atomic(path, out.str());
}

}  // namespace

void write_eval_report(const EvalReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::ostringstream ks;
    ks << "ticker,D,p,n1,n2\n";
    for (const auto& s : report.series)
        ks << s.id << ',' << format_double(s.ks.statistic) << ',' << format_double(s.ks.p_value)
           << ',' << s.ks.n1 << ',' << s.ks.n2 << '\n';
    write_text_atomic(dir / "ks.csv", ks.str());

    std::ostringstream mom;
    mom << "ticker,dataset,mean,std,skewness,excess_kurtosis\n";
    for (const auto& s : report.series) {
        const auto row = [&](const char* name, const Moments& m) {
            mom << s.id << ',' << name << ',' << format_double(m.mean) << ','
                << format_double(m.stddev) << ',' << format_double(m.skewness) << ','
                << format_double(m.excess_kurtosis) << '\n';
        };
        row("real", s.real_moments);
        row("synthetic", s.synth_moments);
    }
    write_text_atomic(dir / "moments.csv", mom.str());

    for (const auto& s : report.series)
        write_kde_pair_csv(s.real_kde, s.synth_kde, dir / ("kde_" + s.id + ".csv"));
    for (const auto& p : report.pairs)
        write_kde2d_pair_csv(p.real_kde, p.synth_kde,
                             dir / ("kde2d_" + p.market_id + "_" + p.sector_id + ".csv"));
}

}  // namespace ousynth
