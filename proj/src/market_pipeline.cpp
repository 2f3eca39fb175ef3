#include "ousynth/market_pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "ousynth/errors.hpp"
#include "ousynth/rng.hpp"

namespace ousynth {

void check_market_model(const MarketModel& model) {
    check_ou_parameters(model.ou);
    const int n = model.dim();
    if (model.market_column < 0 || model.market_column >= n)
        throw DomainError("market model: market_column out of range");
    if (static_cast<int>(model.column_ids.size()) != n)
        throw DomainError("market model: column_ids length mismatch");
    if (!(model.anchor > 0.0)) throw DomainError("market model: anchor must be positive");
    if (model.x0.size() != n) throw DomainError("market model: x0 length mismatch");
}

namespace {

PricePanel market_first_normalized(const PricePanel& aligned, const std::string& market_id,
                                   double anchor, std::optional<int64_t> anchor_date) {
    const int m = aligned.column_index(market_id);
    if (m < 0) throw DomainError("market ticker '" + market_id + "' not among panel columns");
    if (!(anchor > 0.0)) throw DomainError("anchor must be positive");

    int start = 0;
    if (anchor_date) {
        auto it = std::find(aligned.dates.begin(), aligned.dates.end(), *anchor_date);
        if (it == aligned.dates.end())
            throw AlignmentError("anchor date " + std::to_string(*anchor_date) +
                                 " is not on the aligned axis");
        start = static_cast<int>(it - aligned.dates.begin());
    }
    if (aligned.rows() - start < 2)
        throw AlignmentError("fewer than 2 rows remain after the anchor date");

    PricePanel out;
    out.axis = aligned.axis;
    out.dates.assign(aligned.dates.begin() + start, aligned.dates.end());
    out.columns.push_back(market_id);
    for (const auto& id : aligned.columns)
        if (id != market_id) out.columns.push_back(id);

    const int rows = aligned.rows() - start;
    out.values.resize(rows, aligned.cols());
    for (int j = 0; j < static_cast<int>(out.columns.size()); ++j) {
        const int src = aligned.column_index(out.columns[static_cast<size_t>(j)]);
        const double base = aligned.values(start, src);
        out.values.col(j) = aligned.values.col(src).segment(start, rows) * (anchor / base);
    }
    return out;
}

}  // namespace

PricePanel normalized_panel(const std::vector<PriceSeries>& series, const std::string& market_id,
                            double anchor, std::optional<int64_t> anchor_date) {
    return market_first_normalized(align_panel(series), market_id, anchor, anchor_date);
}

PricePanel build_training_panel(const std::vector<PriceSeries>& series,
                                const std::string& market_id, double anchor,
                                std::optional<int64_t> anchor_date) {
    PricePanel panel = normalized_panel(series, market_id, anchor, anchor_date);

    // sectors become relative-normalized prices: propagate (sector - market)
    // returns from the anchor
    const ReturnSeries market = returns_from_prices(panel_column(panel, 0));
    for (int j = 1; j < panel.cols(); ++j) {
        const ReturnSeries sector = returns_from_prices(panel_column(panel, j));
        const PriceSeries rel =
            prices_from_returns(relative_returns(sector, market), anchor, panel.dates.front());
        for (int t = 0; t < panel.rows(); ++t)
            panel.values(t, j) = rel.values[static_cast<size_t>(t)];
    }
    return panel;
}

MarketModel fit_market(const PricePanel& training_panel, const std::string& market_id) {
    const int m = training_panel.column_index(market_id);
    if (m < 0)
        throw DomainError("market ticker '" + market_id + "' not among panel columns");

    MarketModel model;
    model.ou = estimate_ou(training_panel.values).params;
    model.market_column = m;
    model.column_ids = training_panel.columns;
    model.anchor = training_panel.values(0, m);
    model.x0 = training_panel.values.row(training_panel.rows() - 1).transpose();
    return model;
}

MarketModel from_anchor(const MarketModel& model) {
    MarketModel out = model;
    out.x0 = Eigen::VectorXd::Constant(model.dim(), model.anchor);
    return out;
}

namespace {

// raw OU state -> normalized price panel; false when the draw must be
// rejected (a path crossed zero or a recombined return hit -1)
bool scenario_from_state(const MarketModel& model, const Eigen::MatrixXd& raw, PricePanel& out) {
    const int steps = static_cast<int>(raw.rows()) - 1;
    const int n = model.dim();
    const int m = model.market_column;

    if (!raw.allFinite() || raw.minCoeff() <= 0.0) return false;

    std::vector<double> market_ret(static_cast<size_t>(steps));
    for (int t = 0; t < steps; ++t) market_ret[static_cast<size_t>(t)] = raw(t + 1, m) / raw(t, m) - 1.0;

    out.axis = Axis::step;
    out.dates.resize(static_cast<size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) out.dates[static_cast<size_t>(t)] = t;
    out.columns = model.column_ids;
    out.values.resize(steps + 1, n);

    for (int j = 0; j < n; ++j) {
        double level = model.anchor;
        out.values(0, j) = level;
        for (int t = 0; t < steps; ++t) {
            double r = market_ret[static_cast<size_t>(t)];
            if (j != m) r += raw(t + 1, j) / raw(t, j) - 1.0;  // relative + market
            if (!(r > -1.0)) return false;
            level *= 1.0 + r;
            out.values(t + 1, j) = level;
        }
    }
    return out.values.allFinite() && out.values.minCoeff() > 0.0;
}

}  // namespace

PricePanel generate_etf_scenario(const MarketModel& model, int steps, uint64_t seed,
                                 int retry_cap) {
    check_market_model(model);
    if (steps < 1) throw DomainError("generate_etf_scenario: steps must be >= 1");

    for (int attempt = 0; attempt <= retry_cap; ++attempt) {
        const uint64_t s =
            attempt == 0 ? seed : derive_seed(seed, static_cast<uint64_t>(attempt));
        const Eigen::MatrixXd raw = simulate_ou(model.ou, model.x0, steps, s);
        PricePanel panel;
        if (scenario_from_state(model, raw, panel)) return panel;
    }
    throw GenerationError("scenario rejected (non-positive prices) in " +
                          std::to_string(retry_cap + 1) + " consecutive draws from seed " +
                          std::to_string(seed));
}

std::vector<PricePanel> generate_etf_scenarios(const MarketModel& model, int steps, int n_traces,
                                               uint64_t base_seed, int retry_cap) {
    if (n_traces < 1) throw DomainError("generate_etf_scenarios: n_traces must be >= 1");
    check_market_model(model);

    std::vector<PricePanel> panels(static_cast<size_t>(n_traces));
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_traces; ++k) {
        try {
            panels[static_cast<size_t>(k)] = generate_etf_scenario(
                model, steps, derive_seed(base_seed, static_cast<uint64_t>(k)), retry_cap);
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return panels;
}

}  // namespace ousynth
