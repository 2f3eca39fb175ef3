#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ousynth/ou_model.hpp"
#include "ousynth/timeseries.hpp"

namespace ousynth {

// Fitted market model: OU parameters over the state vector
// [market normalized price, sector relative-normalized prices...],
// plus the column roles needed to map simulations back to prices.
struct MarketModel {
    OuParameters ou;
    int market_column = 0;
    std::vector<std::string> column_ids;
    double anchor = 1.0;
    Eigen::VectorXd x0;  // simulation start state

    int dim() const { return ou.dim(); }
};

void check_market_model(const MarketModel& model);

/// Aligned panel of plain normalized prices, market column first, every
/// column rescaled to `anchor` at the first row (or at `anchor_date` when
/// given, trimming earlier rows).
PricePanel normalized_panel(const std::vector<PriceSeries>& series, const std::string& market_id,
                            double anchor = 1.0,
                            std::optional<int64_t> anchor_date = std::nullopt);

/// Training panel for estimation: market column = normalized prices;
/// every sector column = relative-normalized prices, i.e. the sector's
/// return minus the market's return propagated from the anchor.
PricePanel build_training_panel(const std::vector<PriceSeries>& series,
                                const std::string& market_id, double anchor = 1.0,
                                std::optional<int64_t> anchor_date = std::nullopt);

/// estimate_ou on the training panel plus column roles;
/// x0 is the last observed panel row.
MarketModel fit_market(const PricePanel& training_panel, const std::string& market_id);

/// Copy of the model starting scenarios from the anchor state instead of
/// the last observation (full-history style panels).
MarketModel from_anchor(const MarketModel& model);

/// One synthetic scenario of normalized ETF prices, (steps+1) x dim, every
/// column starting at the anchor. Sector columns are rebuilt by recombining
/// simulated relative returns with simulated market returns; the market
/// column is the simulated path re-anchored. Scenarios whose raw paths cross
/// zero or produce returns <= -1 are redrawn with derive_seed(seed, attempt)
/// up to retry_cap times, then GenerationError.
PricePanel generate_etf_scenario(const MarketModel& model, int steps, uint64_t seed,
                                 int retry_cap = 16);

/// Scenario k uses seed derive_seed(base_seed, k); traces run in parallel.
std::vector<PricePanel> generate_etf_scenarios(const MarketModel& model, int steps, int n_traces,
                                               uint64_t base_seed, int retry_cap = 16);

}  // namespace ousynth
