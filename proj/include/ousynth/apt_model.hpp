#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ousynth/timeseries.hpp"

namespace ousynth {

// Factor values driving per-stock returns: column 0 is the market return,
// columns 1..K-1 are sector relative returns, all derived from a normalized
// ETF price panel.
struct FactorPanel {
    std::vector<int64_t> dates;      // end-day of each return row
    std::vector<std::string> ids;    // market id first
    Eigen::MatrixXd values;          // T x K

    int rows() const { return static_cast<int>(values.rows()); }
    int factors() const { return static_cast<int>(values.cols()); }
};

/// Per-stock factor regression r = alpha + betas . f + eps.
struct AptCoefficients {
    std::string stock_id;
    double alpha = 0.0;
    Eigen::VectorXd betas;       // length K
    double resid_sigma = 0.0;    // std of eps, denominator T-(K+1)
    Eigen::VectorXd residuals;   // stored fit residuals, length T
    double r_squared = 0.0;
};

enum class NoiseMode { gaussian, bootstrap, none };

NoiseMode parse_noise_mode(const std::string& name);
std::string noise_mode_name(NoiseMode mode);

/// Market returns and sector-vs-market relative returns of an ETF panel.
FactorPanel build_factor_panel(const PricePanel& etf_panel, int market_column);

/// OLS with intercept of the stock returns on all K factors. Requires
/// T >= K+2 and a full-rank factor matrix (RankDeficientError names the
/// collinear columns otherwise).
AptCoefficients fit_apt(const ReturnSeries& stock_returns, const FactorPanel& factors);

/// r(t) = alpha + betas . f(t) + eps(t); eps is N(0, resid_sigma^2) draws,
/// bootstrap resamples of the stored residuals, or zero. One Rng draw per
/// step, deterministic per seed.
ReturnSeries generate_stock_returns(const AptCoefficients& coeffs, const FactorPanel& factors,
                                    NoiseMode noise_mode, uint64_t seed);

/// One normalized price path per stock, anchored at 1; stock i uses seed
/// derive_seed(base_seed, i), redrawing on returns <= -1 up to retry_cap.
/// Stocks are generated in parallel.
PricePanel generate_stock_universe(const std::vector<AptCoefficients>& coeff_set,
                                   const FactorPanel& factors, NoiseMode noise_mode,
                                   uint64_t base_seed, int retry_cap = 16);

}  // namespace ousynth
