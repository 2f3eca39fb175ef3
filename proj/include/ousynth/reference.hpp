#pragma once

// Serial reference implementations of the OpenMP-parallel kernels.
// Plain single-thread loops, kept for parity tests (results must match the
// parallel kernels bit-for-bit) and for the bench_kernels comparison.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ousynth/apt_model.hpp"
#include "ousynth/market_pipeline.hpp"
#include "ousynth/ou_model.hpp"
#include "ousynth/stats_eval.hpp"

namespace ousynth::ref {

KdeEstimate kde_1d(std::span<const double> samples,
                   std::optional<std::vector<double>> grid = std::nullopt,
                   std::optional<double> bandwidth = std::nullopt);

KdeEstimate kde_2d(std::span<const double> x, std::span<const double> y,
                   std::optional<std::vector<double>> grid_x = std::nullopt,
                   std::optional<std::vector<double>> grid_y = std::nullopt,
                   std::optional<double> bandwidth_x = std::nullopt,
                   std::optional<double> bandwidth_y = std::nullopt);

std::vector<Eigen::MatrixXd> multi_trace(const OuParameters& params, const Eigen::VectorXd& x0,
                                         int steps, int n_traces, uint64_t base_seed);

std::vector<PricePanel> generate_etf_scenarios(const MarketModel& model, int steps, int n_traces,
                                               uint64_t base_seed, int retry_cap = 16);

PricePanel generate_stock_universe(const std::vector<AptCoefficients>& coeff_set,
                                   const FactorPanel& factors, NoiseMode noise_mode,
                                   uint64_t base_seed, int retry_cap = 16);

}  // namespace ousynth::ref
