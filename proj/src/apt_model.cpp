#include "ousynth/apt_model.hpp"

#include <cmath>

#include "ousynth/errors.hpp"
#include "ousynth/rng.hpp"

namespace ousynth {

NoiseMode parse_noise_mode(const std::string& name) {
    if (name == "gaussian") return NoiseMode::gaussian;
    if (name == "bootstrap") return NoiseMode::bootstrap;
    if (name == "none") return NoiseMode::none;
    throw DomainError("unknown noise mode '" + name + "' (expected gaussian|bootstrap|none)");
}

std::string noise_mode_name(NoiseMode mode) {
    switch (mode) {
        case NoiseMode::gaussian: return "gaussian";
        case NoiseMode::bootstrap: return "bootstrap";
        case NoiseMode::none: return "none";
    }
    return "?";
}

FactorPanel build_factor_panel(const PricePanel& etf_panel, int market_column) {
    const int n = etf_panel.cols();
    if (market_column < 0 || market_column >= n)
        throw DomainError("build_factor_panel: market column out of range");
    if (n < 2) throw DomainError("build_factor_panel: need a market and at least one sector");

    const std::vector<double> market = column_returns(etf_panel, market_column);
    const int rows = static_cast<int>(market.size());

    FactorPanel factors;
    factors.dates.assign(etf_panel.dates.begin() + 1, etf_panel.dates.end());
    factors.values.resize(rows, n);
    factors.ids.push_back(etf_panel.columns[static_cast<size_t>(market_column)]);
    for (int t = 0; t < rows; ++t) factors.values(t, 0) = market[static_cast<size_t>(t)];

    int col = 1;
    for (int j = 0; j < n; ++j) {
        if (j == market_column) continue;
        const std::vector<double> sector = column_returns(etf_panel, j);
        for (int t = 0; t < rows; ++t)
            factors.values(t, col) = sector[static_cast<size_t>(t)] - market[static_cast<size_t>(t)];
        factors.ids.push_back(etf_panel.columns[static_cast<size_t>(j)]);
        ++col;
    }
    return factors;
}

AptCoefficients fit_apt(const ReturnSeries& stock_returns, const FactorPanel& factors) {
    const int rows = factors.rows();
    const int k = factors.factors();
    if (static_cast<int>(stock_returns.values.size()) != rows)
        throw AlignmentError("fit_apt: stock '" + stock_returns.id + "' has " +
                             std::to_string(stock_returns.values.size()) +
                             " returns but the factor panel has " + std::to_string(rows) + " rows");
    if (!stock_returns.dates.empty() && stock_returns.dates != factors.dates)
        throw AlignmentError("fit_apt: stock '" + stock_returns.id +
                             "' dates differ from the factor axis");
    if (rows < k + 2)
        throw InsufficientDataError("fit_apt: T=" + std::to_string(rows) + " rows for K=" +
                                    std::to_string(k) + " factors; requires T >= K+2 = " +
                                    std::to_string(k + 2));

    Eigen::MatrixXd x(rows, k + 1);
    x.col(0).setOnes();
    x.rightCols(k) = factors.values;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    if (sv(k) < tol) {
        // name the factor columns loading on the near-null direction
        const Eigen::VectorXd null_dir = svd.matrixV().col(k);
        std::string cols;
        for (int j = 1; j <= k; ++j) {
            if (std::abs(null_dir(j)) > 0.1)
                cols += (cols.empty() ? "" : ", ") + factors.ids[static_cast<size_t>(j - 1)];
        }
        if (cols.empty()) cols = "intercept";
        throw RankDeficientError("fit_apt: factor matrix is rank deficient; collinear columns: " +
                                 cols);
    }

    Eigen::Map<const Eigen::VectorXd> y(stock_returns.values.data(), rows);
    const Eigen::VectorXd coeff = svd.solve(y);

    AptCoefficients out;
    out.stock_id = stock_returns.id;
    out.alpha = coeff(0);
    out.betas = coeff.tail(k);
    out.residuals = y - x * coeff;
    const int dof = rows - (k + 1);
    out.resid_sigma = dof >= 1 ? std::sqrt(out.residuals.squaredNorm() / dof) : 0.0;
    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    const double ssr = out.residuals.squaredNorm();
    out.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr <= 1e-24 ? 1.0 : 0.0);
    return out;
}

ReturnSeries generate_stock_returns(const AptCoefficients& coeffs, const FactorPanel& factors,
                                    NoiseMode noise_mode, uint64_t seed) {
    const int rows = factors.rows();
    const int k = factors.factors();
    if (static_cast<int>(coeffs.betas.size()) != k)
        throw DomainError("generate_stock_returns: stock '" + coeffs.stock_id + "' has " +
                          std::to_string(coeffs.betas.size()) + " betas but the panel has " +
                          std::to_string(k) + " factors");
    if (noise_mode == NoiseMode::bootstrap && coeffs.residuals.size() == 0)
        throw DomainError("generate_stock_returns: bootstrap noise needs stored residuals");

    ReturnSeries out;
    out.id = coeffs.stock_id;
    out.dates = factors.dates;
    out.values.resize(static_cast<size_t>(rows));

    const Eigen::VectorXd systematic = factors.values * coeffs.betas;
    Rng rng(seed);
    for (int t = 0; t < rows; ++t) {
        double eps = 0.0;
        switch (noise_mode) {
            case NoiseMode::gaussian: eps = coeffs.resid_sigma * rng.normal(); break;
            case NoiseMode::bootstrap:
                eps = coeffs.residuals(static_cast<Eigen::Index>(
                    rng.uniform_index(static_cast<size_t>(coeffs.residuals.size()))));
                break;
            case NoiseMode::none: break;
        }
        out.values[static_cast<size_t>(t)] = coeffs.alpha + systematic(t) + eps;
    }
    return out;
}

PricePanel generate_stock_universe(const std::vector<AptCoefficients>& coeff_set,
                                   const FactorPanel& factors, NoiseMode noise_mode,
                                   uint64_t base_seed, int retry_cap) {
    if (coeff_set.empty()) throw DomainError("generate_stock_universe: empty coefficient set");
    const int rows = factors.rows();
    const int stocks = static_cast<int>(coeff_set.size());

    PricePanel panel;
    panel.axis = Axis::step;
    panel.dates.resize(static_cast<size_t>(rows) + 1);
    for (int t = 0; t <= rows; ++t) panel.dates[static_cast<size_t>(t)] = t;
    panel.columns.resize(static_cast<size_t>(stocks));
    panel.values.resize(rows + 1, stocks);

    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < stocks; ++i) {
        try {
            const auto& coeffs = coeff_set[static_cast<size_t>(i)];
            const uint64_t stock_seed = derive_seed(base_seed, static_cast<uint64_t>(i));
            bool done = false;
            for (int attempt = 0; attempt <= retry_cap && !done; ++attempt) {
                const uint64_t s = attempt == 0
                                       ? stock_seed
                                       : derive_seed(stock_seed, static_cast<uint64_t>(attempt));
                const ReturnSeries ret = generate_stock_returns(coeffs, factors, noise_mode, s);
                bool valid = true;
                for (double r : ret.values)
                    if (!(r > -1.0) || !std::isfinite(r)) { valid = false; break; }
                if (!valid) continue;
                double level = 1.0;
                panel.values(0, i) = level;
                for (int t = 0; t < rows; ++t) {
                    level *= 1.0 + ret.values[static_cast<size_t>(t)];
                    panel.values(t + 1, i) = level;
                }
                done = true;
            }
            if (!done)
                throw GenerationError("stock '" + coeffs.stock_id + "': returns <= -1 in " +
                                      std::to_string(retry_cap + 1) + " consecutive draws");
            panel.columns[static_cast<size_t>(i)] = coeffs.stock_id;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return panel;
}

}  // namespace ousynth
