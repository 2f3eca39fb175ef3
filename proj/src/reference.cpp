#include "ousynth/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ousynth/errors.hpp"
#include "ousynth/rng.hpp"

namespace ousynth::ref {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double sample_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> grid(static_cast<size_t>(count));
    const double step = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i) grid[static_cast<size_t>(i)] = lo + step * i;
    grid.back() = hi;
    return grid;
}

}  // namespace

KdeEstimate kde_1d(std::span<const double> samples, std::optional<std::vector<double>> grid,
                   std::optional<double> bandwidth) {
    const size_t n = samples.size();
    if (n < 2) throw DomainError("kde_1d: needs at least 2 samples");
    const double sd = sample_sd(samples);
    if (!(sd > 0.0)) throw DomainError("kde_1d: degenerate sample (zero variance)");

    KdeEstimate out;
    out.kind = KdeKind::univariate;
    out.bandwidth_x = bandwidth.value_or(sd * std::pow(static_cast<double>(n), -0.2));
    if (grid) out.grid_x = std::move(*grid);
    else {
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        out.grid_x = linspace(*lo - 5.0 * out.bandwidth_x, *hi + 5.0 * out.bandwidth_x, 512);
    }

    const double h = out.bandwidth_x;
    const double norm = kInvSqrt2Pi / (static_cast<double>(n) * h);
    out.density.resize(static_cast<Eigen::Index>(out.grid_x.size()), 1);
    for (size_t i = 0; i < out.grid_x.size(); ++i) {
        double acc = 0.0;
        for (double x : samples) {
            const double u = (out.grid_x[i] - x) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out.density(static_cast<Eigen::Index>(i), 0) = acc * norm;
    }
    return out;
}

KdeEstimate kde_2d(std::span<const double> x, std::span<const double> y,
                   std::optional<std::vector<double>> grid_x,
                   std::optional<std::vector<double>> grid_y,
                   std::optional<double> bandwidth_x, std::optional<double> bandwidth_y) {
    const size_t n = x.size();
    if (n != y.size()) throw DomainError("kde_2d: x and y must be paired samples");
    if (n < 3) throw DomainError("kde_2d: needs at least 3 paired samples");
    const double sdx = sample_sd(x);
    const double sdy = sample_sd(y);
    if (!(sdx > 0.0) || !(sdy > 0.0))
        throw DomainError("kde_2d: degenerate covariance (an axis has zero variance)");

    KdeEstimate out;
    out.kind = KdeKind::bivariate;
    const double scott = std::pow(static_cast<double>(n), -1.0 / 6.0);
    out.bandwidth_x = bandwidth_x.value_or(sdx * scott);
    out.bandwidth_y = bandwidth_y.value_or(sdy * scott);
    if (grid_x) out.grid_x = std::move(*grid_x);
    else {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        out.grid_x = linspace(*lo - 5.0 * out.bandwidth_x, *hi + 5.0 * out.bandwidth_x, 64);
    }
    if (grid_y) out.grid_y = std::move(*grid_y);
    else {
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        out.grid_y = linspace(*lo - 5.0 * out.bandwidth_y, *hi + 5.0 * out.bandwidth_y, 64);
    }

    const double hx = out.bandwidth_x, hy = out.bandwidth_y;
    const double norm = kInvSqrt2Pi * kInvSqrt2Pi / (static_cast<double>(n) * hx * hy);
    out.density.resize(static_cast<Eigen::Index>(out.grid_x.size()),
                       static_cast<Eigen::Index>(out.grid_y.size()));
    for (size_t i = 0; i < out.grid_x.size(); ++i) {
        for (size_t j = 0; j < out.grid_y.size(); ++j) {
            double acc = 0.0;
            for (size_t s = 0; s < n; ++s) {
                const double ux = (out.grid_x[i] - x[s]) / hx;
                const double uy = (out.grid_y[j] - y[s]) / hy;
                acc += std::exp(-0.5 * (ux * ux + uy * uy));
            }
            out.density(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc * norm;
        }
    }
    return out;
}

std::vector<Eigen::MatrixXd> multi_trace(const OuParameters& params, const Eigen::VectorXd& x0,
                                         int steps, int n_traces, uint64_t base_seed) {
    if (n_traces < 1) throw DomainError("multi_trace: n_traces must be >= 1");
    std::vector<Eigen::MatrixXd> traces;
    traces.reserve(static_cast<size_t>(n_traces));
    for (int k = 0; k < n_traces; ++k)
        traces.push_back(simulate_ou(params, x0, steps, derive_seed(base_seed, static_cast<uint64_t>(k))));
    return traces;
}

std::vector<PricePanel> generate_etf_scenarios(const MarketModel& model, int steps, int n_traces,
                                               uint64_t base_seed, int retry_cap) {
    if (n_traces < 1) throw DomainError("generate_etf_scenarios: n_traces must be >= 1");
    std::vector<PricePanel> panels;
    panels.reserve(static_cast<size_t>(n_traces));
    for (int k = 0; k < n_traces; ++k)
        panels.push_back(generate_etf_scenario(
            model, steps, derive_seed(base_seed, static_cast<uint64_t>(k)), retry_cap));
    return panels;
}

PricePanel generate_stock_universe(const std::vector<AptCoefficients>& coeff_set,
                                   const FactorPanel& factors, NoiseMode noise_mode,
                                   uint64_t base_seed, int retry_cap) {
    if (coeff_set.empty()) throw DomainError("generate_stock_universe: empty coefficient set");
    const int rows = factors.rows();

    PricePanel panel;
    panel.axis = Axis::step;
    panel.dates.resize(static_cast<size_t>(rows) + 1);
    for (int t = 0; t <= rows; ++t) panel.dates[static_cast<size_t>(t)] = t;
    panel.values.resize(rows + 1, static_cast<Eigen::Index>(coeff_set.size()));

    for (size_t i = 0; i < coeff_set.size(); ++i) {
        const auto& coeffs = coeff_set[i];
        const uint64_t stock_seed = derive_seed(base_seed, static_cast<uint64_t>(i));
        bool done = false;
        for (int attempt = 0; attempt <= retry_cap && !done; ++attempt) {
            const uint64_t s =
                attempt == 0 ? stock_seed : derive_seed(stock_seed, static_cast<uint64_t>(attempt));
            const ReturnSeries ret = generate_stock_returns(coeffs, factors, noise_mode, s);
            bool valid = true;
            for (double r : ret.values)
                if (!(r > -1.0) || !std::isfinite(r)) { valid = false; break; }
            if (!valid) continue;
            double level = 1.0;
            panel.values(0, static_cast<Eigen::Index>(i)) = level;
            for (int t = 0; t < rows; ++t) {
                level *= 1.0 + ret.values[static_cast<size_t>(t)];
                panel.values(t + 1, static_cast<Eigen::Index>(i)) = level;
            }
            done = true;
        }
        if (!done)
            throw GenerationError("stock '" + coeffs.stock_id + "': returns <= -1 in " +
                                  std::to_string(retry_cap + 1) + " consecutive draws");
        panel.columns.push_back(coeffs.stock_id);
    }
    return panel;
}

}  // namespace ousynth::ref
