#include "ousynth/stats_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ousynth/errors.hpp"

namespace ousynth {

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

double kolmogorov_q(double lambda) {
    // below 0.2 the CDF mass is < 1e-12; the alternating series needs the
    // guard there (it does not converge toward 1 at lambda -> 0)
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");

    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double en1 = static_cast<double>(sa.size());
    const double en2 = static_cast<double>(sb.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        // step both ECDFs past the smaller value (and through ties) before
        // measuring the gap
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / en1 - static_cast<double>(j) / en2));
    }

    KsResult out;
    out.statistic = d;
    out.n1 = static_cast<int>(sa.size());
    out.n2 = static_cast<int>(sb.size());
    const double ne = en1 * en2 / (en1 + en2);
    const double sq = std::sqrt(ne);
    out.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    return out;
}

KdeEstimate kde_1d(std::span<const double> samples, std::optional<std::vector<double>> grid,
                   std::optional<double> bandwidth) {
    const size_t n = samples.size();
    if (n < 2) throw DomainError("kde_1d: needs at least 2 samples");
    const double sd = sample_sd(samples);
    if (!(sd > 0.0)) throw DomainError("kde_1d: degenerate sample (zero variance)");

    KdeEstimate out;
    out.kind = KdeKind::univariate;
    out.bandwidth_x = bandwidth.value_or(sd * std::pow(static_cast<double>(n), -0.2));
    if (!(out.bandwidth_x > 0.0)) throw DomainError("kde_1d: bandwidth must be positive");

    if (grid) {
        out.grid_x = std::move(*grid);
        if (out.grid_x.size() < 2) throw DomainError("kde_1d: grid needs at least 2 points");
    } else {
        const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        out.grid_x = linspace(*lo - 5.0 * out.bandwidth_x, *hi + 5.0 * out.bandwidth_x, 512);
    }

    const int g = static_cast<int>(out.grid_x.size());
    out.density.resize(g, 1);
    const double h = out.bandwidth_x;
    const double norm = kInvSqrt2Pi / (static_cast<double>(n) * h);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < g; ++i) {
        const double gx = out.grid_x[static_cast<size_t>(i)];
        double acc = 0.0;
        for (double x : samples) {
            const double u = (gx - x) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out.density(i, 0) = acc * norm;
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
    {
        const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
        const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
        double cov = 0.0;
        for (size_t i = 0; i < n; ++i) cov += (x[i] - mx) * (y[i] - my);
        cov /= static_cast<double>(n - 1);
        const double rho = cov / (sdx * sdy);
        if (rho * rho >= 1.0 - 1e-12)
            throw DomainError("kde_2d: degenerate covariance (|corr| = 1)");
    }

    KdeEstimate out;
    out.kind = KdeKind::bivariate;
    const double scott = std::pow(static_cast<double>(n), -1.0 / 6.0);
    out.bandwidth_x = bandwidth_x.value_or(sdx * scott);
    out.bandwidth_y = bandwidth_y.value_or(sdy * scott);
    if (!(out.bandwidth_x > 0.0) || !(out.bandwidth_y > 0.0))
        throw DomainError("kde_2d: bandwidths must be positive");

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
    if (out.grid_x.size() < 2 || out.grid_y.size() < 2)
        throw DomainError("kde_2d: grids need at least 2 points");

    const int gx = static_cast<int>(out.grid_x.size());
    const int gy = static_cast<int>(out.grid_y.size());
    out.density.resize(gx, gy);
    const double hx = out.bandwidth_x, hy = out.bandwidth_y;
    const double norm = kInvSqrt2Pi * kInvSqrt2Pi / (static_cast<double>(n) * hx * hy);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < gx; ++i) {
        const double px = out.grid_x[static_cast<size_t>(i)];
        for (int j = 0; j < gy; ++j) {
            const double py = out.grid_y[static_cast<size_t>(j)];
            double acc = 0.0;
            for (size_t s = 0; s < n; ++s) {
                const double ux = (px - x[s]) / hx;
                const double uy = (py - y[s]) / hy;
                acc += std::exp(-0.5 * (ux * ux + uy * uy));
            }
            out.density(i, j) = acc * norm;
        }
    }
    return out;
}

Moments sample_moments(std::span<const double> values) {
    Moments m;
    const size_t n = values.size();
    if (n == 0) throw DomainError("sample_moments: empty sample");
    m.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n < 2) return m;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : values) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m.stddev = std::sqrt(m2 / static_cast<double>(n - 1));
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

namespace {

std::vector<double> shared_grid(std::span<const double> a, std::span<const double> b,
                                double margin, int count) {
    const auto [alo, ahi] = std::minmax_element(a.begin(), a.end());
    const auto [blo, bhi] = std::minmax_element(b.begin(), b.end());
    return linspace(std::min(*alo, *blo) - margin, std::max(*ahi, *bhi) + margin, count);
}

double scott_1d(std::span<const double> v) {
    return sample_sd(v) * std::pow(static_cast<double>(v.size()), -0.2);
}

double scott_2d(std::span<const double> v) {
    return sample_sd(v) * std::pow(static_cast<double>(v.size()), -1.0 / 6.0);
}

}  // namespace

EvalReport evaluate_scenario(const PricePanel& real, const PricePanel& synthetic,
                             double significance, const std::string& market_id) {
    // same column sets, matched by id (order may differ)
    std::string missing, extra;
    for (const auto& id : real.columns)
        if (synthetic.column_index(id) < 0) missing += (missing.empty() ? "" : ", ") + id;
    for (const auto& id : synthetic.columns)
        if (real.column_index(id) < 0) extra += (extra.empty() ? "" : ", ") + id;
    if (!missing.empty() || !extra.empty())
        throw AlignmentError("evaluate_scenario: column sets differ; missing in synthetic: [" +
                             missing + "]; extra in synthetic: [" + extra + "]");

    const std::string market = market_id.empty() ? real.columns.front() : market_id;
    if (real.column_index(market) < 0)
        throw DomainError("evaluate_scenario: market column '" + market + "' not present");

    EvalReport report;
    report.significance = significance;

    std::vector<std::vector<double>> real_ret(real.columns.size()), synth_ret(real.columns.size());
    for (size_t j = 0; j < real.columns.size(); ++j) {
        real_ret[j] = column_returns(real, static_cast<int>(j));
        synth_ret[j] = column_returns(synthetic, synthetic.column_index(real.columns[j]));
    }

    for (size_t j = 0; j < real.columns.size(); ++j) {
        SeriesEval ev;
        ev.id = real.columns[j];
        ev.ks = ks_two_sample(real_ret[j], synth_ret[j]);
        ev.real_moments = sample_moments(real_ret[j]);
        ev.synth_moments = sample_moments(synth_ret[j]);

        const double h_real = scott_1d(real_ret[j]);
        const double h_synth = scott_1d(synth_ret[j]);
        auto grid = shared_grid(real_ret[j], synth_ret[j], 5.0 * std::max(h_real, h_synth), 512);
        ev.real_kde = kde_1d(real_ret[j], grid, h_real);
        ev.synth_kde = kde_1d(synth_ret[j], std::move(grid), h_synth);

        if (ev.ks.p_value > significance) ++report.pass_count;
        report.series.push_back(std::move(ev));
    }

    const size_t mj = static_cast<size_t>(real.column_index(market));
    for (size_t j = 0; j < real.columns.size(); ++j) {
        if (j == mj) continue;
        PairEval pair;
        pair.market_id = market;
        pair.sector_id = real.columns[j];

        const double hx = std::max(scott_2d(real_ret[mj]), scott_2d(synth_ret[mj]));
        const double hy = std::max(scott_2d(real_ret[j]), scott_2d(synth_ret[j]));
        auto grid_x = shared_grid(real_ret[mj], synth_ret[mj], 5.0 * hx, 64);
        auto grid_y = shared_grid(real_ret[j], synth_ret[j], 5.0 * hy, 64);
        pair.real_kde = kde_2d(real_ret[mj], real_ret[j], grid_x, grid_y);
        pair.synth_kde = kde_2d(synth_ret[mj], synth_ret[j], std::move(grid_x), std::move(grid_y));
        report.pairs.push_back(std::move(pair));
    }
    return report;
}

}  // namespace ousynth
