#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ousynth/timeseries.hpp"

namespace ousynth {

struct KsResult {
    double statistic = 0.0;  // sup |ECDF_a - ECDF_b|, in [0,1]
    double p_value = 1.0;
    int n1 = 0;
    int n2 = 0;
};

/// Exact two-sample KS statistic by sort-merge (ties handled by advancing
/// both ECDFs through equal values), p-value from the asymptotic Kolmogorov
/// series Q(lambda) = 2 * sum_{k=1..100} (-1)^{k-1} exp(-2 k^2 lambda^2)
/// with lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = n1*n2/(n1+n2).
/// Below lambda = 0.2 the distribution carries < 1e-12 mass, so p = 1 there.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Complementary asymptotic Kolmogorov CDF (exposed for tests).
double kolmogorov_q(double lambda);

enum class KdeKind { univariate, bivariate };

struct KdeEstimate {
    KdeKind kind = KdeKind::univariate;
    std::vector<double> grid_x;
    std::vector<double> grid_y;      // empty for univariate
    Eigen::MatrixXd density;         // |grid_x| x 1, or |grid_x| x |grid_y|
    double bandwidth_x = 0.0;
    double bandwidth_y = 0.0;        // 0 for univariate
};

/// Gaussian-kernel density. Default bandwidth is Scott's rule
/// h = sd * n^(-1/5); default grid is 512 points over
/// [min - 5h, max + 5h]. Needs >= 2 samples with nonzero variance.
KdeEstimate kde_1d(std::span<const double> samples,
                   std::optional<std::vector<double>> grid = std::nullopt,
                   std::optional<double> bandwidth = std::nullopt);

/// Product-Gaussian kernel on paired samples with per-axis Scott bandwidths
/// h = sd * n^(-1/6); default grids are 64 points per axis over
/// [min - 5h, max + 5h]. Needs n >= 3 and a nondegenerate sample covariance.
KdeEstimate kde_2d(std::span<const double> x, std::span<const double> y,
                   std::optional<std::vector<double>> grid_x = std::nullopt,
                   std::optional<std::vector<double>> grid_y = std::nullopt,
                   std::optional<double> bandwidth_x = std::nullopt,
                   std::optional<double> bandwidth_y = std::nullopt);

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;            // n-1 denominator
    double skewness = 0.0;          // m3 / m2^(3/2)
    double excess_kurtosis = 0.0;   // m4 / m2^2 - 3
};

Moments sample_moments(std::span<const double> values);

struct SeriesEval {
    std::string id;
    KsResult ks;
    Moments real_moments;
    Moments synth_moments;
    KdeEstimate real_kde;    // real and synthetic densities share one grid
    KdeEstimate synth_kde;
};

struct PairEval {
    std::string market_id;
    std::string sector_id;
    KdeEstimate real_kde;    // bivariate, shared grids
    KdeEstimate synth_kde;
};

struct EvalReport {
    double significance = 0.05;
    int pass_count = 0;      // series with p > significance
    std::vector<SeriesEval> series;
    std::vector<PairEval> pairs;  // market vs each sector
};

/// Per-column KS tests on returns, moment tables, shared-grid return KDEs,
/// and market-vs-sector joint KDEs for both datasets. Panels must carry the
/// same column ids (lengths may differ); the market defaults to the first
/// column of the real panel.
EvalReport evaluate_scenario(const PricePanel& real, const PricePanel& synthetic,
                             double significance = 0.05, const std::string& market_id = "");

}  // namespace ousynth
