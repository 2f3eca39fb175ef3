#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ousynth/apt_model.hpp"
#include "ousynth/errors.hpp"
#include "ousynth/rng.hpp"

using namespace ousynth;

namespace {

// factor rows ~ N(0, diag(scales^2)), written longhand in test code
FactorPanel random_factors(int rows, const std::vector<double>& scales, uint64_t seed) {
    FactorPanel f;
    f.values.resize(rows, static_cast<Eigen::Index>(scales.size()));
    Rng rng(seed);
    for (int t = 0; t < rows; ++t) {
        f.dates.push_back(t + 1);
        for (size_t j = 0; j < scales.size(); ++j)
            f.values(t, static_cast<Eigen::Index>(j)) = scales[j] * rng.normal();
    }
    f.ids.push_back("MKT");
    for (size_t j = 1; j < scales.size(); ++j) f.ids.push_back("F" + std::to_string(j));
    return f;
}

ReturnSeries stock_from(const FactorPanel& f, double alpha, const Eigen::VectorXd& betas,
                        double noise_sigma, uint64_t seed) {
    ReturnSeries r;
    r.id = "STK";
    r.dates = f.dates;
    Rng rng(seed);
    for (int t = 0; t < f.rows(); ++t) {
        double v = alpha;
        for (int j = 0; j < f.factors(); ++j) v += betas(j) * f.values(t, j);
        if (noise_sigma > 0.0) v += noise_sigma * rng.normal();
        r.values.push_back(v);
    }
    return r;
}

}  // namespace

TEST_CASE("build_factor_panel") {
    SUBCASE("constant prices give all-zero factors") {
        PricePanel panel;
        panel.axis = Axis::step;
        panel.columns = {"SPY", "XLK", "XLF"};
        panel.dates = {0, 1, 2, 3};
        panel.values = Eigen::MatrixXd::Constant(4, 3, 1.0);
        const auto f = build_factor_panel(panel, 0);
        CHECK(f.rows() == 3);
        CHECK(f.factors() == 3);
        CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("hand-built 3-step panel") {
        PricePanel panel;
        panel.axis = Axis::step;
        panel.columns = {"SPY", "A", "B"};
        panel.dates = {0, 1, 2, 3};
        panel.values.resize(4, 3);
        panel.values << 1.00, 1.00, 1.00,
                        1.10, 1.21, 0.99,
                        1.21, 1.21, 1.0395,
                        1.089, 1.331, 0.93555;
        const auto f = build_factor_panel(panel, 0);
        // market returns 0.10, 0.10, -0.10
        CHECK(f.values(0, 0) == doctest::Approx(0.10).epsilon(1e-12));
        CHECK(f.values(1, 0) == doctest::Approx(0.10).epsilon(1e-12));
        CHECK(f.values(2, 0) == doctest::Approx(-0.10).epsilon(1e-12));
        // A returns 0.21, 0, 0.0909...; relative vs market
        CHECK(f.values(0, 1) == doctest::Approx(0.21 - 0.10).epsilon(1e-10));
        CHECK(f.values(1, 1) == doctest::Approx(0.0 - 0.10).epsilon(1e-10));
        // B returns -0.01, 0.05, -0.10
        CHECK(f.values(0, 2) == doctest::Approx(-0.01 - 0.10).epsilon(1e-10));
        CHECK(f.values(1, 2) == doctest::Approx(0.05 - 0.10).epsilon(1e-10));
        CHECK(f.values(2, 2) == doctest::Approx(-0.10 + 0.10).epsilon(1e-10));
        CHECK(f.ids == std::vector<std::string>{"SPY", "A", "B"});
        CHECK(f.dates == std::vector<int64_t>{1, 2, 3});
    }
    SUBCASE("twelve ETF columns give K = 12") {
        PricePanel panel;
        panel.axis = Axis::step;
        Rng rng(1);
        panel.values.resize(30, 12);
        for (int j = 0; j < 12; ++j) {
            panel.columns.push_back("E" + std::to_string(j));
            panel.values(0, j) = 1.0;
            for (int t = 1; t < 30; ++t)
                panel.values(t, j) = panel.values(t - 1, j) * (1.0 + 0.01 * rng.normal());
        }
        for (int t = 0; t < 30; ++t) panel.dates.push_back(t);
        const auto f = build_factor_panel(panel, 0);
        CHECK(f.factors() == 12);
        CHECK(f.rows() == 29);
    }
}

TEST_CASE("fit_apt") {
    SUBCASE("stock identical to the market factor") {
        const auto f = random_factors(300, {0.01, 0.004, 0.004}, 7);
        ReturnSeries stock;
        stock.id = "S";
        stock.dates = f.dates;
        for (int t = 0; t < f.rows(); ++t) stock.values.push_back(f.values(t, 0));
        const auto c = fit_apt(stock, f);
        CHECK(std::abs(c.alpha) < 1e-10);
        CHECK(std::abs(c.betas(0) - 1.0) < 1e-10);
        CHECK(std::abs(c.betas(1)) < 1e-10);
        CHECK(std::abs(c.betas(2)) < 1e-10);
        CHECK(c.resid_sigma < 1e-10);
        CHECK(c.r_squared == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("noiseless linear-model oracle recovers exactly") {
        const auto f = random_factors(200, {0.012, 0.005, 0.006, 0.004}, 11);
        Eigen::VectorXd betas(4);
        betas << 1.2, -0.4, 0.9, 0.1;
        const auto stock = stock_from(f, 0.001, betas, 0.0, 0);
        const auto c = fit_apt(stock, f);
        CHECK(std::abs(c.alpha - 0.001) < 1e-10);
        for (int j = 0; j < 4; ++j) CHECK(std::abs(c.betas(j) - betas(j)) < 1e-10);
        CHECK(c.residuals.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(c.residuals.mean()) < 1e-10);
    }
    SUBCASE("noisy recovery within 3 standard errors") {
        const int rows = 5000;
        const auto f = random_factors(rows, {0.012, 0.005, 0.006}, 23);
        Eigen::VectorXd betas(3);
        betas << 1.1, 0.5, -0.7;
        const double sigma = 0.01;
        const auto stock = stock_from(f, 0.0005, betas, sigma, 24);
        const auto c = fit_apt(stock, f);

        // standard errors from (X^T X)^-1, test-side route
        Eigen::MatrixXd x(rows, 4);
        x.col(0).setOnes();
        x.rightCols(3) = f.values;
        const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
        CHECK(std::abs(c.alpha - 0.0005) <= 3.0 * sigma * std::sqrt(xtx_inv(0, 0)));
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(c.betas(j) - betas(j)) <= 3.0 * sigma * std::sqrt(xtx_inv(j + 1, j + 1)));
        CHECK(c.resid_sigma == doctest::Approx(sigma).epsilon(0.05));
        CHECK(std::abs(c.residuals.mean()) < 1e-10);  // intercept centers the fit
    }
    SUBCASE("collinear factors are named") {
        FactorPanel f = random_factors(100, {0.01, 0.005, 0.005}, 3);
        f.values.col(2) = f.values.col(1);  // exact duplicate
        ReturnSeries stock;
        stock.id = "S";
        stock.dates = f.dates;
        for (int t = 0; t < f.rows(); ++t) stock.values.push_back(f.values(t, 0));
        CHECK_THROWS_WITH_AS(fit_apt(stock, f), doctest::Contains("F"), RankDeficientError);
    }
    SUBCASE("too few rows") {
        const auto f = random_factors(4, {0.01, 0.005, 0.005}, 3);
        ReturnSeries stock;
        stock.id = "S";
        stock.dates = f.dates;
        stock.values = {0.0, 0.0, 0.0, 0.0};
        CHECK_THROWS_AS(fit_apt(stock, f), InsufficientDataError);
    }
}

TEST_CASE("generate_stock_returns") {
    const auto f = random_factors(500, {0.012, 0.005, 0.006}, 40);

    SUBCASE("pass-through of the market factor") {
        AptCoefficients c;
        c.stock_id = "S";
        c.alpha = 0.0;
        c.betas = Eigen::VectorXd::Zero(3);
        c.betas(0) = 1.0;
        const auto r = generate_stock_returns(c, f, NoiseMode::none, 1);
        for (int t = 0; t < f.rows(); ++t) CHECK(r.values[static_cast<size_t>(t)] == f.values(t, 0));
    }
    SUBCASE("affine-map oracle") {
        AptCoefficients c;
        c.stock_id = "S";
        c.alpha = 0.0007;
        c.betas.resize(3);
        c.betas << 0.8, -0.3, 0.5;
        const auto r = generate_stock_returns(c, f, NoiseMode::none, 1);
        const Eigen::VectorXd expected =
            Eigen::VectorXd::Constant(f.rows(), c.alpha) + f.values * c.betas;
        for (int t = 0; t < f.rows(); ++t)
            CHECK(r.values[static_cast<size_t>(t)] == doctest::Approx(expected(t)).epsilon(1e-14));
    }
    SUBCASE("gaussian noise matches resid_sigma (moment oracle)") {
        FactorPanel zero;
        zero.values = Eigen::MatrixXd::Zero(100000, 2);
        zero.ids = {"MKT", "F1"};
        for (int t = 0; t < 100000; ++t) zero.dates.push_back(t + 1);
        AptCoefficients c;
        c.stock_id = "S";
        c.alpha = 0.0;
        c.betas = Eigen::VectorXd::Zero(2);
        c.resid_sigma = 0.013;
        const auto r = generate_stock_returns(c, zero, NoiseMode::gaussian, 99);
        double ss = 0.0, mean = 0.0;
        for (double v : r.values) mean += v;
        mean /= static_cast<double>(r.values.size());
        for (double v : r.values) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / (static_cast<double>(r.values.size()) - 1.0));
        CHECK(std::abs(sd - c.resid_sigma) <= 0.02 * c.resid_sigma);
    }
    SUBCASE("bootstrap draws come from the stored residuals") {
        AptCoefficients c;
        c.stock_id = "S";
        c.alpha = 0.0;
        c.betas = Eigen::VectorXd::Zero(3);
        c.residuals.resize(4);
        c.residuals << -0.02, -0.01, 0.01, 0.02;
        const auto r = generate_stock_returns(c, f, NoiseMode::bootstrap, 5);
        for (double v : r.values) {
            bool member = false;
            for (int i = 0; i < 4; ++i) member = member || v == c.residuals(i);
            CHECK(member);
        }
    }
    SUBCASE("bootstrap without residuals is an error") {
        AptCoefficients c;
        c.stock_id = "S";
        c.betas = Eigen::VectorXd::Zero(3);
        CHECK_THROWS_AS(generate_stock_returns(c, f, NoiseMode::bootstrap, 5), DomainError);
    }
    SUBCASE("beta length mismatch") {
        AptCoefficients c;
        c.stock_id = "S";
        c.betas = Eigen::VectorXd::Zero(2);
        CHECK_THROWS_AS(generate_stock_returns(c, f, NoiseMode::none, 5), DomainError);
    }
}

TEST_CASE("fit-generate fixed point at zero noise") {
    const auto f = random_factors(400, {0.012, 0.005, 0.006, 0.003}, 88);
    Rng rng(1234);
    for (int trial = 0; trial < 10; ++trial) {
        AptCoefficients truth;
        truth.stock_id = "S";
        truth.alpha = 0.001 * rng.normal();
        truth.betas.resize(4);
        for (int j = 0; j < 4; ++j) truth.betas(j) = rng.normal();
        const auto r = generate_stock_returns(truth, f, NoiseMode::none, 0);
        const auto fit = fit_apt(r, f);
        CHECK(std::abs(fit.alpha - truth.alpha) < 1e-10);
        for (int j = 0; j < 4; ++j) CHECK(std::abs(fit.betas(j) - truth.betas(j)) < 1e-10);
    }
}

TEST_CASE("factor correlation approaches the analytic value") {
    // diagonal factor covariance: corr(r, f_j) = beta_j s_j / sqrt(b' S b + sigma^2)
    const std::vector<double> scales{0.012, 0.005, 0.006};
    const auto f = random_factors(50000, scales, 321);
    AptCoefficients c;
    c.stock_id = "S";
    c.alpha = 0.0002;
    c.betas.resize(3);
    c.betas << 1.0, 0.6, -0.4;
    c.resid_sigma = 0.008;
    const auto r = generate_stock_returns(c, f, NoiseMode::gaussian, 55);

    double var_sys = c.resid_sigma * c.resid_sigma;
    for (int j = 0; j < 3; ++j) var_sys += c.betas(j) * c.betas(j) * scales[j] * scales[j];

    Eigen::Map<const Eigen::VectorXd> rv(r.values.data(), f.rows());
    const double r_mean = rv.mean();
    for (int j = 0; j < 3; ++j) {
        const Eigen::VectorXd fj = f.values.col(j);
        const double f_mean = fj.mean();
        double cov = 0.0, vf = 0.0, vr = 0.0;
        for (int t = 0; t < f.rows(); ++t) {
            cov += (rv(t) - r_mean) * (fj(t) - f_mean);
            vf += (fj(t) - f_mean) * (fj(t) - f_mean);
            vr += (rv(t) - r_mean) * (rv(t) - r_mean);
        }
        const double sample_corr = cov / std::sqrt(vf * vr);
        const double analytic = c.betas(j) * scales[j] / std::sqrt(var_sys);
        CHECK(std::abs(sample_corr - analytic) < 0.05);
    }
}

TEST_CASE("generate_stock_universe") {
    const auto f = random_factors(250, {0.012, 0.005, 0.006}, 17);

    SUBCASE("flat stock stays at 1") {
        FactorPanel zero;
        zero.values = Eigen::MatrixXd::Zero(10, 2);
        zero.ids = {"MKT", "F1"};
        for (int t = 0; t < 10; ++t) zero.dates.push_back(t + 1);
        AptCoefficients c;
        c.stock_id = "S";
        c.alpha = 0.0;
        c.betas = Eigen::VectorXd::Zero(2);
        const auto panel = generate_stock_universe({c}, zero, NoiseMode::none, 3);
        CHECK(panel.rows() == 11);
        CHECK(panel.cols() == 1);
        for (int t = 0; t <= 10; ++t) CHECK(panel.values(t, 0) == 1.0);
    }
    SUBCASE("deterministic under a fixed base seed") {
        std::vector<AptCoefficients> set(3);
        for (size_t i = 0; i < set.size(); ++i) {
            set[i].stock_id = "S" + std::to_string(i);
            set[i].alpha = 1e-4;
            set[i].betas = Eigen::VectorXd::Zero(3);
            set[i].betas(0) = 1.0;
            set[i].resid_sigma = 0.01;
        }
        const auto a = generate_stock_universe(set, f, NoiseMode::gaussian, 42);
        const auto b = generate_stock_universe(set, f, NoiseMode::gaussian, 42);
        CHECK(a.values == b.values);
        CHECK(a.columns == b.columns);
        CHECK(a.rows() == 251);
    }
    SUBCASE("equal coefficients and no noise give identical paths") {
        std::vector<AptCoefficients> set(2);
        for (size_t i = 0; i < set.size(); ++i) {
            set[i].stock_id = "S" + std::to_string(i);
            set[i].alpha = 2e-4;
            set[i].betas.resize(3);
            set[i].betas << 0.9, 0.5, 0.0;
        }
        const auto panel = generate_stock_universe(set, f, NoiseMode::none, 9);
        CHECK(panel.values.col(0) == panel.values.col(1));
    }
    SUBCASE("hopeless returns exhaust the retry cap") {
        AptCoefficients doomed;
        doomed.stock_id = "DOOM";
        doomed.alpha = -2.0;  // every return <= -1 regardless of redraws
        doomed.betas = Eigen::VectorXd::Zero(3);
        doomed.resid_sigma = 1e-6;
        CHECK_THROWS_AS(generate_stock_universe({doomed}, f, NoiseMode::gaussian, 1),
                        GenerationError);
    }
}

TEST_CASE("larger factor projection wins in expectation") {
    // 200-seed average of terminal log prices orders with alpha + beta . E[f]
    const auto f = random_factors(250, {0.012, 0.005, 0.006}, 61);
    AptCoefficients hi, lo;
    hi.stock_id = "HI";
    hi.alpha = 0.0012;
    hi.betas.resize(3);
    hi.betas << 1.0, 0.3, 0.0;
    hi.resid_sigma = 0.01;
    lo = hi;
    lo.stock_id = "LO";
    lo.alpha = 0.0002;

    double sum_hi = 0.0, sum_lo = 0.0;
    for (uint64_t s = 0; s < 200; ++s) {
        const auto universe =
            generate_stock_universe({hi, lo}, f, NoiseMode::gaussian, derive_seed(900, s));
        sum_hi += std::log(universe.values(universe.rows() - 1, 0));
        sum_lo += std::log(universe.values(universe.rows() - 1, 1));
    }
    CHECK(sum_hi / 200.0 > sum_lo / 200.0);
}
