// Timing comparison of the OpenMP kernels against their serial references.
// Each kernel is verified to produce identical output before timing.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ousynth/apt_model.hpp"
#include "ousynth/market_pipeline.hpp"
#include "ousynth/ou_model.hpp"
#include "ousynth/reference.hpp"
#include "ousynth/rng.hpp"
#include "ousynth/stats_eval.hpp"

using namespace ousynth;

namespace {

double now_sec() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_sec();
        fn();
        best = std::min(best, now_sec() - t0);
    }
    return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
    std::printf("%-24s serial %8.1f ms   parallel %8.1f ms   speedup %5.2fx   %s\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel,
                identical ? "outputs identical" : "OUTPUTS DIFFER");
}

OuParameters bench_params(int n) {
    OuParameters p;
    p.a_matrix = Eigen::MatrixXd::Identity(n, n) * 0.05;
    p.mu = Eigen::VectorXd::Ones(n);
    p.gamma = Eigen::VectorXd::Zero(n);
    p.sigma = Eigen::MatrixXd::Identity(n, n) * 1e-4;
    for (int i = 0; i + 1 < n; ++i) p.sigma(i, i + 1) = p.sigma(i + 1, i) = 2e-5;
    return p;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel kernels run serially\n\n");
#endif

    // kde_1d: 20k samples on the default 512-point grid
    {
        Rng rng(11);
        std::vector<double> samples(20000);
        for (auto& x : samples) x = rng.normal();
        KdeEstimate a, b;
        const double ts = time_best_of(3, [&] { a = ref::kde_1d(samples); });
        const double tp = time_best_of(3, [&] { b = kde_1d(samples); });
        report("kde_1d 20k x 512", ts, tp, a.density == b.density && a.grid_x == b.grid_x);
    }

    // kde_2d: 5k pairs on the default 64x64 grid
    {
        Rng rng(12);
        std::vector<double> x(5000), y(5000);
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.normal();
            y[i] = 0.6 * x[i] + 0.8 * rng.normal();
        }
        KdeEstimate a, b;
        const double ts = time_best_of(3, [&] { a = ref::kde_2d(x, y); });
        const double tp = time_best_of(3, [&] { b = kde_2d(x, y); });
        report("kde_2d 5k x 64^2", ts, tp, a.density == b.density);
    }

    // multi_trace: 64 traces of a 12-dim system, 2000 steps
    {
        const OuParameters p = bench_params(12);
        const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(12);
        std::vector<Eigen::MatrixXd> a, b;
        const double ts = time_best_of(3, [&] { a = ref::multi_trace(p, x0, 2000, 64, 7); });
        const double tp = time_best_of(3, [&] { b = multi_trace(p, x0, 2000, 64, 7); });
        bool same = a.size() == b.size();
        for (size_t k = 0; same && k < a.size(); ++k) same = a[k] == b[k];
        report("multi_trace 64x2000x12", ts, tp, same);
    }

    // stock universe: 200 stocks over 2000 factor rows
    {
        const OuParameters p = bench_params(12);
        const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(12);
        MarketModel model;
        model.ou = p;
        model.market_column = 0;
        model.column_ids.resize(12);
        for (int j = 0; j < 12; ++j) model.column_ids[static_cast<size_t>(j)] = "C" + std::to_string(j);
        model.anchor = 1.0;
        model.x0 = x0;
        const PricePanel scenario = generate_etf_scenario(model, 2000, 3);
        const FactorPanel factors = build_factor_panel(scenario, 0);

        Rng rng(13);
        std::vector<AptCoefficients> coeffs(200);
        for (size_t i = 0; i < coeffs.size(); ++i) {
            coeffs[i].stock_id = "S" + std::to_string(i);
            coeffs[i].alpha = 1e-4 * rng.normal();
            coeffs[i].betas = Eigen::VectorXd::Zero(12);
            coeffs[i].betas(0) = 1.0 + 0.2 * rng.normal();
            coeffs[i].betas(1 + static_cast<Eigen::Index>(i % 11)) = 1.0;
            coeffs[i].resid_sigma = 0.01;
        }
        PricePanel a, b;
        const double ts = time_best_of(3, [&] {
            a = ref::generate_stock_universe(coeffs, factors, NoiseMode::gaussian, 99);
        });
        const double tp = time_best_of(3, [&] {
            b = generate_stock_universe(coeffs, factors, NoiseMode::gaussian, 99);
        });
        report("universe 200x2000", ts, tp, a.values == b.values && a.columns == b.columns);
    }

    return 0;
}
