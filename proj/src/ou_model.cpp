#include "ousynth/ou_model.hpp"

#include <cmath>
#include <limits>

#include "ousynth/errors.hpp"
#include "ousynth/rng.hpp"

namespace ousynth {

namespace {

constexpr double kSingularCondition = 1e12;

void check_symmetric(const Eigen::MatrixXd& sigma) {
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10)
        throw DomainError("sigma not symmetric (max asymmetry " + std::to_string(asym) + ")");
}

}  // namespace

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& sigma) {
    const Eigen::Index n = sigma.rows();
    if (sigma.cols() != n) throw DomainError("sigma must be square");
    if (n == 0 || sigma.cwiseAbs().maxCoeff() == 0.0) return Eigen::MatrixXd::Zero(n, n);

    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    const double scale = sigma.diagonal().maxCoeff();
    if (scale > 0.0) {
        for (double jitter = 1e-12 * scale; jitter <= 1e-6 * scale; jitter *= 10.0) {
            Eigen::MatrixXd padded = sigma;
            padded.diagonal().array() += jitter;
            llt.compute(padded);
            if (llt.info() == Eigen::Success) return llt.matrixL();
        }
    }
    throw DecompositionError("sigma is not positive semidefinite within the jitter cap");
}

void check_ou_parameters(const OuParameters& params) {
    const int n = params.dim();
    if (n < 1) throw DomainError("OU parameters: dimension must be >= 1");
    if (params.a_matrix.rows() != n || params.a_matrix.cols() != n)
        throw DomainError("OU parameters: a_matrix must be " + std::to_string(n) + "x" +
                          std::to_string(n));
    if (params.gamma.size() != n) throw DomainError("OU parameters: gamma length mismatch");
    if (params.sigma.rows() != n || params.sigma.cols() != n)
        throw DomainError("OU parameters: sigma dimension mismatch");
    check_symmetric(params.sigma);
    cholesky_with_jitter(params.sigma);  // PSD within the jitter cap
}

OuFit estimate_ou(const Eigen::MatrixXd& panel) {
    const int T = static_cast<int>(panel.rows());
    const int N = static_cast<int>(panel.cols());
    if (N < 1) throw DomainError("estimate_ou: empty panel");
    if (T < N + 3)
        throw InsufficientDataError("estimate_ou: T=" + std::to_string(T) + " rows for N=" +
                                    std::to_string(N) + " series; requires T >= N+3 = " +
                                    std::to_string(N + 3));

    const int rows = T - 1;
    const int p = N + 2;  // lags + trend + intercept

    Eigen::MatrixXd x(rows, p);
    Eigen::MatrixXd y(rows, N);
    for (int t = 0; t < rows; ++t) {
        x.block(t, 0, 1, N) = panel.row(t);
        x(t, N) = static_cast<double>(t + 1);  // trend clock starts at 1
        x(t, N + 1) = 1.0;
        y.row(t) = panel.row(t + 1) - panel.row(t);
    }

    const Eigen::MatrixXd coeff = x.colPivHouseholderQr().solve(y);  // p x N
    const Eigen::MatrixXd resid = y - x * coeff;

    OuFit fit;
    fit.params.a_matrix = -coeff.topRows(N).transpose();
    const Eigen::VectorXd d = coeff.row(N).transpose();
    const Eigen::VectorXd c = coeff.row(N + 1).transpose();

    // saturated fits have zero residual dof; the residuals are then exact
    // zeros and sigma degenerates to the zero matrix
    const int dof = rows - p;
    Eigen::MatrixXd sigma = dof >= 1 ? Eigen::MatrixXd((resid.transpose() * resid) / dof)
                                     : Eigen::MatrixXd::Zero(N, N);
    fit.params.sigma = 0.5 * (sigma + sigma.transpose());

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(fit.params.a_matrix,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(N - 1);
    fit.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    fit.pseudo_inverse_used =
        !(fit.condition_number < kSingularCondition);  // never silent on near-singular A
    fit.params.mu = svd.solve(c);
    fit.params.gamma = svd.solve(d);

    fit.residuals = resid;
    fit.r_squared.resize(N);
    for (int j = 0; j < N; ++j) {
        const double mean = y.col(j).mean();
        const double sst = (y.col(j).array() - mean).square().sum();
        const double ssr = resid.col(j).squaredNorm();
        fit.r_squared(j) = sst > 0.0 ? 1.0 - ssr / sst : (ssr <= 1e-24 ? 1.0 : 0.0);
    }
    return fit;
}

Eigen::MatrixXd simulate_ou(const OuParameters& params, const Eigen::VectorXd& x0, int steps,
                            uint64_t seed) {
    const int n = params.dim();
    if (x0.size() != n)
        throw DomainError("simulate_ou: x0 has length " + std::to_string(x0.size()) +
                          ", expected " + std::to_string(n));
    if (steps < 1) throw DomainError("simulate_ou: steps must be >= 1");
    check_ou_parameters(params);

    const Eigen::MatrixXd chol = cholesky_with_jitter(params.sigma);

    Eigen::MatrixXd out(steps + 1, n);
    out.row(0) = x0.transpose();
    Rng rng(seed);
    Eigen::VectorXd x = x0;
    Eigen::VectorXd z(n);
    for (int t = 1; t <= steps; ++t) {
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        x += params.a_matrix * (params.mu - x + params.gamma * static_cast<double>(t)) + chol * z;
        out.row(t) = x.transpose();
    }
    return out;
}

std::vector<Eigen::MatrixXd> multi_trace(const OuParameters& params, const Eigen::VectorXd& x0,
                                         int steps, int n_traces, uint64_t base_seed) {
    if (n_traces < 1) throw DomainError("multi_trace: n_traces must be >= 1");
    check_ou_parameters(params);

    std::vector<Eigen::MatrixXd> traces(static_cast<size_t>(n_traces));
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_traces; ++k) {
        try {
            traces[static_cast<size_t>(k)] =
                simulate_ou(params, x0, steps, derive_seed(base_seed, static_cast<uint64_t>(k)));
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return traces;
}

}  // namespace ousynth
