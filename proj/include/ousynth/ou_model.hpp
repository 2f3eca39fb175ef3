#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ousynth {

// N-dimensional mean-reverting recursion on normalized prices:
//
//   x_t = x_{t-1} + a_matrix * (mu - x_{t-1} + gamma * t) + noise_t
//
// with noise_t ~ N(0, sigma) drawn through the Cholesky factor of sigma.
// The trend clock t is the integer step index, 1 for the first increment.
struct OuParameters {
    Eigen::MatrixXd a_matrix;  // N x N reversion rates, per step
    Eigen::VectorXd mu;        // long-term means
    Eigen::VectorXd gamma;     // per-step trend slopes
    Eigen::MatrixXd sigma;     // N x N noise covariance, per step

    int dim() const { return static_cast<int>(mu.size()); }
};

/// Dimension consistency, sigma symmetry within 1e-10 and PSD up to the
/// jitter cap. Throws DomainError / DecompositionError.
void check_ou_parameters(const OuParameters& params);

struct OuFit {
    OuParameters params;
    Eigen::MatrixXd residuals;   // (T-1) x N regression residuals
    Eigen::VectorXd r_squared;   // per-dimension fit quality
    double condition_number = 0.0;  // of the recovered a_matrix
    bool pseudo_inverse_used = false;  // raised when condition number > 1e12
};

/// Joint OLS of dx_t on [x_{t-1}, t, 1] over t = 1..T-1, recovering
/// a_matrix = -B, mu from A*mu = c, gamma from A*gamma = d (least squares;
/// pseudo-inverse with a raised flag when A is near singular). sigma is the
/// residual covariance with denominator (T-1)-(N+2); zero when no residual
/// degrees of freedom remain. Requires T >= N+3.
OuFit estimate_ou(const Eigen::MatrixXd& panel);

/// Row 0 is x0; each later row advances the recursion with noise L*z_t,
/// z_t standard normal from Rng(seed), one deviate per dimension in
/// dimension order. Bit-identical for identical inputs.
Eigen::MatrixXd simulate_ou(const OuParameters& params, const Eigen::VectorXd& x0,
                            int steps, uint64_t seed);

/// Trace k equals simulate_ou with seed derive_seed(base_seed, k).
/// Traces are generated in parallel; content depends only on
/// (params, x0, steps, base_seed, k).
std::vector<Eigen::MatrixXd> multi_trace(const OuParameters& params, const Eigen::VectorXd& x0,
                                         int steps, int n_traces, uint64_t base_seed);

/// Lower Cholesky factor of sigma. Exact factor when sigma is PD; for
/// numerically indefinite input the diagonal is jittered starting at
/// 1e-12 * max(diag sigma), escalating x10 up to 1e-6 * max(diag sigma),
/// after which DecompositionError is thrown. An all-zero sigma yields L = 0.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& sigma);

}  // namespace ousynth
