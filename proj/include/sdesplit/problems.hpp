#pragma once

#include <stdexcept>
#include <vector>

#include "sdesplit/linalg.hpp"

namespace sdesplit {

/// dy = A y dt + sum_j P_j y dW_j on [0, t_end].
struct LinearSdeProblem {
    Matrix a;
    std::vector<Matrix> noise_ops;
    Vector y0;
    double t_end = 1.0;

    Eigen::Index dim() const { return a.rows(); }
    int noise_dims() const { return static_cast<int>(noise_ops.size()); }
    void validate() const;
};

/// 10x10 linear system with scalar multiplicative noise:
/// A has -1 on the diagonal and 0.1 strictly below, P has 0.01 on the
/// diagonal and 0.005 strictly below, y0 = ones.
LinearSdeProblem build_scalar_noise_problem(double t_end = 1.0);

/// 2x2 system with two noise operators:
/// A = alpha1 * diag(-1/2, -1/2), P1 = alpha2 * [[3/4, 1/10], [0, -3/4]],
/// P2 = alpha2 * [[0, 9/10], [9/10, 0]], y0 = ones, t_end = 1.
LinearSdeProblem build_vectorial_2x2(double alpha1, double alpha2);

/// m x m system with two noise operators: A has -1 diagonal and 1/m strictly
/// below; P1 = 0.05 * (unit lower triangular with 1/m below); P2 is the
/// upper-triangular transpose pattern at the same scale.
LinearSdeProblem build_vectorial_mxm(int m);

/// Test-particle state in spherical velocity coordinates
/// (speed v, pitch cosine mu, gyro-phase phi).
struct CoulombState {
    double v = 1.0;
    double mu = 0.0;
    double phi = 1.0;

    Eigen::Vector3d to_vector() const { return {v, mu, phi}; }
    static CoulombState from_vector(const Eigen::Vector3d& x) { return {x[0], x[1], x[2]}; }
};

/// The Langevin test-particle problem. The coefficient functions are fixed;
/// the only knob is the clamp margin keeping |mu| away from the phi-equation
/// singularity at |mu| = 1.
struct CoulombProblem {
    double epsilon_mu = 1e-8; // in (0, 1e-4]
    void validate() const;
};

struct CoulombCoeffs {
    double d_v, dd_v; // D_v and dD_v/dv
    double f_d, df_d; // F_d and dF_d/dv
    double d_a, dd_a; // D_a and dD_a/dv
};

/// D_v = D_a = 1/2 * 1/(v+1), F_d = -1/2 * 1/(v+1), and their v-derivatives.
CoulombCoeffs coulomb_coefficients(double v);

/// Drift vector a(v) = (F_d(v), -2 D_a(v) mu, 0)^t.
Eigen::Vector3d coulomb_drift(const CoulombState& s);

/// Diagonal diffusion matrix
/// diag(sqrt(2 D_v), sqrt(2 D_a (1 - mu^2)), sqrt(2 D_a / (1 - mu^2))),
/// evaluated with mu clamped to |mu| <= 1 - epsilon_mu.
Eigen::Matrix3d coulomb_diffusion(const CoulombState& s, const CoulombProblem& p);

/// Drift Jacobian: rows (dF_d/dv, 0, 0), (-2 mu dD_a/dv, -2 D_a, 0), (0, 0, 0).
Eigen::Matrix3d coulomb_jacobian(const CoulombState& s);

/// Relaxation matrix diag(F_d(v)/v, -2 D_a(v), 0); singular at v = 0.
Eigen::Matrix3d coulomb_relax_matrix(const CoulombState& s);

/// Clamp policy for the pitch cosine. Throws if mu is not finite.
double clamp_mu(double mu, double epsilon_mu);

/// True when the state would be clamped before a diffusion evaluation.
inline bool mu_needs_clamp(const CoulombState& s, const CoulombProblem& p) {
    return std::abs(s.mu) > 1.0 - p.epsilon_mu;
}

/// State reached at v = 0 or v <= -1, or |mu| unclampable: the coefficient
/// functions are singular there.
class singularity_error : public std::runtime_error {
public:
    singularity_error(const std::string& what, const CoulombState& s)
        : std::runtime_error(what), state(s) {}
    CoulombState state;
};

/// Non-finite intermediate during a fixpoint sweep.
class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, int sweep_index)
        : std::runtime_error(what), sweep(sweep_index) {}
    int sweep;
};

} // namespace sdesplit
