#include "sdesplit/problems.hpp"

#include <cmath>

namespace sdesplit {

void LinearSdeProblem::validate() const {
    if (a.rows() != a.cols())
        throw std::invalid_argument("LinearSdeProblem: drift operator must be square");
    if (noise_ops.empty())
        throw std::invalid_argument("LinearSdeProblem: at least one noise operator required");
    for (const Matrix& p : noise_ops)
        if (p.rows() != a.rows() || p.cols() != a.cols())
            throw std::invalid_argument("LinearSdeProblem: noise operator shape mismatch");
    if (y0.size() != a.rows())
        throw std::invalid_argument("LinearSdeProblem: initial state dimension mismatch");
    if (!(t_end > 0.0))
        throw std::invalid_argument("LinearSdeProblem: t_end must be positive");
    if (!a.allFinite() || !y0.allFinite())
        throw std::invalid_argument("LinearSdeProblem: non-finite entries");
    for (const Matrix& p : noise_ops)
        if (!p.allFinite())
            throw std::invalid_argument("LinearSdeProblem: non-finite entries");
}

LinearSdeProblem build_scalar_noise_problem(double t_end) {
    const int n = 10;
    LinearSdeProblem prob;
    prob.a = Matrix::Zero(n, n);
    Matrix p = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        prob.a(i, i) = -1.0;
        p(i, i) = 0.01;
        for (int j = 0; j < i; ++j) {
            prob.a(i, j) = 0.1;
            p(i, j) = 0.005;
        }
    }
    prob.noise_ops = {p};
    prob.y0 = Vector::Ones(n);
    prob.t_end = t_end;
    prob.validate();
    return prob;
}

LinearSdeProblem build_vectorial_2x2(double alpha1, double alpha2) {
    LinearSdeProblem prob;
    prob.a = alpha1 * (Matrix(2, 2) << -0.5, 0.0, 0.0, -0.5).finished();
    Matrix p1 = alpha2 * (Matrix(2, 2) << 0.75, 0.1, 0.0, -0.75).finished();
    Matrix p2 = alpha2 * (Matrix(2, 2) << 0.0, 0.9, 0.9, 0.0).finished();
    prob.noise_ops = {p1, p2};
    prob.y0 = Vector::Ones(2);
    prob.t_end = 1.0;
    prob.validate();
    return prob;
}

LinearSdeProblem build_vectorial_mxm(int m) {
    if (m < 2)
        throw std::invalid_argument("build_vectorial_mxm: m must be at least 2");
    LinearSdeProblem prob;
    prob.a = Matrix::Zero(m, m);
    Matrix p1 = Matrix::Zero(m, m);
    Matrix p2 = Matrix::Zero(m, m);
    const double off = 1.0 / m;
    for (int i = 0; i < m; ++i) {
        prob.a(i, i) = -1.0;
        p1(i, i) = 0.05;
        p2(i, i) = 0.05;
        for (int j = 0; j < i; ++j) {
            prob.a(i, j) = off;
            p1(i, j) = 0.05 * off;
            p2(j, i) = 0.05 * off;
        }
    }
    prob.noise_ops = {p1, p2};
    prob.y0 = Vector::Ones(m);
    prob.t_end = 1.0;
    prob.validate();
    return prob;
}

void CoulombProblem::validate() const {
    if (!(epsilon_mu > 0.0) || epsilon_mu > 1e-4)
        throw std::invalid_argument("CoulombProblem: epsilon_mu must lie in (0, 1e-4]");
}

CoulombCoeffs coulomb_coefficients(double v) {
    if (!(v > -1.0))
        throw std::domain_error("coulomb_coefficients: v must exceed -1");
    const double inv = 1.0 / (v + 1.0);
    const double inv2 = inv * inv;
    CoulombCoeffs c;
    c.d_v = 0.5 * inv;
    c.dd_v = -0.5 * inv2;
    c.f_d = -0.5 * inv;
    c.df_d = 0.5 * inv2;
    c.d_a = 0.5 * inv;
    c.dd_a = -0.5 * inv2;
    return c;
}

Eigen::Vector3d coulomb_drift(const CoulombState& s) {
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    return {c.f_d, -2.0 * c.d_a * s.mu, 0.0};
}

double clamp_mu(double mu, double epsilon_mu) {
    if (!std::isfinite(mu))
        throw singularity_error("clamp_mu: pitch cosine is not finite", CoulombState{0.0, mu, 0.0});
    const double bound = 1.0 - epsilon_mu;
    return std::min(bound, std::max(-bound, mu));
}

Eigen::Matrix3d coulomb_diffusion(const CoulombState& s, const CoulombProblem& p) {
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    const double mu = clamp_mu(s.mu, p.epsilon_mu);
    const double one_minus = 1.0 - mu * mu;
    Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
    b(0, 0) = std::sqrt(2.0 * c.d_v);
    b(1, 1) = std::sqrt(2.0 * c.d_a * one_minus);
    b(2, 2) = std::sqrt(2.0 * c.d_a / one_minus);
    return b;
}

Eigen::Matrix3d coulomb_jacobian(const CoulombState& s) {
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
    j(0, 0) = c.df_d;
    j(1, 0) = -2.0 * s.mu * c.dd_a;
    j(1, 1) = -2.0 * c.d_a;
    return j;
}

Eigen::Matrix3d coulomb_relax_matrix(const CoulombState& s) {
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    if (s.v == 0.0)
        throw singularity_error("coulomb_relax_matrix: relaxation rate F_d(v)/v is singular at v = 0", s);
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    a(0, 0) = c.f_d / s.v;
    a(1, 1) = -2.0 * c.d_a;
    return a;
}

} // namespace sdesplit
