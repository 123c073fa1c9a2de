#include "sdesplit/iterative_schemes.hpp"

#include <cmath>

namespace sdesplit {

void IterConfig::validate() const {
    if (iterations < 1 || iterations > 3)
        throw std::invalid_argument("IterConfig: iterations must be 1, 2 or 3");
    if (quadrature_substeps < 1)
        throw std::invalid_argument("IterConfig: quadrature_substeps must be positive");
    if (quad_rule == QuadRule::simpson && quadrature_substeps % 2 != 0)
        throw std::invalid_argument("IterConfig: the Simpson rule needs an even sub-step count");
    if (sweeps < 1)
        throw std::invalid_argument("IterConfig: sweeps must be positive");
}

IterScalarWorkspace::IterScalarWorkspace(const LinearSdeProblem& p, double dt_in,
                                         const IterConfig& cfg) {
    cfg.validate();
    if (p.noise_dims() != 1)
        throw std::invalid_argument("iter_scalar_step: problem must have a single noise operator; "
                                    "use iter_vectorial_step for vectorial noise");
    dt = dt_in;
    sub_dt = dt / cfg.quadrature_substeps;
    const Matrix& noise = p.noise_ops[0];
    exp_a_dt = mat_exp(p.a * dt);
    p_sq = noise * noise;
    p_cube = p_sq * noise;
    exp_a_mid.reserve(cfg.quadrature_substeps);
    comm_p_expm.reserve(cfg.quadrature_substeps);
    for (int j = 0; j < cfg.quadrature_substeps; ++j) {
        const double mid = (j + 0.5) * sub_dt;
        exp_a_mid.push_back(mat_exp(p.a * mid));
        comm_p_expm.push_back(commutator(noise, exp_a_mid.back()));
    }
}

Vector iter_scalar_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                        const IterConfig& cfg) {
    return iter_scalar_step(y, p, ctx, cfg, IterScalarWorkspace(p, ctx.dt(), cfg));
}

Vector iter_scalar_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                        const IterConfig& cfg, const IterScalarWorkspace& ws) {
    cfg.validate();
    if (y.size() != p.dim())
        throw std::invalid_argument("iter_scalar_step: state dimension does not match problem");
    if (p.noise_dims() != 1)
        throw std::invalid_argument("iter_scalar_step: problem must have a single noise operator; "
                                    "use iter_vectorial_step for vectorial noise");
    ctx.validate(1);

    const Matrix& noise = p.noise_ops[0];
    const double dt = ctx.dt();
    const double dw = ctx.dw(0);
    const int n_sub = cfg.quadrature_substeps;

    Vector x1 = ws.exp_a_dt * y;
    if (cfg.iterations == 1) return x1;

    const std::vector<double> subs = refine_increments(ctx.path, ctx.step, 0, n_sub);

    // C1 over the whole step (midpoint-exponential Stratonovich sum).
    const Eigen::Index n = p.dim();
    Matrix c1 = Matrix::Zero(n, n);
    for (int j = 0; j < n_sub; ++j) c1 += ws.exp_a_mid[j] * subs[j];
    const Matrix c2 = noise * c1 - c1 * noise;

    Vector correction = Vector::Zero(n);
    if (cfg.variant == IterVariant::resolved && !ctx.path.zeroed)
        correction += noise * y * dw + 0.5 * (ws.p_sq * y) * (dw * dw - dt);
    correction += c2 * y;
    Vector x = x1 + ws.exp_a_dt * correction;
    if (cfg.iterations == 2) return x;

    // Third iterate: C3 accumulated over the sub-grid; C2(mid_j) uses the
    // partial C1 up to t_j plus half of sub-increment j.
    Matrix c1_partial = Matrix::Zero(n, n);
    Matrix c3 = Matrix::Zero(n, n);
    for (int j = 0; j < n_sub; ++j) {
        const Matrix c1_mid = c1_partial + ws.exp_a_mid[j] * (0.5 * subs[j]);
        const Matrix c2_mid = noise * c1_mid - c1_mid * noise;
        switch (cfg.c3_mode) {
        case C3Mode::ds_weighted:
            c3 += (ws.comm_p_expm[j] * c2_mid) * ws.sub_dt;
            break;
        case C3Mode::raw_sum:
            c3 += noise * ws.exp_a_mid[j] * c2_mid - ws.exp_a_mid[j] * noise * c2_mid;
            break;
        case C3Mode::increment_weighted:
            c3 += noise * ws.exp_a_mid[j] * c2_mid - ws.exp_a_mid[j] * noise * c2_mid * subs[j];
            break;
        }
        c1_partial += ws.exp_a_mid[j] * subs[j];
    }

    Vector third = c3 * y;
    if (cfg.variant == IterVariant::resolved)
        third += 0.5 * (ws.p_cube * y) * ((dw * dw / 3.0 - dt) * dw);
    return x + ws.exp_a_dt * third;
}

Vector iter_vectorial_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                           const IterConfig& cfg) {
    cfg.validate();
    if (cfg.iterations == 3)
        throw unsupported_config("iter_vectorial_step: three iterations are not defined for "
                                 "vectorial noise");
    if (y.size() != p.dim())
        throw std::invalid_argument("iter_vectorial_step: state dimension does not match problem");
    ctx.validate(p.noise_dims());

    const double dt = ctx.dt();
    Vector out = mat_exp(p.a * dt) * y;
    for (int j = 0; j < p.noise_dims(); ++j)
        out += p.noise_ops[j] * y * ctx.dw(j);
    if (!ctx.path.zeroed) {
        for (int i = 0; i < p.noise_dims(); ++i) {
            const double dw = ctx.dw(i);
            out += 0.5 * (p.noise_ops[i] * (p.noise_ops[i] * y)) * (dw * dw - dt);
        }
    }
    for (int i = 0; i < p.noise_dims(); ++i) {
        for (int j = i + 1; j < p.noise_dims(); ++j) {
            const auto [j_ji, j_ij] = levy_pair(ctx.path, ctx.step, i, j);
            out += 0.5 * (commutator(p.noise_ops[i], p.noise_ops[j]) * y) * (j_ji - j_ij);
        }
    }
    if (cfg.iterations == 1) return out;

    for (int i = 0; i < p.noise_dims(); ++i) {
        const double dw = ctx.dw(i);
        const Matrix& noise = p.noise_ops[i];
        out += 0.5 * (noise * (noise * (noise * y))) * ((dw * dw / 3.0 - dt) * dw);
    }
    return out;
}

Vector stochastic_convolution(const Matrix& a_hat, const Matrix& b_start, const Matrix& b_mid,
                              const Matrix& b_end, const Vector& dw, double dt, QuadRule rule) {
    if (a_hat.rows() != a_hat.cols())
        throw std::invalid_argument("stochastic_convolution: a_hat must be square");
    const Eigen::Index n = a_hat.rows();
    if (b_start.rows() != n || b_start.cols() != n || b_mid.rows() != n || b_mid.cols() != n ||
        b_end.rows() != n || b_end.cols() != n || dw.size() != n)
        throw std::invalid_argument("stochastic_convolution: operand dimensions do not match");

    switch (rule) {
    case QuadRule::trapezoid:
        return 0.5 * ((b_end + mat_exp(a_hat * dt) * b_start) * dw);
    case QuadRule::simpson:
        return (1.0 / 6.0) *
               ((b_end + 4.0 * (mat_exp(a_hat * (0.5 * dt)) * b_mid) + mat_exp(a_hat * dt) * b_start) *
                dw);
    }
    throw std::invalid_argument("stochastic_convolution: unknown quadrature rule");
}

namespace {

CoulombState average_state(const CoulombState& a, const CoulombState& b) {
    return {0.5 * (a.v + b.v), 0.5 * (a.mu + b.mu), 0.5 * (a.phi + b.phi)};
}

void check_finite_sweep(const Eigen::Vector3d& x, int sweep) {
    if (!x.allFinite())
        throw divergence_error("coulomb sweep produced a non-finite state", sweep);
}

} // namespace

CoulombState coulomb_relax_step(const CoulombState& s, const CoulombProblem& p,
                                const StepContext& ctx, const IterConfig& cfg) {
    cfg.validate();
    ctx.validate(3);
    if (!(s.v > -1.0))
        throw singularity_error("coulomb_relax_step: v is outside the coefficient domain", s);

    const double dt = ctx.dt();
    const Eigen::Vector3d dw{ctx.dw(0), ctx.dw(1), ctx.dw(2)};
    const Eigen::Vector3d prev_vec = s.to_vector();
    const Eigen::Matrix3d b_prev = coulomb_diffusion(s, p);

    CoulombState cur = s;
    for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
        if (!(cur.v > -1.0))
            throw singularity_error("coulomb_relax_step: sweep iterate left the coefficient domain",
                                    cur);
        const Eigen::Matrix3d a_hat = coulomb_relax_matrix(cur);
        const Eigen::Matrix3d b_cur = coulomb_diffusion(cur, p);
        const Eigen::Matrix3d b_mid = coulomb_diffusion(average_state(s, cur), p);
        const Vector conv =
            stochastic_convolution(a_hat, b_prev, b_mid, b_cur, dw, dt, cfg.quad_rule);
        Eigen::Vector3d next = mat_exp(a_hat * dt) * prev_vec + conv;
        check_finite_sweep(next, sweep);
        cur = CoulombState::from_vector(next);
    }
    cur.mu = std::min(1.0, std::max(-1.0, cur.mu));
    return cur;
}

CoulombState coulomb_taylor_step(const CoulombState& s, const CoulombProblem& p,
                                 const StepContext& ctx, const IterConfig& cfg) {
    cfg.validate();
    ctx.validate(3);
    if (!(s.v > -1.0))
        throw singularity_error("coulomb_taylor_step: v is outside the coefficient domain", s);

    const double dt = ctx.dt();
    const Eigen::Vector3d dw{ctx.dw(0), ctx.dw(1), ctx.dw(2)};
    const Eigen::Vector3d x = s.to_vector();
    const Eigen::Matrix3d jac = coulomb_jacobian(s);
    const Eigen::Vector3d a_tilde = coulomb_drift(s) - jac * x;
    const Eigen::Matrix3d exp_j = mat_exp(jac * dt);
    // Truncated integral of exp(J s) ds; matches variation of constants to O(dt^4).
    const Eigen::Matrix3d series = Eigen::Matrix3d::Identity() * dt + jac * (dt * dt / 2.0) +
                                   jac * jac * (dt * dt * dt / 6.0);
    const Eigen::Vector3d deterministic = exp_j * x + series * a_tilde;

    const Eigen::Matrix3d b_prev = coulomb_diffusion(s, p);
    CoulombState cur = s;
    for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
        if (!(cur.v > -1.0))
            throw singularity_error("coulomb_taylor_step: sweep iterate left the coefficient domain",
                                    cur);
        const Eigen::Matrix3d b_cur = coulomb_diffusion(cur, p);
        const Eigen::Matrix3d b_mid = coulomb_diffusion(average_state(s, cur), p);
        const Vector conv = stochastic_convolution(jac, b_prev, b_mid, b_cur, dw, dt, cfg.quad_rule);
        Eigen::Vector3d next = deterministic + conv;
        check_finite_sweep(next, sweep);
        cur = CoulombState::from_vector(next);
    }
    cur.mu = std::min(1.0, std::max(-1.0, cur.mu));
    return cur;
}

} // namespace sdesplit
