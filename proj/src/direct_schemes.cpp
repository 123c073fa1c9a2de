#include "sdesplit/direct_schemes.hpp"

#include <cmath>

namespace sdesplit {

void StepContext::validate(int dims_needed) const {
    if (step < 0 || step >= path.n_steps)
        throw std::invalid_argument("StepContext: step index out of range");
    if (path.dims < dims_needed)
        throw std::invalid_argument("StepContext: path provides " + std::to_string(path.dims) +
                                    " noise dimensions, need " + std::to_string(dims_needed));
}

namespace {

void check_linear(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    if (y.size() != p.dim())
        throw std::invalid_argument("linear step: state dimension does not match problem");
    ctx.validate(p.noise_dims());
}

void check_scalar_noise(const LinearSdeProblem& p) {
    if (p.noise_dims() != 1)
        throw std::invalid_argument("scheme is defined for a single noise operator only");
}

void check_coulomb(const CoulombState& s, const StepContext& ctx) {
    ctx.validate(3);
    if (!(s.v > -1.0))
        throw singularity_error("coulomb step: v is outside the coefficient domain", s);
    if (!std::isfinite(s.v) || !std::isfinite(s.mu) || !std::isfinite(s.phi))
        throw singularity_error("coulomb step: non-finite state", s);
}

double clamp_unit(double mu) { return std::min(1.0, std::max(-1.0, mu)); }

} // namespace

Vector em_step_linear(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    check_linear(y, p, ctx);
    Vector out = y + p.a * y * ctx.dt();
    for (int j = 0; j < p.noise_dims(); ++j)
        out += p.noise_ops[j] * y * ctx.dw(j);
    return out;
}

Vector milstein_step_diag(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    Vector out = em_step_linear(y, p, ctx);
    if (ctx.path.zeroed) return out; // diffusion switched off: no compensator terms
    const double dt = ctx.dt();
    for (int i = 0; i < p.noise_dims(); ++i) {
        const double dw = ctx.dw(i);
        out += 0.5 * (p.noise_ops[i] * (p.noise_ops[i] * y)) * (dw * dw - dt);
    }
    return out;
}

Vector milstein_step_full(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    Vector out = milstein_step_diag(y, p, ctx);
    for (int i = 0; i < p.noise_dims(); ++i) {
        for (int j = i + 1; j < p.noise_dims(); ++j) {
            const auto [j_ji, j_ij] = levy_pair(ctx.path, ctx.step, i, j);
            out += 0.5 * (commutator(p.noise_ops[i], p.noise_ops[j]) * y) * (j_ji - j_ij);
        }
    }
    return out;
}

Matrix ab_drift_factor(const LinearSdeProblem& p, double dt) {
    check_scalar_noise(p);
    const Matrix& noise = p.noise_ops[0];
    return mat_exp((p.a - 0.5 * noise * noise) * dt);
}

Vector ab_split_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    return ab_split_step(y, ab_drift_factor(p, ctx.dt()), p, ctx);
}

Vector ab_split_step(const Vector& y, const Matrix& drift_factor, const LinearSdeProblem& p,
                     const StepContext& ctx) {
    check_linear(y, p, ctx);
    check_scalar_noise(p);
    if (ctx.path.zeroed) return mat_exp(p.a * ctx.dt()) * y;
    return mat_exp(p.noise_ops[0] * ctx.dw(0)) * (drift_factor * y);
}

Vector summative_split_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                            int n_sub) {
    return summative_split_step(y, ab_drift_factor(p, ctx.dt()), p, ctx, n_sub);
}

Vector summative_split_step(const Vector& y, const Matrix& drift_factor, const LinearSdeProblem& p,
                            const StepContext& ctx, int n_sub) {
    check_linear(y, p, ctx);
    check_scalar_noise(p);
    if (n_sub < 1)
        throw std::invalid_argument("summative_split_step: n_sub must be positive");
    if (ctx.path.zeroed) return mat_exp(p.a * ctx.dt()) * y;
    const std::vector<double> subs = summative_increments(ctx.path, ctx.step, n_sub);
    double total = 0.0;
    for (double s : subs) total += s;
    const double noise_arg = total / std::sqrt(static_cast<double>(n_sub));
    return mat_exp(p.noise_ops[0] * noise_arg) * (drift_factor * y);
}

Vector exact_linear_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx) {
    check_linear(y, p, ctx);
    const double dt = ctx.dt();
    Matrix arg = p.a * dt;
    if (!ctx.path.zeroed) {
        for (int j = 0; j < p.noise_dims(); ++j) {
            arg -= 0.5 * dt * (p.noise_ops[j] * p.noise_ops[j]);
            arg += p.noise_ops[j] * ctx.dw(j);
        }
    }
    return mat_exp(arg) * y;
}

CoulombState em_step_coulomb(const CoulombState& s, const CoulombProblem& p, const StepContext& ctx) {
    check_coulomb(s, ctx);
    const double dt = ctx.dt();
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    const double mu = clamp_mu(s.mu, p.epsilon_mu);
    const double one_minus = 1.0 - mu * mu;

    CoulombState out;
    out.v = s.v + c.f_d * dt + std::sqrt(2.0 * c.d_v) * ctx.dw(0);
    out.mu = s.mu - 2.0 * c.d_a * s.mu * dt + std::sqrt(2.0 * c.d_a * one_minus) * ctx.dw(1);
    out.phi = s.phi + std::sqrt(2.0 * c.d_a / one_minus) * ctx.dw(2);
    out.mu = clamp_unit(out.mu);
    return out;
}

CoulombState milstein_step_coulomb(const CoulombState& s, const CoulombProblem& p,
                                   const StepContext& ctx) {
    check_coulomb(s, ctx);
    const double dt = ctx.dt();
    const CoulombCoeffs c = coulomb_coefficients(s.v);
    const double mu = clamp_mu(s.mu, p.epsilon_mu);
    const double one_minus = 1.0 - mu * mu;
    const double dwv = ctx.dw(0), dwm = ctx.dw(1), dwp = ctx.dw(2);

    // Iterated integrals A_{k,l}; first index is the inner integration.
    const double a_vm = levy_pair(ctx.path, ctx.step, 1, 0).first;  // A_{v,mu}  = J_{v mu}
    const double a_vp = levy_pair(ctx.path, ctx.step, 2, 0).first;  // A_{v,phi}
    const double a_mp = levy_pair(ctx.path, ctx.step, 2, 1).first;  // A_{mu,phi}
    const double ratio = std::sqrt(c.d_v / c.d_a);

    // With the diffusion switched off, the compensator corrections drop too.
    const double qv = ctx.path.zeroed ? 0.0 : dwv * dwv - dt;
    const double qm = ctx.path.zeroed ? 0.0 : dwm * dwm - dt;

    CoulombState out;
    out.v = s.v + c.f_d * dt + std::sqrt(2.0 * c.d_v) * dwv + c.dd_v * 0.5 * qv;
    out.mu = s.mu - 2.0 * c.d_a * s.mu * dt + std::sqrt(2.0 * c.d_a * one_minus) * dwm
             - 2.0 * s.mu * c.d_a * 0.5 * qm
             + ratio * std::sqrt(one_minus) * c.dd_a * a_vm;
    out.phi = s.phi + std::sqrt(2.0 * c.d_a / one_minus) * dwp
              + ratio / std::sqrt(one_minus) * c.dd_a * a_vp
              + 2.0 * c.d_a * mu / one_minus * a_mp;
    out.mu = clamp_unit(out.mu);
    return out;
}

} // namespace sdesplit
