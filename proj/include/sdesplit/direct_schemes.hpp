#pragma once

#include "sdesplit/problems.hpp"
#include "sdesplit/wiener.hpp"

namespace sdesplit {

/// Per-step view of a WienerPath.
struct StepContext {
    const WienerPath& path;
    int step = 0;

    double dt() const { return path.dt; }
    double dw(int dim = 0) const { return path.increments(step, dim); }
    double aux(int dim = 0) const { return path.aux_increments(step, dim); }
    void validate(int dims_needed) const;
};

/// y + A y dt + sum_j P_j y dW_j
Vector em_step_linear(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx);

/// Euler-Maruyama plus the diagonal second-order noise correction
/// sum_i 1/2 P_i^2 y ((dW_i)^2 - dt).
Vector milstein_step_diag(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx);

/// Diagonal Milstein plus the off-diagonal commutator term
/// sum_{i<j} 1/2 [P_i, P_j] (J_ji - J_ij) y, with the iterated-integral pair
/// approximated from the path's auxiliary increments.
Vector milstein_step_full(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx);

/// exp((A - P^2/2) dt), the deterministic half-step shared by the A-B and
/// summative splittings (scalar-noise problems only).
Matrix ab_drift_factor(const LinearSdeProblem& p, double dt);

/// Scalar-noise splitting: y -> exp(P dW) exp((A - P^2/2) dt) y.
Vector ab_split_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx);
Vector ab_split_step(const Vector& y, const Matrix& drift_factor, const LinearSdeProblem& p,
                     const StepContext& ctx);

/// Scalar-noise splitting whose noise factor uses a normalized sum of n_sub
/// fresh sub-increments: y -> exp(P * (1/sqrt(n_sub)) sum_j dW_j) exp((A - P^2/2) dt) y.
Vector summative_split_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                            int n_sub);
Vector summative_split_step(const Vector& y, const Matrix& drift_factor, const LinearSdeProblem& p,
                            const StepContext& ctx, int n_sub);

/// One application of the closed-form solution map
/// y -> exp(A dt - 1/2 sum_j P_j^2 dt + sum_j P_j dW_j) y,
/// the per-step reference for the linear benchmark problems (exact whenever
/// all operators commute).
Vector exact_linear_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx);

/// Euler-Maruyama for the test-particle system; noise dimensions of the
/// context are ordered (v, mu, phi).
CoulombState em_step_coulomb(const CoulombState& s, const CoulombProblem& p, const StepContext& ctx);

/// Milstein for the test-particle system: adds the dD/dv diagonal corrections
/// and the A_{v,mu}, A_{v,phi}, A_{mu,phi} iterated-integral terms.
CoulombState milstein_step_coulomb(const CoulombState& s, const CoulombProblem& p,
                                   const StepContext& ctx);

} // namespace sdesplit
