#pragma once

#include "sdesplit/direct_schemes.hpp"

namespace sdesplit {

enum class QuadRule { trapezoid, simpson };

/// Which transcription of the iterative correction operators to use.
/// `resolved` (default) carries the full noise response the derivation
/// produces; `printed` is the literal commutator-only form.
enum class IterVariant { resolved, printed };

/// Quadrature of the third-iterate correction C3: midpoint ds-sum (default),
/// or the two printed alternatives (raw unweighted sum; second term weighted
/// by the sub-increment).
enum class C3Mode { ds_weighted, raw_sum, increment_weighted };

struct IterConfig {
    int iterations = 1;           // 1, 2 or 3
    int quadrature_substeps = 10; // N_q, per-step sub-grid for C1/C2/C3
    QuadRule quad_rule = QuadRule::trapezoid;
    int sweeps = 2;               // fixpoint sweeps per step (Coulomb schemes)
    IterVariant variant = IterVariant::resolved;
    C3Mode c3_mode = C3Mode::ds_weighted;

    void validate() const;
};

class unsupported_config : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// dt-dependent operators of the scalar iterative scheme, reusable across
/// steps and paths. Immutable after construction.
struct IterScalarWorkspace {
    IterScalarWorkspace(const LinearSdeProblem& p, double dt, const IterConfig& cfg);

    double dt;
    double sub_dt;
    Matrix exp_a_dt;                  // exp(A dt)
    Matrix p_sq;                      // P^2
    Matrix p_cube;                    // P^3
    std::vector<Matrix> exp_a_mid;    // exp(A mid_j), mid_j = (j + 1/2) sub_dt
    std::vector<Matrix> comm_p_expm;  // [P, exp(A mid_j)]
};

/// Iterative splitting for scalar-noise linear problems, k = cfg.iterations:
///   k=1: exp(A dt) y
///   k=2: adds the noise response P dW + 1/2 P^2 (dW^2 - dt) plus the
///        commutator correction [P, C1] (resolved), or [P, C1] alone (printed),
///        all premultiplied by exp(A dt); C1 is the midpoint-exponential
///        quadrature over the step's bridge-refined sub-noise.
///   k=3: adds 1/2 P^3 (dW^3/3 - dt dW) (resolved only) plus the C3 correction.
Vector iter_scalar_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                        const IterConfig& cfg);
Vector iter_scalar_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                        const IterConfig& cfg, const IterScalarWorkspace& ws);

/// Iterative splitting for vectorial noise:
///   k=1: exp(A dt) y + full Milstein noise terms (diagonal + commutator areas)
///   k=2: adds sum_i 1/2 P_i^3 ((dW_i^2/3 - dt) dW_i) y
///   k=3: unsupported.
Vector iter_vectorial_step(const Vector& y, const LinearSdeProblem& p, const StepContext& ctx,
                           const IterConfig& cfg);

/// Weighted stochastic-convolution quadrature applied to one increment vector:
///   trapezoid: 1/2 (B_end + exp(A dt)   B_start) dW
///   simpson:   1/6 (B_end + 4 exp(A dt/2) B_mid + exp(A dt) B_start) dW
Vector stochastic_convolution(const Matrix& a_hat, const Matrix& b_start, const Matrix& b_mid,
                              const Matrix& b_end, const Vector& dw, double dt, QuadRule rule);

/// Fixpoint relaxation of the test-particle system: each sweep freezes the
/// coefficients at the current iterate, steps the previous accepted state by
/// exp(A_hat dt) and adds the stochastic convolution of the diffusion.
CoulombState coulomb_relax_step(const CoulombState& s, const CoulombProblem& p,
                                const StepContext& ctx, const IterConfig& cfg);

/// Jacobian (Taylor) linearization of the drift at the accepted state with a
/// truncated-series affine term, plus fixpoint sweeps over the noise term's
/// state dependence.
CoulombState coulomb_taylor_step(const CoulombState& s, const CoulombProblem& p,
                                 const StepContext& ctx, const IterConfig& cfg);

} // namespace sdesplit
