#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

#include "sdesplit/linalg.hpp"

namespace sdesplit {

/// Deterministic stream of standard normal draws.
///
/// A 64-bit key is derived from a seed plus any number of tag words via
/// splitmix64 mixing, so independent substreams (per sample, per step, ...)
/// never collide by construction of their tags. Each normal consumes exactly
/// two mt19937_64 words through a fixed Box-Muller map (cosine branch only),
/// which keeps the stream position a pure function of the draw count.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t key) : gen_(key) {}

    double next() {
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;         // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    static std::uint64_t mix(std::uint64_t h, std::uint64_t word) {
        h += 0x9e3779b97f4a7c15ULL + word;
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
        h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
        return h ^ (h >> 31);
    }

    template <typename... Words>
    static std::uint64_t derive(std::uint64_t seed, Words... words) {
        std::uint64_t h = mix(seed, 0x2545f4914f6cdd1dULL);
        ((h = mix(h, static_cast<std::uint64_t>(words))), ...);
        return h;
    }

private:
    std::mt19937_64 gen_;
};

/// Substream tags (arbitrary fixed constants, one per draw purpose).
namespace stream_tag {
inline constexpr std::uint64_t path = 0x7057494e45520001ULL;      // main + aux path draws
inline constexpr std::uint64_t coarse = 0x7057494e45520002ULL;    // aux draws of coarsened paths
inline constexpr std::uint64_t summative = 0x7057494e45520003ULL; // summative-splitting sub-increments
inline constexpr std::uint64_t refine = 0x7057494e45520004ULL;    // per-step quadrature sub-grids
inline constexpr std::uint64_t sample = 0x7057494e45520005ULL;    // per-sample seeds of an ensemble
} // namespace stream_tag

/// Seeded Wiener increments on a uniform grid.
///
/// increments(k, j)     = sqrt(dt) * N(0,1)            (main increment of step k, dimension j)
/// aux_increments(k, j) = sqrt(dt / (2 pi^2)) * N(0,1) (auxiliary increment for area approximations)
///
/// Draw order is step-major, dimension-minor, main before auxiliary, from a
/// single stream keyed by the seed; regeneration with the same arguments is
/// bitwise reproducible.
struct WienerPath {
    int dims = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    Matrix increments;     // n_steps x dims
    Matrix aux_increments; // n_steps x dims
    bool zeroed = false;   // set by with_zero_noise; derived draws vanish too
};

WienerPath generate_path(int dims, int n_steps, double dt, std::uint64_t seed);

/// Deterministic-run override: all stored increments set to zero and every
/// derived draw (coarse aux, summative, refinement) forced to zero as well.
WienerPath with_zero_noise(WienerPath path);

/// Merge groups of `factor` consecutive steps. Main increments are exact sums
/// of the fine ones; auxiliary increments are drawn fresh from a substream
/// keyed by (seed, coarse tag, factor). factor == 1 returns the path as is.
WienerPath coarsen(const WienerPath& path, int factor);

/// Iterated-integral pair (J_ji, J_ij) from raw increment values:
///   J_ji = 1/2 J_j J_i - 1/2 (a_i0 J_j - a_j0 J_i)
/// and symmetrically for J_ij, so that J_ji + J_ij = J_i * J_j up to the two
/// roundings of the formula itself.
std::pair<double, double> levy_pair(double j_i, double j_j, double a_i0, double a_j0);

/// Same, reading J and a from the path at the given step. i == j is rejected;
/// the diagonal case is 1/2((dW_i)^2 - dt) and handled directly by the schemes.
std::pair<double, double> levy_pair(const WienerPath& path, int step, int i, int j);

/// Midpoint-exponential (Stratonovich) sum over the first k = upto/dt steps:
///   sum_j exp(a * (t_j + t_{j+1})/2) * dW_j   for the given noise dimension.
Matrix stratonovich_matrix_integral(const Matrix& a, const WienerPath& path, int dim, double upto);

/// Bridge-consistent partition of one step's main increment into n_sub
/// sub-increments (their sum reproduces increments(step, dim) exactly).
/// Keyed by (seed, refine tag, step, dim): schedule independent.
std::vector<double> refine_increments(const WienerPath& path, int step, int dim, int n_sub);

/// n_sub independent N(0, dt/n_sub) draws for the summative splitting's noise
/// factor, keyed by (seed, summative tag, step).
std::vector<double> summative_increments(const WienerPath& path, int step, int n_sub);

/// CSV dump with header `step,dim,dW,dW_aux`, one row per (step, dim).
void dump_noise_csv(const WienerPath& path, std::ostream& os);

} // namespace sdesplit
