#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdesplit/linalg.hpp"

namespace sdesplit {

/// End-time error of one sample path, kept per component so aggregates can be
/// recomputed later. Linear problems store the state-vector norm in err_v.
struct ErrorSample {
    std::string scheme;
    double dt = 0.0;
    long path_index = 0;
    double err_v = 0.0;
    double err_mu = 0.0;
    double err_phi = 0.0;

    double norm() const { return std::sqrt(err_v * err_v + err_mu * err_mu + err_phi * err_phi); }
};

/// Root mean square of the per-path error norms.
double strong_error(std::span<const double> errors);
double strong_error(std::span<const ErrorSample> samples);

/// Arithmetic mean of the per-path error norms.
double weak_error(std::span<const double> errors);
double weak_error(std::span<const ErrorSample> samples);

/// Unbiased sample variance of the per-path error norms (needs at least two).
double error_variance(std::span<const double> errors);
double error_variance(std::span<const ErrorSample> samples);

/// (1/T) sum_{i=1..N} dt * ||coarse(i dt) - ref(i dt)||^2 for trajectories
/// sampled at t = 0, dt, ..., N dt; the reference grid must contain the
/// coarse grid (its node count minus one divides evenly).
double time_avg_mse(const std::vector<Vector>& coarse_traj, const std::vector<Vector>& ref_traj,
                    double dt, double t_end);

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log(error) against log(dt).
OrderFit estimate_order(std::span<const std::pair<double, double>> points);

} // namespace sdesplit
