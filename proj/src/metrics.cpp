#include "sdesplit/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sdesplit {

namespace {

void check_nonempty(std::size_t n, const char* who) {
    if (n == 0) throw std::invalid_argument(std::string(who) + ": empty sample set");
}

std::vector<double> norms(std::span<const ErrorSample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const ErrorSample& s : samples) out.push_back(s.norm());
    return out;
}

} // namespace

double strong_error(std::span<const double> errors) {
    check_nonempty(errors.size(), "strong_error");
    double sum_sq = 0.0;
    for (double e : errors) sum_sq += e * e;
    return std::sqrt(sum_sq / static_cast<double>(errors.size()));
}

double weak_error(std::span<const double> errors) {
    check_nonempty(errors.size(), "weak_error");
    double sum = 0.0;
    for (double e : errors) sum += e;
    return sum / static_cast<double>(errors.size());
}

double error_variance(std::span<const double> errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("error_variance: needs at least two samples");
    const double mean = weak_error(errors);
    double sum_sq = 0.0;
    for (double e : errors) sum_sq += (e - mean) * (e - mean);
    return sum_sq / static_cast<double>(errors.size() - 1);
}

double strong_error(std::span<const ErrorSample> samples) {
    const auto n = norms(samples);
    return strong_error(std::span<const double>(n));
}

double weak_error(std::span<const ErrorSample> samples) {
    const auto n = norms(samples);
    return weak_error(std::span<const double>(n));
}

double error_variance(std::span<const ErrorSample> samples) {
    const auto n = norms(samples);
    return error_variance(std::span<const double>(n));
}

double time_avg_mse(const std::vector<Vector>& coarse_traj, const std::vector<Vector>& ref_traj,
                    double dt, double t_end) {
    if (coarse_traj.size() < 2 || ref_traj.size() < 2)
        throw std::invalid_argument("time_avg_mse: trajectories need at least two nodes");
    const std::size_t n = coarse_traj.size() - 1;
    const std::size_t n_ref = ref_traj.size() - 1;
    if (n_ref % n != 0)
        throw std::invalid_argument("time_avg_mse: reference grid does not contain the coarse grid");
    const std::size_t stride = n_ref / n;
    if (std::abs(static_cast<double>(n) * dt - t_end) > 1e-9 * std::max(1.0, t_end))
        throw std::invalid_argument("time_avg_mse: N * dt does not match t_end");

    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (coarse_traj[i].size() != ref_traj[i * stride].size())
            throw std::invalid_argument("time_avg_mse: state dimension mismatch");
        acc += dt * (coarse_traj[i] - ref_traj[i * stride]).squaredNorm();
    }
    return acc / t_end;
}

OrderFit estimate_order(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3)
        throw std::invalid_argument("estimate_order: needs at least three points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [dt, err] : points) {
        if (!(dt > 0.0) || !(err > 0.0))
            throw std::invalid_argument("estimate_order: dt and error must be positive");
        sx += std::log(dt);
        sy += std::log(err);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [dt, err] : points) {
        const double dx = std::log(dt) - mx;
        const double dy = std::log(err) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace sdesplit
