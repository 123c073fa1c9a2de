#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sdesplit/metrics.hpp"

using namespace sdesplit;

namespace {

std::span<const double> view(const std::vector<double>& v) { return {v.data(), v.size()}; }

} // namespace

TEST_CASE("strong error") {
    CHECK(strong_error(view({3.0, 4.0})) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    CHECK(strong_error(view({2.5, 2.5, 2.5})) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(strong_error(view({0.0})) == 0.0);
    CHECK_THROWS_AS(strong_error(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("weak error") {
    CHECK(weak_error(view({1.0, 1.0, 1.0})) == 1.0);
    CHECK(weak_error(view({0.0, 2.0})) == 1.0);
    CHECK_THROWS_AS(weak_error(std::span<const double>{}), std::invalid_argument);

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> e(20);
        for (double& x : e) x = dist(gen);
        CHECK(weak_error(view(e)) <= strong_error(view(e)) + 1e-15);
    }
}

TEST_CASE("error variance") {
    CHECK(error_variance(view({1.5, 1.5, 1.5})) == 0.0);
    CHECK(error_variance(view({0.0, 2.0})) == 2.0);
    CHECK_THROWS_AS(error_variance(view({1.0})), std::invalid_argument);

    std::mt19937_64 gen(4);
    std::normal_distribution<double> dist(1.0, 0.3);
    std::vector<double> e(64);
    for (double& x : e) x = std::abs(dist(gen));
    CHECK(error_variance(view(e)) >= 0.0);
}

TEST_CASE("metrics are permutation invariant") {
    std::vector<double> e = {0.3, 1.7, 0.9, 2.2, 0.05, 1.1};
    std::vector<double> shuffled = e;
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 10; ++rep) {
        std::shuffle(shuffled.begin(), shuffled.end(), gen);
        CHECK(strong_error(view(shuffled)) == doctest::Approx(strong_error(view(e))).epsilon(1e-14));
        CHECK(weak_error(view(shuffled)) == doctest::Approx(weak_error(view(e))).epsilon(1e-14));
        CHECK(error_variance(view(shuffled)) ==
              doctest::Approx(error_variance(view(e))).epsilon(1e-13));
    }
}

TEST_CASE("error sample norm aggregation") {
    std::vector<ErrorSample> samples(2);
    samples[0].err_v = 3.0;
    samples[1].err_v = 4.0;
    CHECK(strong_error(std::span<const ErrorSample>(samples)) ==
          doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
    samples[0].err_mu = 4.0; // norm becomes 5
    CHECK(samples[0].norm() == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("time averaged mean square error") {
    auto traj = [](std::initializer_list<double> vals) {
        std::vector<Vector> out;
        for (double v : vals) out.push_back(Vector::Constant(1, v));
        return out;
    };

    CHECK(time_avg_mse(traj({1, 2, 3}), traj({1, 2, 3}), 0.5, 1.0) == 0.0);

    // Constant offset c integrates to c^2 regardless of the grid.
    const auto ref = traj({0, 0, 0, 0, 0});
    const auto off = traj({0.7, 0.7, 0.7, 0.7, 0.7});
    CHECK(time_avg_mse(off, ref, 0.25, 1.0) == doctest::Approx(0.49).epsilon(1e-15));

    // Two steps with offsets {1, 2}: (0.5 * 1 + 0.5 * 4) / 1 = 2.5.
    CHECK(time_avg_mse(traj({0, 1, 2}), traj({0, 0, 0}), 0.5, 1.0) ==
          doctest::Approx(2.5).epsilon(1e-15));

    // Reference on a containing finer grid (stride 2).
    CHECK(time_avg_mse(traj({0, 1, 2}), traj({0, 5, 1, 5, 2}), 0.5, 1.0) == 0.0);

    CHECK_THROWS_AS(time_avg_mse(traj({0, 1, 2}), traj({0, 1, 2, 3}), 0.5, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(time_avg_mse(traj({0, 1, 2}), traj({0, 1, 2}), 0.4, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(time_avg_mse(traj({0}), traj({0}), 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("order estimation") {
    using P = std::pair<double, double>;
    const double h = 0.1, e = 0.37;
    std::vector<P> first = {{h, e}, {h / 2, e / 2}, {h / 4, e / 4}};
    OrderFit fit = estimate_order(first);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<P> half = {{h, e}, {h / 2, e / std::sqrt(2.0)}, {h / 4, e / 2}};
    CHECK(estimate_order(half).slope == doctest::Approx(0.5).epsilon(1e-12));

    // Rescaling the errors shifts the intercept, not the slope.
    std::vector<P> scaled = first;
    for (auto& [dt, err] : scaled) err *= 13.7;
    CHECK(std::abs(estimate_order(scaled).slope - fit.slope) <= 1e-12);
    CHECK(estimate_order(scaled).intercept > fit.intercept);

    CHECK_THROWS_AS(estimate_order(std::vector<P>{{h, e}, {h / 2, e / 2}}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_order(std::vector<P>{{h, e}, {h / 2, 0.0}, {h / 4, e}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_order(std::vector<P>{{-h, e}, {h / 2, e}, {h / 4, e}}),
                    std::invalid_argument);
}
