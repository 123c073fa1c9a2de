#include "sdesplit/wiener.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sdesplit {

WienerPath generate_path(int dims, int n_steps, double dt, std::uint64_t seed) {
    if (dims < 1 || n_steps < 1)
        throw std::invalid_argument("generate_path: dims and n_steps must be positive");
    if (!(dt > 0.0))
        throw std::invalid_argument("generate_path: dt must be positive");

    WienerPath path;
    path.dims = dims;
    path.n_steps = n_steps;
    path.dt = dt;
    path.seed = seed;
    path.increments.resize(n_steps, dims);
    path.aux_increments.resize(n_steps, dims);

    const double main_scale = std::sqrt(dt);
    const double aux_scale = std::sqrt(dt / (2.0 * M_PI * M_PI));
    GaussianStream stream(GaussianStream::derive(seed, stream_tag::path));
    for (int k = 0; k < n_steps; ++k) {
        for (int j = 0; j < dims; ++j) {
            path.increments(k, j) = main_scale * stream.next();
            path.aux_increments(k, j) = aux_scale * stream.next();
        }
    }
    return path;
}

WienerPath with_zero_noise(WienerPath path) {
    path.increments.setZero();
    path.aux_increments.setZero();
    path.zeroed = true;
    return path;
}

WienerPath coarsen(const WienerPath& path, int factor) {
    if (factor < 1)
        throw std::invalid_argument("coarsen: factor must be positive");
    if (path.n_steps % factor != 0)
        throw std::invalid_argument("coarsen: factor " + std::to_string(factor) +
                                    " does not divide n_steps " + std::to_string(path.n_steps));
    if (factor == 1) return path;

    WienerPath out;
    out.dims = path.dims;
    out.n_steps = path.n_steps / factor;
    out.dt = path.dt * factor;
    out.seed = path.seed;
    out.zeroed = path.zeroed;
    out.increments = Matrix::Zero(out.n_steps, out.dims);
    out.aux_increments = Matrix::Zero(out.n_steps, out.dims);

    for (int k = 0; k < out.n_steps; ++k)
        for (int f = 0; f < factor; ++f)
            out.increments.row(k) += path.increments.row(k * factor + f);

    if (!path.zeroed) {
        const double aux_scale = std::sqrt(out.dt / (2.0 * M_PI * M_PI));
        GaussianStream stream(GaussianStream::derive(path.seed, stream_tag::coarse,
                                                     static_cast<std::uint64_t>(factor)));
        for (int k = 0; k < out.n_steps; ++k)
            for (int j = 0; j < out.dims; ++j)
                out.aux_increments(k, j) = aux_scale * stream.next();
    }
    return out;
}

std::pair<double, double> levy_pair(double j_i, double j_j, double a_i0, double a_j0) {
    const double half_prod = 0.5 * (j_j * j_i);
    const double skew = 0.5 * (a_i0 * j_j - a_j0 * j_i);
    return {half_prod - skew, half_prod + skew};
}

std::pair<double, double> levy_pair(const WienerPath& path, int step, int i, int j) {
    if (i == j)
        throw std::invalid_argument("levy_pair: diagonal (i == j) is handled analytically by the schemes");
    if (step < 0 || step >= path.n_steps || i < 0 || i >= path.dims || j < 0 || j >= path.dims)
        throw std::invalid_argument("levy_pair: index out of range");
    return levy_pair(path.increments(step, i), path.increments(step, j),
                     path.aux_increments(step, i), path.aux_increments(step, j));
}

Matrix stratonovich_matrix_integral(const Matrix& a, const WienerPath& path, int dim, double upto) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("stratonovich_matrix_integral: matrix must be square");
    if (dim < 0 || dim >= path.dims)
        throw std::invalid_argument("stratonovich_matrix_integral: dimension out of range");
    const double ratio = upto / path.dt;
    const int k = static_cast<int>(std::llround(ratio));
    if (std::abs(ratio - k) > 1e-9 || k < 0 || k > path.n_steps)
        throw std::invalid_argument("stratonovich_matrix_integral: upto is not on the path grid");

    Matrix sum = Matrix::Zero(a.rows(), a.cols());
    for (int s = 0; s < k; ++s) {
        const double mid = (s + 0.5) * path.dt;
        sum += mat_exp(a * mid) * path.increments(s, dim);
    }
    return sum;
}

std::vector<double> refine_increments(const WienerPath& path, int step, int dim, int n_sub) {
    if (n_sub < 1)
        throw std::invalid_argument("refine_increments: n_sub must be positive");
    if (step < 0 || step >= path.n_steps || dim < 0 || dim >= path.dims)
        throw std::invalid_argument("refine_increments: index out of range");

    if (path.zeroed) return std::vector<double>(n_sub, 0.0);

    GaussianStream stream(GaussianStream::derive(path.seed, stream_tag::refine,
                                                 static_cast<std::uint64_t>(step),
                                                 static_cast<std::uint64_t>(dim)));
    const double sub_dt = path.dt / n_sub;
    const double scale = std::sqrt(sub_dt);
    std::vector<double> subs(n_sub);
    double total = 0.0;
    for (double& s : subs) {
        s = scale * stream.next();
        total += s;
    }
    // Condition on the known step increment: subtract the average surplus.
    const double shift = (total - path.increments(step, dim)) / n_sub;
    for (double& s : subs) s -= shift;
    return subs;
}

std::vector<double> summative_increments(const WienerPath& path, int step, int n_sub) {
    if (n_sub < 1)
        throw std::invalid_argument("summative_increments: n_sub must be positive");
    if (step < 0 || step >= path.n_steps)
        throw std::invalid_argument("summative_increments: step out of range");

    if (path.zeroed) return std::vector<double>(n_sub, 0.0);

    GaussianStream stream(GaussianStream::derive(path.seed, stream_tag::summative,
                                                 static_cast<std::uint64_t>(step)));
    const double scale = std::sqrt(path.dt / n_sub);
    std::vector<double> subs(n_sub);
    for (double& s : subs) s = scale * stream.next();
    return subs;
}

void dump_noise_csv(const WienerPath& path, std::ostream& os) {
    os << "step,dim,dW,dW_aux\n";
    char buf[64];
    for (int k = 0; k < path.n_steps; ++k) {
        for (int j = 0; j < path.dims; ++j) {
            os << k << ',' << j << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", path.increments(k, j));
            os << buf << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", path.aux_increments(k, j));
            os << buf << '\n';
        }
    }
}

} // namespace sdesplit
