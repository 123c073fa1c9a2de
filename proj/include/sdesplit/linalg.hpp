#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <stdexcept>
#include <string>

namespace sdesplit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace detail {

inline std::string shape_str(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace detail

/// Matrix product with explicit conformability check.
template <typename DerivedA, typename DerivedB>
Matrix mat_mul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("mat_mul: cannot multiply " + detail::shape_str(a.rows(), a.cols()) +
                                    " by " + detail::shape_str(b.rows(), b.cols()));
    return a * b;
}

/// Commutator [a, b] = a*b - b*a of two square matrices of equal size.
template <typename DerivedA, typename DerivedB>
Matrix commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("commutator: operands must be square and of equal size, got " +
                                    detail::shape_str(a.rows(), a.cols()) + " and " +
                                    detail::shape_str(b.rows(), b.cols()));
    return a * b - b * a;
}

/// Matrix exponential (scaling-and-squaring with Pade approximants).
/// Relative accuracy is well below 1e-12 for the small, moderately scaled
/// matrices used by the splitting schemes.
template <typename Derived>
Matrix mat_exp(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("mat_exp: matrix must be square, got " +
                                    detail::shape_str(m.rows(), m.cols()));
    Matrix dense = m;
    if (!dense.allFinite())
        throw std::invalid_argument("mat_exp: matrix has non-finite entries");
    return dense.exp();
}

} // namespace sdesplit
