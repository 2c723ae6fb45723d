#pragma once

// Small dense helpers shared by the flow and switching code. Matrices here are
// tiny (generators with a handful of modes, affine fields with d <= 8), so
// everything is dense and allocation-light.

#include "pdmp/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace pdmp {

template <typename Derived>
using PlainMatrix = Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime,
                                  Derived::ColsAtCompileTime>;

/// Matrix exponential by scaling and squaring with a diagonal Pade(6,6) approximant.
///
/// The argument is scaled by 2^-s until its 1-norm is at most 1/2, where the
/// (6,6) approximant's truncation error is below double precision.
template <typename Derived>
PlainMatrix<Derived> expm(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    using M = PlainMatrix<Derived>;
    using std::ceil;
    using std::log2;
    using std::max;

    const Eigen::Index n = a.rows();
    const Scalar norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > Scalar(0.5)) squarings = static_cast<int>(ceil(log2(norm / Scalar(0.5))));
    const M scaled = a / std::ldexp(Scalar(1), squarings);

    // c_k = c_{k-1} (q - k + 1) / (k (2q - k + 1)), q = 6
    constexpr int q = 6;
    M power = M::Identity(n, n);
    M numer = M::Identity(n, n);
    M denom = M::Identity(n, n);
    Scalar coeff(1);
    for (int k = 1; k <= q; ++k) {
        coeff *= Scalar(q - k + 1) / Scalar(k * (2 * q - k + 1));
        power = power * scaled;
        numer += coeff * power;
        denom += (k % 2 == 0 ? coeff : -coeff) * power;
    }
    M result = denom.partialPivLu().solve(numer);
    for (int k = 0; k < squarings; ++k) result = result * result;
    return result;
}

/// Eigenvalues of a real square matrix.
template <typename Derived>
Eigen::Matrix<std::complex<typename Derived::Scalar>, Eigen::Dynamic, 1> eigenvalues(
    const Eigen::MatrixBase<Derived>& a) {
    using Real = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::EigenSolver<Real> solver(Real(a), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalue solver did not converge");
    return solver.eigenvalues();
}

/// max Re(lambda) over the spectrum.
template <typename Derived>
typename Derived::Scalar spectral_abscissa(const Eigen::MatrixBase<Derived>& a) {
    return eigenvalues(a).real().maxCoeff();
}

}  // namespace pdmp
