#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "mqi/cxmat.hpp"

namespace mqi {

/// Deterministic random source. All draws go through explicit helpers so a
/// given seed reproduces the same stream on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Complex complex_box(double bound) { return {uniform(-bound, bound), uniform(-bound, bound)}; }

    Complex complex_normal() { return {normal(), normal()}; }

    /// Nonzero complex number with modulus in [lo, hi] and uniform phase.
    Complex complex_ring(double lo, double hi) {
        const double r = uniform(lo, hi);
        const double phi = uniform(0.0, 2.0 * std::numbers::pi);
        return std::polar(r, phi);
    }

  private:
    std::mt19937_64 engine_;
};

inline CMatrix random_complex_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double bound) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.complex_box(bound);
    return m;
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix.
inline CMatrix random_unitary(Rng& rng, Eigen::Index n) {
    CMatrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex d = r(i, i);
        q.col(i) *= (std::abs(d) == 0.0) ? Complex(1, 0) : d / std::abs(d);
    }
    return q;
}

/// Random invertible matrix with singular values in [smin, smax], so the
/// condition number is bounded by smax/smin.
inline CMatrix random_well_conditioned(Rng& rng, Eigen::Index n, double smin = 0.5,
                                       double smax = 2.0) {
    CMatrix u = random_unitary(rng, n);
    CMatrix v = random_unitary(rng, n);
    CVector s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = Complex(rng.uniform(smin, smax), 0.0);
    return u * s.asDiagonal() * v.adjoint();
}

/// As above but rescaled to determinant one. Scaling by a unit-free scalar
/// leaves the condition number unchanged.
inline CMatrix random_special_linear(Rng& rng, Eigen::Index n, double smin = 0.5,
                                     double smax = 2.0) {
    CMatrix m = random_well_conditioned(rng, n, smin, smax);
    const Complex d = m.determinant();
    const double r = std::pow(std::abs(d), -1.0 / static_cast<double>(n));
    const double phi = -std::arg(d) / static_cast<double>(n);
    return std::polar(r, phi) * m;
}

/// Upper unitriangular with entries bounded by `bound`.
inline CMatrix random_unitriangular(Rng& rng, Eigen::Index n, double bound) {
    CMatrix m = identity(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) m(i, j) = rng.complex_box(bound);
    return m;
}

inline CMatrix random_su2(Rng& rng) {
    Complex a = rng.complex_normal();
    Complex b = rng.complex_normal();
    double norm = std::sqrt(std::norm(a) + std::norm(b));
    while (norm < 1e-8) {
        a = rng.complex_normal();
        b = rng.complex_normal();
        norm = std::sqrt(std::norm(a) + std::norm(b));
    }
    a /= norm;
    b /= norm;
    CMatrix m(2, 2);
    m << a, b, -std::conj(b), std::conj(a);
    return m;
}

} // namespace mqi
