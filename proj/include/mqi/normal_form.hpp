#pragma once

#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "mqi/cxmat.hpp"
#include "mqi/errors.hpp"
#include "mqi/quiver.hpp"
#include "mqi/rng.hpp"

namespace mqi {

enum class BorelVariant {
    B, ///< upper triangular, determinant one
    B1 ///< upper triangular, leading diagonal entry one
};

/// Upper-triangular group element, either in the Borel of SL(n,C) or in the
/// leading-entry-one Borel B1 of GL(n,C).
struct BorelElement {
    CMatrix m;
    BorelVariant variant = BorelVariant::B1;

    Eigen::Index size() const { return m.rows(); }

    void validate(double tol = 1e-12) const {
        if (m.rows() != m.cols()) throw NotBorel("borel element must be square");
        const double scale = std::max(1.0, frobenius(m));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < i; ++j)
                if (std::abs(m(i, j)) > tol * scale)
                    throw NotUnitriangularLeading("entry below the diagonal is not zero");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, i)) <= tol * scale)
                throw ZeroDiagonal("diagonal entry vanishes");
        if (variant == BorelVariant::B) {
            const Complex d = m.determinant();
            if (std::abs(d - 1.0) > 1e-10 * std::max(1.0, std::abs(d)))
                throw NotBorel("determinant differs from one");
        } else {
            if (std::abs(m(0, 0) - 1.0) > 1e-10)
                throw NotUnitriangularLeading("leading diagonal entry differs from one");
        }
    }
};

namespace detail {

inline CMatrix standard_beta(int k) {
    // k x (k+1), zero first column then the identity.
    CMatrix b = CMatrix::Zero(k, k + 1);
    b.block(0, 1, k, k) = identity(k);
    return b;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Reconstruction: standard-form solutions from a Borel element
// ---------------------------------------------------------------------------

/// Rebuilds the unique standard-form solution with endomorphism Y at the top:
/// every beta is (0 I), the top alpha is columns 2..n of Y - 1, each scalar is
/// read off the appropriate diagonal entry, and the recursion continues on the
/// rescaled lower-right block.
inline std::pair<Quiver, ScalarChain> reconstruct_from_borel(const BorelElement& y,
                                                             double tol = kTol) {
    if (y.variant != BorelVariant::B1)
        throw NotUnitriangularLeading("reconstruction expects a B1 element");
    y.validate(std::min(tol, 1e-10));
    const int n = static_cast<int>(y.size());

    Quiver out;
    out.dims = DimensionVector::full_flag(n);
    out.alphas.assign(static_cast<size_t>(n - 1), CMatrix());
    out.betas.assign(static_cast<size_t>(n - 1), CMatrix());
    ScalarChain chain;
    chain.q.assign(static_cast<size_t>(n - 1), Complex(0, 0));

    CMatrix block = y.m;
    for (int k = n; k >= 2; --k) {
        CMatrix alpha = block.rightCols(k - 1);
        alpha.diagonal(-1).array() -= 1.0; // subtract the identity shifted into view
        out.alphas[static_cast<size_t>(k - 2)] = alpha;
        out.betas[static_cast<size_t>(k - 2)] = detail::standard_beta(k - 1);
        const Complex q = block(1, 1);
        if (std::abs(q) <= tol) throw ZeroDiagonal("recursion produced a vanishing scalar");
        chain.q[static_cast<size_t>(k - 2)] = q;
        block = (block.bottomRightCorner(k - 1, k - 1) / q).eval();
    }
    return {std::move(out), std::move(chain)};
}

// ---------------------------------------------------------------------------
// Reduction to standard form
// ---------------------------------------------------------------------------

struct ReduceResult {
    GaugeElement gauge;
    Quiver reduced;
};

/// Gauges a surjective full-flag solution so that every beta becomes exactly
/// (0 I).  The pass walks up the flag: with the node-k factor fixed, the next
/// factor is assembled from the rows of g_k beta_k plus one completing row in
/// the kernel direction, rescaled to restore determinant one (the standard
/// pattern never sees that row, so the rescaling is invisible downstream).
inline ReduceResult reduce_to_standard(const Quiver& q, double tol = kTol) {
    q.check_shapes();
    if (!q.dims.is_full_flag()) throw InvalidQuiver("reduction requires a full flag");
    const int n = q.top_dim();

    GaugeElement gauge;
    gauge.factors.push_back(identity(1));
    gauge.modes.push_back(GaugeMode::SpecialLinear);
    for (int j = 0; j < n - 1; ++j) {
        const CMatrix bt = gauge.factors.back() * q.betas[static_cast<size_t>(j)];
        RankKernel rk = rank_kernel(bt, tol);
        if (rk.rank != j + 1)
            throw NotSurjective("beta_" + std::to_string(j + 1) + " is not surjective");
        CMatrix g(j + 2, j + 2);
        g.row(0) = rk.kernel_basis.front().adjoint();
        g.bottomRows(j + 1) = bt;
        const Complex d = g.determinant();
        if (std::abs(d) < 1e-300) throw DeterminantFixupFailed("completion row is degenerate");
        g.row(0) /= d; // det is linear in the first row
        gauge.factors.push_back(std::move(g));
        gauge.modes.push_back(GaugeMode::SpecialLinear);
    }

    Quiver reduced = q;
    std::vector<CMatrix> inverses;
    inverses.reserve(gauge.factors.size());
    for (const CMatrix& f : gauge.factors) inverses.push_back(inv(f));
    for (int j = 0; j < n - 1; ++j) {
        reduced.alphas[static_cast<size_t>(j)] = gauge.factors[static_cast<size_t>(j + 1)] *
                                                 q.alphas[static_cast<size_t>(j)] *
                                                 inverses[static_cast<size_t>(j)];
        reduced.betas[static_cast<size_t>(j)] = detail::standard_beta(j + 1);
    }
    return {std::move(gauge), std::move(reduced)};
}

// ---------------------------------------------------------------------------
// The degree-n cover B -> B1 and its lifts
// ---------------------------------------------------------------------------

/// Divides a Borel element by its leading diagonal entry.  The result lands in
/// B1, and z_1^n det(result) recovers one.
inline BorelElement cover_rho(const BorelElement& b) {
    if (b.variant != BorelVariant::B) throw NotBorel("cover expects an element of B");
    b.validate();
    const Complex z1 = b.m(0, 0);
    if (std::abs(z1) == 0.0) throw ZeroDiagonal("leading diagonal entry vanishes");
    BorelElement image{b.m / z1, BorelVariant::B1};
    const int n = static_cast<int>(b.size());
    const Complex check = std::pow(z1, n) * image.m.determinant();
    if (std::abs(check - 1.0) > 1e-10)
        throw NotBorel("z1^n det(image) differs from one");
    return image;
}

/// All n lifts z_1 Y of a B1 element through the cover, one per n-th root of
/// det(Y)^{-1}.  Roots are enumerated counterclockwise from the principal one.
inline std::vector<BorelElement> cover_lifts(const BorelElement& y) {
    if (y.variant != BorelVariant::B1) throw NotBorel("lifts expect an element of B1");
    y.validate();
    const int n = static_cast<int>(y.size());
    const Complex det = y.m.determinant();
    if (std::abs(det) == 0.0) throw ZeroDiagonal("determinant vanishes");
    const Complex target = 1.0 / det;
    const double r = std::pow(std::abs(target), 1.0 / n);
    const double phase = std::arg(target) / n;
    std::vector<BorelElement> lifts;
    lifts.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const Complex z1 = std::polar(r, phase + 2.0 * std::numbers::pi * k / n);
        lifts.push_back({z1 * y.m, BorelVariant::B});
    }
    return lifts;
}

/// Solves q_{i+1} = q~_{i+1} / q~_i subject to q~_0 ... q~_{r-1} = 1.  The r
/// solutions differ by r-th roots of unity; root_index picks one,
/// counterclockwise from the principal choice.
inline ScalarChain tilde_scalars(const ScalarChain& s, int root_index) {
    s.validate();
    const int r = static_cast<int>(s.q.size()) + 1;
    if (root_index < 0 || root_index >= r)
        throw InvalidRootIndex("root index must lie in [0, r)");
    std::vector<Complex> partial(static_cast<size_t>(r));
    partial[0] = 1.0;
    for (int i = 1; i < r; ++i) partial[static_cast<size_t>(i)] =
        partial[static_cast<size_t>(i - 1)] * s.q[static_cast<size_t>(i - 1)];
    Complex prod = 1.0;
    for (const Complex& p : partial) prod *= p;
    // principal r-th root of prod^{-1}
    const double mag = std::pow(std::abs(prod), -1.0 / r);
    const double phase = -std::arg(prod) / r;
    const Complex base =
        std::polar(mag, phase + 2.0 * std::numbers::pi * root_index / r);
    ScalarChain out = s;
    std::vector<Complex> lifted(static_cast<size_t>(r));
    for (int i = 0; i < r; ++i) lifted[static_cast<size_t>(i)] = base * partial[static_cast<size_t>(i)];
    // q~_{r-1}^r equals the determinant implied by the diagonal list.
    Complex implied_det = 1.0;
    for (int i = 0; i < r; ++i) implied_det *= partial[static_cast<size_t>(r - 1)] / partial[static_cast<size_t>(i)];
    const Complex top_power = std::pow(lifted[static_cast<size_t>(r - 1)], r);
    if (std::abs(top_power - implied_det) >
        1e-10 * std::max(1.0, std::abs(implied_det)))
        throw Error("lifted chain failed the determinant identity");
    out.lifted = std::move(lifted);
    return out;
}

// ---------------------------------------------------------------------------
// Random solutions
// ---------------------------------------------------------------------------

/// Random standard-form solution: draws an upper-triangular B1 element with
/// entries bounded by `bound` (diagonal moduli kept in [1/2, bound]) and
/// reconstructs.  Deterministic for a given seed.
inline std::pair<Quiver, ScalarChain> gen_random(const DimensionVector& dims, std::uint64_t seed,
                                                 double bound = 10.0) {
    dims.validate();
    if (!dims.is_full_flag()) throw InvalidQuiver("gen_random requires a full flag");
    const int n = dims.top();
    Rng rng(seed);
    CMatrix y = CMatrix::Zero(n, n);
    y(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) y(i, i) = rng.complex_ring(0.5, bound);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) y(i, j) = rng.complex_box(bound);
    return reconstruct_from_borel({std::move(y), BorelVariant::B1});
}

} // namespace mqi
