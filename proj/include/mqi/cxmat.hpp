#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mqi/errors.hpp"

namespace mqi {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;

/// Default relative tolerance for rank decisions and residual verdicts.
inline constexpr double kTol = 1e-9;
/// Inversions reject inputs whose condition estimate exceeds this.
inline constexpr double kConditionGuard = 1e12;
/// Eigenvalues closer than this (relative) are treated as one cluster.
inline constexpr double kClusterTol = 1e-6;

inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

inline CMatrix diag(const std::vector<Complex>& entries) {
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                              static_cast<Eigen::Index>(entries.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = entries[static_cast<size_t>(i)];
    return m;
}

inline double frobenius(const CMatrix& m) { return m.norm(); }

inline bool all_finite(const CMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    return true;
}

inline std::vector<double> singular_values(const CMatrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return {};
    Eigen::JacobiSVD<CMatrix> svd(m);
    std::vector<double> s(svd.singularValues().data(),
                          svd.singularValues().data() + svd.singularValues().size());
    return s;
}

struct InverseResult {
    CMatrix inverse;
    double condition = 0.0; ///< sigma_max / sigma_min estimate
};

/// Inverse with a singular-value based condition estimate. Rejects inputs with
/// sigma_min <= tol * sigma_max or condition above kConditionGuard.
inline InverseResult inverse(const CMatrix& m, double tol = kTol) {
    if (m.rows() != m.cols()) throw Error("inverse: matrix not square");
    const Eigen::Index n = m.rows();
    if (n == 0) return {CMatrix(0, 0), 1.0};
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(n - 1);
    if (smax <= 0.0 || smin <= tol * smax)
        throw SingularMatrix("inverse: smallest singular value below tolerance");
    const double condition = smax / smin;
    if (condition > kConditionGuard)
        throw SingularMatrix("inverse: condition estimate exceeds guard");
    CVector sinv(n);
    for (Eigen::Index i = 0; i < n; ++i) sinv(i) = Complex(1.0 / s(i), 0.0);
    CMatrix inv = svd.matrixV() * sinv.asDiagonal() * svd.matrixU().adjoint();
    return {std::move(inv), condition};
}

/// Shorthand used internally where only the matrix is wanted.
inline CMatrix inv(const CMatrix& m, double tol = kTol) { return inverse(m, tol).inverse; }

struct RankKernel {
    Eigen::Index rank = 0;
    std::vector<CVector> kernel_basis; ///< orthonormal, size cols - rank
};

/// Rank and orthonormal kernel basis via a singular-value threshold tol * sigma_max.
inline RankKernel rank_kernel(const CMatrix& m, double tol = kTol) {
    RankKernel out;
    if (m.rows() == 0 || m.cols() == 0) {
        out.rank = 0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            CVector e = CVector::Zero(m.cols());
            e(j) = 1.0;
            out.kernel_basis.push_back(std::move(e));
        }
        return out;
    }
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * smax) ++rank;
    if (smax == 0.0) rank = 0;
    out.rank = rank;
    for (Eigen::Index j = rank; j < m.cols(); ++j) out.kernel_basis.push_back(svd.matrixV().col(j));
    return out;
}

/// Orthonormal basis of the kernel, packed as columns (cols x nullity).
inline CMatrix kernel_basis_matrix(const CMatrix& m, double tol = kTol) {
    RankKernel rk = rank_kernel(m, tol);
    CMatrix b(m.cols(), static_cast<Eigen::Index>(rk.kernel_basis.size()));
    for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) = rk.kernel_basis[static_cast<size_t>(j)];
    return b;
}

/// Orthonormal basis of the column space, packed as columns (rows x rank).
inline CMatrix range_basis_matrix(const CMatrix& m, double tol = kTol) {
    if (m.rows() == 0 || m.cols() == 0) return CMatrix(m.rows(), 0);
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (smax > 0.0 && s(i) > tol * smax) ++rank;
    return svd.matrixU().leftCols(rank);
}

/// Coefficients c_1,...,c_n of det(tI - m) = t^n + c_1 t^{n-1} + ... + c_n,
/// computed by the Faddeev-LeVerrier recurrence.
inline std::vector<Complex> char_poly(const CMatrix& m) {
    if (m.rows() != m.cols()) throw Error("char_poly: matrix not square");
    const Eigen::Index n = m.rows();
    std::vector<Complex> c(static_cast<size_t>(n));
    CMatrix mk = identity(n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        CMatrix am = m * mk;
        c[static_cast<size_t>(k - 1)] = -am.trace() / static_cast<double>(k);
        if (k < n) {
            mk = std::move(am);
            mk.diagonal().array() += c[static_cast<size_t>(k - 1)];
        }
    }
    return c;
}

/// Orthonormal basis (columns) of ker (m - tau I)^n, the generalized eigenspace at tau.
inline CMatrix generalized_eigenspace(const CMatrix& m, Complex tau, double tol = kTol) {
    if (m.rows() != m.cols()) throw Error("generalized_eigenspace: matrix not square");
    const Eigen::Index n = m.rows();
    CMatrix b = m;
    b.diagonal().array() -= tau;
    const double scale = frobenius(b);
    if (scale == 0.0) return identity(n);
    b /= scale; // kernel of the power is scale invariant
    CMatrix p = b;
    for (Eigen::Index k = 1; k < n; ++k) p = p * b;
    return kernel_basis_matrix(p, tol);
}

inline std::vector<Complex> eigenvalues(const CMatrix& m) {
    if (m.rows() != m.cols()) throw Error("eigenvalues: matrix not square");
    if (m.rows() == 0) return {};
    Eigen::ComplexEigenSolver<CMatrix> es(m, /*computeEigenvectors=*/false);
    std::vector<Complex> vals(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
    std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return vals;
}

struct EigenvalueCluster {
    Complex representative; ///< mean of the cluster
    int multiplicity = 0;
};

/// Groups eigenvalues lying within rel_tol relative distance of each other.
inline std::vector<EigenvalueCluster> cluster_eigenvalues(std::vector<Complex> vals,
                                                          double rel_tol = kClusterTol) {
    std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<EigenvalueCluster> clusters;
    std::vector<bool> used(vals.size(), false);
    for (size_t i = 0; i < vals.size(); ++i) {
        if (used[i]) continue;
        Complex sum = vals[i];
        int count = 1;
        used[i] = true;
        bool grew = true;
        std::vector<size_t> members{i};
        while (grew) {
            grew = false;
            for (size_t j = 0; j < vals.size(); ++j) {
                if (used[j]) continue;
                for (size_t k : members) {
                    double s = std::max({1.0, std::abs(vals[j]), std::abs(vals[k])});
                    if (std::abs(vals[j] - vals[k]) <= rel_tol * s) {
                        used[j] = true;
                        members.push_back(j);
                        sum += vals[j];
                        ++count;
                        grew = true;
                        break;
                    }
                }
            }
        }
        clusters.push_back({sum / static_cast<double>(count), count});
    }
    return clusters;
}

/// Frobenius norm of the component of span(m) outside the orthonormal basis.
inline double subspace_leakage(const CMatrix& vectors, const CMatrix& basis) {
    if (vectors.cols() == 0) return 0.0;
    CMatrix residual = vectors - basis * (basis.adjoint() * vectors);
    return residual.norm();
}

} // namespace mqi
