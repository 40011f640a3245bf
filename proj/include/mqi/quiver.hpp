#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mqi/cxmat.hpp"
#include "mqi/errors.hpp"

namespace mqi {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Dimension vector n_1 < n_2 < ... < n_r of a flag quiver.
struct DimensionVector {
    std::vector<int> dims;

    int node_count() const { return static_cast<int>(dims.size()); }
    int level_count() const { return node_count() - 1; }
    int top() const { return dims.back(); }

    bool is_full_flag() const {
        for (size_t i = 0; i < dims.size(); ++i)
            if (dims[i] != static_cast<int>(i) + 1) return false;
        return !dims.empty();
    }

    static DimensionVector full_flag(int n) {
        DimensionVector d;
        for (int i = 1; i <= n; ++i) d.dims.push_back(i);
        return d;
    }

    void validate() const {
        if (dims.empty()) throw InvalidQuiver("dims empty");
        if (dims.front() <= 0) throw InvalidQuiver("dims must be positive");
        for (size_t i = 1; i < dims.size(); ++i)
            if (dims[i] <= dims[i - 1]) throw InvalidQuiver("dims not strictly increasing");
    }
};

/// Alternating chain of maps alpha_k : C^{n_k} -> C^{n_{k+1}} (stored as
/// dims[k+1] x dims[k]) and beta_k back.  Level index k runs 0..r-2.
struct Quiver {
    DimensionVector dims;
    std::vector<CMatrix> alphas;
    std::vector<CMatrix> betas;

    int level_count() const { return dims.level_count(); }
    int top_dim() const { return dims.top(); }

    void check_shapes() const {
        dims.validate();
        const size_t levels = static_cast<size_t>(dims.level_count());
        if (alphas.size() != levels || betas.size() != levels)
            throw InvalidQuiver("alpha/beta count does not match dims");
        for (size_t k = 0; k < levels; ++k) {
            if (alphas[k].rows() != dims.dims[k + 1] || alphas[k].cols() != dims.dims[k])
                throw InvalidQuiver("alpha_" + std::to_string(k + 1) + " has wrong shape");
            if (betas[k].rows() != dims.dims[k] || betas[k].cols() != dims.dims[k + 1])
                throw InvalidQuiver("beta_" + std::to_string(k + 1) + " has wrong shape");
            if (!all_finite(alphas[k]) || !all_finite(betas[k]))
                throw InvalidQuiver("non-finite entry at level " + std::to_string(k + 1));
        }
    }
};

/// The scalars q_1,...,q_{r-1} of the multiplicative equations, optionally
/// with a lift q~_0,...,q~_{r-1} normalised to product one.
struct ScalarChain {
    std::vector<Complex> q;
    std::optional<std::vector<Complex>> lifted;

    void validate(double tol = kTol) const {
        for (const Complex& v : q)
            if (std::abs(v) == 0.0) throw InvalidScalars("scalar chain contains zero");
        if (!lifted) return;
        if (lifted->size() != q.size() + 1)
            throw ChainLengthMismatch("lifted chain must have one more entry than q");
        Complex prod = 1.0;
        for (const Complex& v : *lifted) prod *= v;
        if (std::abs(prod - 1.0) > tol * 10.0)
            throw InvalidScalars("lifted chain product differs from one");
        for (size_t i = 0; i + 1 < lifted->size(); ++i) {
            const Complex ratio = (*lifted)[i + 1] / (*lifted)[i];
            if (std::abs(ratio - q[i]) > tol * std::max(1.0, std::abs(q[i])))
                throw InvalidScalars("lifted chain ratios disagree with q");
        }
    }
};

enum class GaugeMode { SpecialLinear, GeneralLinear };

/// One invertible factor per node; special-linear factors carry det = 1.
struct GaugeElement {
    std::vector<CMatrix> factors;
    std::vector<GaugeMode> modes;

    static GaugeElement identity_for(const DimensionVector& d) {
        GaugeElement g;
        for (int n : d.dims) {
            g.factors.push_back(identity(n));
            g.modes.push_back(GaugeMode::SpecialLinear);
        }
        return g;
    }

    void validate(double tol = kTol) const {
        if (factors.size() != modes.size()) throw Error("gauge: factor/mode count mismatch");
        for (size_t i = 0; i < factors.size(); ++i) {
            if (factors[i].rows() != factors[i].cols())
                throw Error("gauge: factor not square");
            if (modes[i] == GaugeMode::SpecialLinear) {
                const Complex d = factors[i].determinant();
                if (std::abs(d - 1.0) > 1e3 * tol * std::max(1.0, std::abs(d)))
                    throw InvalidQuiver("gauge: special-linear factor has det != 1");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Multiplicative moment-map equations
// ---------------------------------------------------------------------------

namespace detail {

/// Endomorphism 1 + alpha_{k-1} beta_{k-1} on node k. Node 0 is preceded by a
/// zero-dimensional node, so its incoming endomorphism is the identity.
inline CMatrix incoming(const Quiver& q, int node) {
    if (node == 0) return identity(q.dims.dims[0]);
    return identity(q.dims.dims[node]) + q.alphas[node - 1] * q.betas[node - 1];
}

/// Endomorphism 1 + beta_k alpha_k on node k (valid for k < r-1).
inline CMatrix outgoing(const Quiver& q, int node) {
    return identity(q.dims.dims[node]) + q.betas[node] * q.alphas[node];
}

} // namespace detail

/// Residual matrices R_k = (1 + beta_{k+1} alpha_{k+1}) - q_{k+1} (1 + alpha_k beta_k)
/// of the multiplicative equations, one per level.  The first equation reads
/// (1 + beta_1 alpha_1) - q_1 I on the bottom node.
inline std::vector<CMatrix> residuals(const Quiver& q, const ScalarChain& s) {
    const int levels = q.level_count();
    if (static_cast<int>(s.q.size()) != levels)
        throw ChainLengthMismatch("scalar chain length does not match quiver levels");
    std::vector<CMatrix> out;
    out.reserve(static_cast<size_t>(levels));
    for (int k = 0; k < levels; ++k)
        out.push_back(detail::outgoing(q, k) - s.q[static_cast<size_t>(k)] * detail::incoming(q, k));
    return out;
}

/// Worst relative residual over all levels; the per-level scale is
/// max(1, |1 + beta alpha|, |q| |1 + alpha beta|) in Frobenius norm.
inline double residual_norm(const Quiver& q, const ScalarChain& s) {
    const int levels = q.level_count();
    if (static_cast<int>(s.q.size()) != levels)
        throw ChainLengthMismatch("scalar chain length does not match quiver levels");
    double worst = 0.0;
    for (int k = 0; k < levels; ++k) {
        const CMatrix lhs = detail::outgoing(q, k);
        const CMatrix rhs = s.q[static_cast<size_t>(k)] * detail::incoming(q, k);
        const double scale = std::max({1.0, frobenius(lhs), frobenius(rhs)});
        worst = std::max(worst, frobenius(lhs - rhs) / scale);
    }
    return worst;
}

/// Reads the scalars off a solution, one level at a time:
/// q_k = tr((1 + beta_k alpha_k)(1 + alpha_{k-1} beta_{k-1})^{-1}) / n_k.
/// Throws NotASolution when the resulting residuals exceed the tolerance.
inline ScalarChain infer_scalars(const Quiver& q, double tol = kTol) {
    ScalarChain s;
    const int levels = q.level_count();
    for (int k = 0; k < levels; ++k) {
        const CMatrix lhs = detail::outgoing(q, k);
        Complex qk;
        if (k == 0) {
            qk = lhs.trace() / static_cast<double>(q.dims.dims[0]);
        } else {
            const CMatrix m = detail::incoming(q, k);
            qk = (lhs * inv(m)).trace() / static_cast<double>(q.dims.dims[k]);
        }
        s.q.push_back(qk);
    }
    if (residual_norm(q, s) > tol)
        throw NotASolution("inferred scalars leave residuals above tolerance");
    return s;
}

/// Gauge action alpha_k -> g_{k+1} alpha_k g_k^{-1}, beta_k -> g_k beta_k g_{k+1}^{-1}.
/// The optional left factor acts at the top node only:
/// alpha_{r-1} -> L alpha_{r-1}, beta_{r-1} -> beta_{r-1} L^{-1}.
inline Quiver act_gauge(const Quiver& q, const GaugeElement& g, const CMatrix* left = nullptr) {
    if (g.factors.size() != q.dims.dims.size())
        throw Error("act_gauge: gauge has wrong number of factors");
    for (size_t i = 0; i < g.factors.size(); ++i)
        if (g.factors[i].rows() != q.dims.dims[i])
            throw Error("act_gauge: gauge factor size mismatch at node " + std::to_string(i + 1));
    std::vector<CMatrix> inverses;
    inverses.reserve(g.factors.size());
    for (const CMatrix& f : g.factors) inverses.push_back(inv(f));
    Quiver out = q;
    const int levels = q.level_count();
    for (int k = 0; k < levels; ++k) {
        out.alphas[static_cast<size_t>(k)] =
            g.factors[static_cast<size_t>(k + 1)] * q.alphas[static_cast<size_t>(k)] *
            inverses[static_cast<size_t>(k)];
        out.betas[static_cast<size_t>(k)] =
            g.factors[static_cast<size_t>(k)] * q.betas[static_cast<size_t>(k)] *
            inverses[static_cast<size_t>(k + 1)];
    }
    if (left != nullptr && levels > 0) {
        const CMatrix linv = inv(*left);
        out.alphas.back() = (*left) * out.alphas.back();
        out.betas.back() = out.betas.back() * linv;
    }
    return out;
}

/// Group-valued moment map of a length-one quiver: (1 + beta alpha, (1 + alpha beta)^{-1}).
inline std::pair<CMatrix, CMatrix> vdb_moment_map(const CMatrix& alpha, const CMatrix& beta,
                                                  double tol = kTol) {
    const CMatrix lhs = identity(alpha.cols()) + beta * alpha;
    const CMatrix rhs = identity(alpha.rows()) + alpha * beta;
    return {lhs, inv(rhs, tol)};
}

/// Y = 1 + alpha_{r-1} beta_{r-1}, the endomorphism at the top node.
inline CMatrix endo_Y(const Quiver& q) {
    if (q.level_count() == 0) return identity(q.top_dim());
    return identity(q.top_dim()) + q.alphas.back() * q.betas.back();
}

struct AdditiveResiduals {
    std::vector<Complex> lambdas;
    double residual = 0.0; ///< worst relative deviation from a scalar matrix
};

/// Additive moment-map diagnostics: infers lambda_k = tr(beta_k alpha_k -
/// alpha_{k-1} beta_{k-1}) / n_k and measures how far each difference is from
/// lambda_k I.  Solutions with all q = 1 vanish here with all lambda = 0.
inline AdditiveResiduals additive_residuals(const Quiver& q) {
    AdditiveResiduals out;
    const int levels = q.level_count();
    for (int k = 0; k < levels; ++k) {
        const CMatrix d = detail::outgoing(q, k) - detail::incoming(q, k);
        const Complex lambda = d.trace() / static_cast<double>(q.dims.dims[k]);
        CMatrix off = d;
        off.diagonal().array() -= lambda;
        out.lambdas.push_back(lambda);
        out.residual = std::max(out.residual, frobenius(off) / std::max(1.0, frobenius(d)));
    }
    return out;
}

struct LevelStability {
    bool alpha_injective = false;
    bool beta_surjective = false;
};

struct StabilityReport {
    std::vector<LevelStability> levels;
    bool free_action = true;          ///< each level has at least one property
    bool stable_for_h = false;        ///< all alpha injective, or all beta surjective
    bool stable_for_full_group = true; ///< both properties at every level
};

inline StabilityReport stability_report(const Quiver& q, double tol = kTol) {
    StabilityReport r;
    bool all_alpha = true;
    bool all_beta = true;
    for (int k = 0; k < q.level_count(); ++k) {
        LevelStability ls;
        ls.alpha_injective =
            rank_kernel(q.alphas[static_cast<size_t>(k)], tol).rank == q.dims.dims[k];
        ls.beta_surjective =
            rank_kernel(q.betas[static_cast<size_t>(k)], tol).rank == q.dims.dims[k];
        r.free_action = r.free_action && (ls.alpha_injective || ls.beta_surjective);
        r.stable_for_full_group =
            r.stable_for_full_group && ls.alpha_injective && ls.beta_surjective;
        all_alpha = all_alpha && ls.alpha_injective;
        all_beta = all_beta && ls.beta_surjective;
        r.levels.push_back(ls);
    }
    r.stable_for_h = all_alpha || all_beta;
    return r;
}

/// Relative norm of (Y-1)(Y-q_{r-1})(Y-q_{r-1}q_{r-2})...(Y-q_{r-1}...q_1),
/// the minimal-polynomial identity satisfied by any solution.
inline double minpoly_residual(const Quiver& q, const ScalarChain& s) {
    const int levels = q.level_count();
    if (static_cast<int>(s.q.size()) != levels)
        throw ChainLengthMismatch("scalar chain length does not match quiver levels");
    const CMatrix y = endo_Y(q);
    const Eigen::Index n = y.rows();
    CMatrix p = identity(n);
    double denom = 1.0;
    Complex partial = 1.0;
    for (int j = 0; j <= levels; ++j) {
        if (j > 0) partial *= s.q[static_cast<size_t>(levels - j)];
        CMatrix factor = y;
        factor.diagonal().array() -= partial;
        denom *= frobenius(factor);
        p = p * factor;
    }
    const double num = frobenius(p);
    if (num == 0.0) return 0.0;
    return num / std::max(denom, 1e-300);
}

/// Worst relative residual of the recursion
/// X_k X = (q_{r-1}...q_{r-k} - 1) X_k + q_{r-1}...q_{r-k} X_{k+1},
/// where X_k = alpha_{r-1}...alpha_{r-k} beta_{r-k}...beta_{r-1} and X_r = 0.
inline double xk_recursion_residual(const Quiver& q, const ScalarChain& s) {
    const int levels = q.level_count();
    if (static_cast<int>(s.q.size()) != levels)
        throw ChainLengthMismatch("scalar chain length does not match quiver levels");
    if (levels == 0) return 0.0;
    const Eigen::Index n = q.top_dim();
    // xs[k] = X_{k+1} for k = 0..levels-1, then X_{levels+1} = 0.
    std::vector<CMatrix> xs;
    CMatrix afwd = q.alphas.back();
    CMatrix bfwd = q.betas.back();
    xs.push_back(afwd * bfwd);
    for (int k = 2; k <= levels; ++k) {
        afwd = afwd * q.alphas[static_cast<size_t>(levels - k)];
        bfwd = q.betas[static_cast<size_t>(levels - k)] * bfwd;
        xs.push_back(afwd * bfwd);
    }
    xs.push_back(CMatrix::Zero(n, n));
    const CMatrix& x = xs.front();
    double worst = 0.0;
    Complex qprod = 1.0;
    for (int k = 1; k <= levels; ++k) {
        qprod *= s.q[static_cast<size_t>(levels - k)];
        const CMatrix lhs = xs[static_cast<size_t>(k - 1)] * x;
        const CMatrix rhs =
            (qprod - 1.0) * xs[static_cast<size_t>(k - 1)] + qprod * xs[static_cast<size_t>(k)];
        const double scale = std::max({1.0, frobenius(lhs), frobenius(rhs)});
        worst = std::max(worst, frobenius(lhs - rhs) / scale);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Generalized eigenspace decomposition into subquivers
// ---------------------------------------------------------------------------

struct SubquiverPart {
    std::vector<CMatrix> bases;             ///< per node, orthonormal columns
    std::vector<Eigen::Index> dims;         ///< per node
    std::vector<CMatrix> restricted_alphas; ///< maps in basis coordinates
    std::vector<CMatrix> restricted_betas;
};

struct LevelIsoCheck {
    bool applicable = false; ///< node-local parameter differs from 1
    bool dims_match = false;
    bool alpha_iso = false;
    bool beta_iso = false;
    double alpha_sigma_ratio = 0.0; ///< sigma_min / sigma_max of restricted alpha
    double beta_sigma_ratio = 0.0;
};

struct EigenspaceDecomposition {
    Complex tau;
    std::vector<Complex> node_params;
    SubquiverPart designated;
    SubquiverPart complement;
    double alpha_leakage = 0.0; ///< worst relative off-block leakage, designated part
    double beta_leakage = 0.0;
    double complement_leakage = 0.0;
    double kernel_match_residual = 0.0; ///< check ker(1+ab - t/q)^m = ker(1+ba - t)^m
    std::vector<LevelIsoCheck> level_isos;
};

/// Splits a solution along the generalized eigenspaces determined by a top-node
/// parameter tau.  Node k carries 1 + alpha_{k-1} beta_{k-1} at parameter
/// tau / (q_{k+1} ... q_{r-1}); the maps respect the split, and restrict to
/// isomorphisms on every level whose node-local parameter differs from 1.
inline EigenspaceDecomposition eigenspace_decompose(const Quiver& q, const ScalarChain& s,
                                                    Complex tau, double tol = kTol) {
    const int levels = q.level_count();
    if (static_cast<int>(s.q.size()) != levels)
        throw ChainLengthMismatch("scalar chain length does not match quiver levels");
    if (residual_norm(q, s) > std::max(tol, 1e-8))
        throw NotASolution("eigenspace_decompose requires a solution of the equations");

    EigenspaceDecomposition out;
    out.tau = tau;
    const int nodes = q.dims.node_count();
    out.node_params.assign(static_cast<size_t>(nodes), Complex(0, 0));
    out.node_params[static_cast<size_t>(nodes - 1)] = tau;
    for (int j = nodes - 2; j >= 0; --j)
        out.node_params[static_cast<size_t>(j)] =
            out.node_params[static_cast<size_t>(j + 1)] / s.q[static_cast<size_t>(j)];

    for (int j = 0; j < nodes; ++j) {
        const Eigen::Index nj = q.dims.dims[static_cast<size_t>(j)];
        CMatrix b = detail::incoming(q, j);
        b.diagonal().array() -= out.node_params[static_cast<size_t>(j)];
        const double scale = frobenius(b);
        CMatrix basis, comp;
        if (scale == 0.0) {
            basis = identity(nj);
            comp = CMatrix(nj, 0);
        } else {
            b /= scale;
            CMatrix p = b;
            for (Eigen::Index k = 1; k < nj; ++k) p = p * b;
            basis = kernel_basis_matrix(p, tol);
            comp = range_basis_matrix(p, tol);
        }
        out.designated.bases.push_back(basis);
        out.designated.dims.push_back(basis.cols());
        out.complement.bases.push_back(comp);
        out.complement.dims.push_back(comp.cols());
    }

    for (int k = 0; k < levels; ++k) {
        const CMatrix& a = q.alphas[static_cast<size_t>(k)];
        const CMatrix& b = q.betas[static_cast<size_t>(k)];
        const CMatrix& lo = out.designated.bases[static_cast<size_t>(k)];
        const CMatrix& hi = out.designated.bases[static_cast<size_t>(k + 1)];
        out.alpha_leakage = std::max(
            out.alpha_leakage, subspace_leakage(a * lo, hi) / std::max(1.0, frobenius(a)));
        out.beta_leakage = std::max(
            out.beta_leakage, subspace_leakage(b * hi, lo) / std::max(1.0, frobenius(b)));
        const CMatrix& clo = out.complement.bases[static_cast<size_t>(k)];
        const CMatrix& chi = out.complement.bases[static_cast<size_t>(k + 1)];
        out.complement_leakage =
            std::max({out.complement_leakage,
                      subspace_leakage(a * clo, chi) / std::max(1.0, frobenius(a)),
                      subspace_leakage(b * chi, clo) / std::max(1.0, frobenius(b))});
        out.designated.restricted_alphas.push_back(hi.adjoint() * a * lo);
        out.designated.restricted_betas.push_back(lo.adjoint() * b * hi);
        out.complement.restricted_alphas.push_back(chi.adjoint() * a * clo);
        out.complement.restricted_betas.push_back(clo.adjoint() * b * chi);

        // ker(1 + alpha_{k-1} beta_{k-1} - t_k)^m equals
        // ker(1 + beta_k alpha_k - t_{k+1})^m on node k.
        const CMatrix other = generalized_eigenspace(
            detail::outgoing(q, k), out.node_params[static_cast<size_t>(k + 1)], tol);
        double mismatch;
        if (other.cols() != lo.cols()) {
            mismatch = 1.0;
        } else {
            mismatch = std::max(subspace_leakage(lo, other), subspace_leakage(other, lo));
        }
        out.kernel_match_residual = std::max(out.kernel_match_residual, mismatch);

        LevelIsoCheck iso;
        const Complex local = out.node_params[static_cast<size_t>(k + 1)];
        iso.applicable = std::abs(local - 1.0) > kClusterTol * std::max(1.0, std::abs(local));
        iso.dims_match = lo.cols() == hi.cols();
        auto ratio = [](const CMatrix& m) {
            if (m.rows() == 0 || m.cols() == 0) return 1.0; // vacuously invertible
            const std::vector<double> sv = singular_values(m);
            return sv.front() == 0.0 ? 0.0 : sv.back() / sv.front();
        };
        iso.alpha_sigma_ratio = ratio(out.designated.restricted_alphas.back());
        iso.beta_sigma_ratio = ratio(out.designated.restricted_betas.back());
        iso.alpha_iso = iso.dims_match && iso.alpha_sigma_ratio > kClusterTol;
        iso.beta_iso = iso.dims_match && iso.beta_sigma_ratio > kClusterTol;
        out.level_isos.push_back(iso);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Toric solutions
// ---------------------------------------------------------------------------

/// Builds the sparse diagonal-pattern solution on a full flag: level k has
/// alpha with entries nu_1..nu_k on the diagonal above a zero row, beta with
/// mu_1..mu_k beside a zero column, and mu_e nu_e = q_k ... q_e - 1 (product
/// over chain indices e..k).  The default split takes nu = mu = principal
/// square root; `magnitudes` rebalances each pair as nu = g w, mu = w / g.
inline Quiver gen_toric(const DimensionVector& dims, const ScalarChain& s,
                        const std::vector<std::vector<double>>* magnitudes = nullptr,
                        double tol = kTol) {
    dims.validate();
    if (!dims.is_full_flag()) throw InvalidQuiver("gen_toric requires a full flag");
    const int n = dims.top();
    if (static_cast<int>(s.q.size()) != n - 1)
        throw ChainLengthMismatch("scalar chain length does not match flag");
    s.validate();
    Quiver out;
    out.dims = dims;
    for (int k = 1; k <= n - 1; ++k) {
        CMatrix alpha = CMatrix::Zero(k + 1, k);
        CMatrix beta = CMatrix::Zero(k, k + 1);
        for (int e = 1; e <= k; ++e) {
            Complex prod = 1.0;
            for (int m = e; m <= k; ++m) prod *= s.q[static_cast<size_t>(m - 1)];
            if (std::abs(prod) <= tol)
                throw InvalidScalars("scalar product vanishes; solution not invertible");
            const Complex w = std::sqrt(prod - 1.0);
            double g = 1.0;
            if (magnitudes != nullptr) {
                const auto& lvl = (*magnitudes)[static_cast<size_t>(k - 1)];
                g = lvl[static_cast<size_t>(e - 1)];
                if (!(g > 0.0) || !std::isfinite(g))
                    throw InvalidScalars("magnitude factors must be positive and finite");
            }
            alpha(e - 1, e - 1) = g * w;
            beta(e - 1, e - 1) = w / g;
        }
        out.alphas.push_back(std::move(alpha));
        out.betas.push_back(std::move(beta));
    }
    return out;
}

/// Membership in the multiplicative quiver space: every 1 + alpha beta and
/// 1 + beta alpha invertible at the guarded threshold.
inline bool is_in_mmult(const Quiver& q, double tol = kTol) {
    for (int k = 0; k < q.level_count(); ++k) {
        try {
            inverse(detail::outgoing(q, k), tol);
            inverse(identity(q.dims.dims[k + 1]) +
                        q.alphas[static_cast<size_t>(k)] * q.betas[static_cast<size_t>(k)],
                    tol);
        } catch (const SingularMatrix&) {
            return false;
        }
    }
    return true;
}

inline void validate_membership(const Quiver& q, double tol = kTol) {
    q.check_shapes();
    if (!is_in_mmult(q, tol))
        throw InvalidQuiver("1 + alpha beta or 1 + beta alpha not invertible");
}

} // namespace mqi
