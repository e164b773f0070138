#ifndef SPCE_BASIS_HPP
#define SPCE_BASIS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "spce/inputs.hpp"

namespace spce {

enum class PolyFamily { Legendre, Hermite };

inline PolyFamily poly_family_for(const Marginal& m) {
    return m.is_gaussian_type() ? PolyFamily::Hermite : PolyFamily::Legendre;
}

inline std::vector<PolyFamily> poly_families_for(const InputModel& input) {
    std::vector<PolyFamily> fams;
    fams.reserve(input.marginals.size());
    for (const auto& m : input.marginals) fams.push_back(poly_family_for(m));
    return fams;
}

/// Orthonormal univariate polynomial, evaluated by three-term recurrence.
///
/// Legendre: orthonormal under Uniform[-1,1], psi_k = sqrt(2k+1) P_k.
/// Hermite: probabilists' convention, orthonormal under the standard normal,
/// psi_k = He_k / sqrt(k!).
inline double univariate_eval(PolyFamily family, int degree, double u) {
    if (degree < 0) throw std::invalid_argument("univariate_eval: degree >= 0 required");
    if (family == PolyFamily::Legendre) {
        double pkm1 = 1.0, pk = u;
        if (degree == 0) return 1.0;
        for (int k = 1; k < degree; ++k) {
            double pkp1 = ((2.0 * k + 1.0) * u * pk - k * pkm1) / (k + 1.0);
            pkm1 = pk;
            pk = pkp1;
        }
        return std::sqrt(2.0 * degree + 1.0) * pk;
    }
    // He_{k+1} = u He_k - k He_{k-1}; normalize by sqrt(k!) incrementally.
    double hkm1 = 1.0, hk = u;
    if (degree == 0) return 1.0;
    double lognorm = 0.0;
    for (int k = 1; k < degree; ++k) {
        double hkp1 = u * hk - k * hkm1;
        hkm1 = hk;
        hk = hkp1;
    }
    for (int k = 2; k <= degree; ++k) lognorm += std::log(static_cast<double>(k));
    return hk * std::exp(-0.5 * lognorm);
}

/// Evaluations of psi_0..psi_pmax at u, filled by a single recurrence pass.
inline void univariate_eval_all(PolyFamily family, int pmax, double u, double* out) {
    out[0] = 1.0;
    if (pmax == 0) return;
    if (family == PolyFamily::Legendre) {
        double pkm1 = 1.0, pk = u;
        out[1] = std::sqrt(3.0) * u;
        for (int k = 1; k < pmax; ++k) {
            double pkp1 = ((2.0 * k + 1.0) * u * pk - k * pkm1) / (k + 1.0);
            pkm1 = pk;
            pk = pkp1;
            out[k + 1] = std::sqrt(2.0 * (k + 1.0) + 1.0) * pkp1;
        }
    } else {
        double hkm1 = 1.0, hk = u;
        out[1] = u;
        double lognorm = 0.0;
        for (int k = 1; k < pmax; ++k) {
            double hkp1 = u * hk - k * hkm1;
            hkm1 = hk;
            hk = hkp1;
            lognorm += std::log(k + 1.0);
            out[k + 1] = hkp1 * std::exp(-0.5 * lognorm);
        }
    }
}

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& alpha) {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
}

inline int interaction_order(const MultiIndex& alpha) {
    int s = 0;
    for (int a : alpha) s += (a != 0);
    return s;
}

/// Truncation parameters: max degree p, hyperbolic q-norm exponent, and
/// maximum interaction order r (unbounded by default).
struct TruncationSpec {
    int p{0};
    double q{1.0};
    int r{std::numeric_limits<int>::max()};

    TruncationSpec() = default;
    TruncationSpec(int p_, double q_ = 1.0, int r_ = std::numeric_limits<int>::max())
        : p(p_), q(q_), r(r_) {
        if (p < 0) throw std::invalid_argument("TruncationSpec: p >= 0 required");
        if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("TruncationSpec: q in (0,1] required");
        if (r < 1) throw std::invalid_argument("TruncationSpec: r >= 1 required");
    }
};

/// Truncated multi-index set in fixed graded-lexicographic order.
struct MultiIndexSet {
    int dim{0};
    std::vector<MultiIndex> indices;
    TruncationSpec spec;

    int size() const { return static_cast<int>(indices.size()); }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& a : indices) arr.push_back(a);
        return arr;
    }
};

namespace detail {

inline void enumerate_rec(int dim, int d, double qbudget, double q, int r, int p,
                          MultiIndex& current, int nonzero, std::vector<MultiIndex>& out) {
    if (dim == d) {
        out.push_back(current);
        return;
    }
    for (int a = 0; a <= p; ++a) {
        double cost = (a == 0) ? 0.0 : std::pow(static_cast<double>(a), q);
        if (cost > qbudget) break;
        int nz = nonzero + (a != 0);
        if (nz > r) break;
        current[dim] = a;
        enumerate_rec(dim + 1, d, qbudget - cost, q, r, p, current, nz, out);
    }
    current[dim] = 0;
}

// Graded lexicographic: by total degree, then lexicographically with the
// first dimension most significant (so (1,0) precedes (0,1)).
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace detail

/// All multi-indices with ||alpha||_q <= p (with 1e-12 boundary tolerance)
/// and interaction order <= r, in graded-lexicographic order.
inline MultiIndexSet enumerate_truncation(int d, const TruncationSpec& spec) {
    if (d < 1) throw std::invalid_argument("enumerate_truncation: d >= 1 required");
    MultiIndexSet set;
    set.dim = d;
    set.spec = spec;
    // Budget on sum alpha_i^q; the 1e-12 slack keeps exact boundary indices.
    double qbudget = std::pow(static_cast<double>(spec.p) + 1e-12, spec.q);
    MultiIndex current(d, 0);
    detail::enumerate_rec(0, d, qbudget, spec.q, spec.r, spec.p, current, 0, set.indices);
    std::sort(set.indices.begin(), set.indices.end(), detail::graded_lex_less);
    return set;
}

/// Regression matrix Psi_ij = psi_j(x^(i)) with optional row weights.
struct RegressionMatrix {
    Eigen::MatrixXd values;
    Eigen::VectorXd weights;  // empty when unweighted

    bool has_weights() const { return weights.size() > 0; }
};

/// Psi_ij = prod_k psi_{alpha_j[k]}(u_i[k]); columns follow the index set's
/// enumeration order. Points are in standardized coordinates.
inline Eigen::MatrixXd assemble(const std::vector<PolyFamily>& families,
                                const MultiIndexSet& indexset,
                                const Eigen::MatrixXd& points_std) {
    const int d = indexset.dim;
    if (points_std.cols() != d || static_cast<int>(families.size()) != d)
        throw std::invalid_argument("assemble: dimension mismatch");
    const int n = static_cast<int>(points_std.rows());
    const int P = indexset.size();
    // Max degree used per dimension.
    std::vector<int> pmax(d, 0);
    for (const auto& a : indexset.indices)
        for (int k = 0; k < d; ++k) pmax[k] = std::max(pmax[k], a[k]);

    Eigen::MatrixXd psi(n, P);
    std::vector<std::vector<double>> table(d);
    for (int k = 0; k < d; ++k) table[k].resize(pmax[k] + 1);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < d; ++k)
            univariate_eval_all(families[k], pmax[k], points_std(i, k), table[k].data());
        for (int j = 0; j < P; ++j) {
            double v = 1.0;
            const auto& a = indexset.indices[j];
            for (int k = 0; k < d; ++k)
                if (a[k] != 0) v *= table[k][a[k]];
            psi(i, j) = v;
        }
    }
    return psi;
}

/// B(u) = max over the index set of |psi_alpha(u)|; always >= 1 since the
/// zero index contributes the constant 1.
inline double tight_bound_B(const MultiIndexSet& indexset, const std::vector<PolyFamily>& families,
                            const Eigen::VectorXd& u) {
    const int d = indexset.dim;
    if (u.size() != d) throw std::invalid_argument("tight_bound_B: dimension mismatch");
    std::vector<int> pmax(d, 0);
    for (const auto& a : indexset.indices)
        for (int k = 0; k < d; ++k) pmax[k] = std::max(pmax[k], a[k]);
    std::vector<std::vector<double>> table(d);
    for (int k = 0; k < d; ++k) {
        table[k].resize(pmax[k] + 1);
        univariate_eval_all(families[k], pmax[k], u[k], table[k].data());
    }
    double best = 0.0;
    for (const auto& a : indexset.indices) {
        double v = 1.0;
        for (int k = 0; k < d; ++k)
            if (a[k] != 0) v *= table[k][a[k]];
        best = std::max(best, std::abs(v));
    }
    return best;
}

/// Empirical coherence: max over the sample of B(u_i)^2.
inline double empirical_coherence(const MultiIndexSet& indexset,
                                  const std::vector<PolyFamily>& families,
                                  const Eigen::MatrixXd& points_std) {
    if (points_std.rows() < 1) throw std::invalid_argument("empirical_coherence: needs >= 1 point");
    double best = 0.0;
    for (int i = 0; i < points_std.rows(); ++i) {
        double b = tight_bound_B(indexset, families, points_std.row(i).transpose());
        best = std::max(best, b * b);
    }
    return best;
}

/// Average squared basis magnitude, used as a diagnostic only.
inline double csa_metric(const MultiIndexSet& indexset, const std::vector<PolyFamily>& families,
                         const Eigen::MatrixXd& points_std) {
    Eigen::MatrixXd psi = assemble(families, indexset, points_std);
    double best = 0.0;
    for (int i = 0; i < psi.rows(); ++i)
        best = std::max(best, std::sqrt(psi.row(i).squaredNorm() / psi.cols()));
    return best;
}

}  // namespace spce

#endif
