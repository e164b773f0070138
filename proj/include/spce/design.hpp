#ifndef SPCE_DESIGN_HPP
#define SPCE_DESIGN_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spce/basis.hpp"
#include "spce/inputs.hpp"
#include "spce/rng.hpp"

namespace spce {

/// An experimental design: N points kept in both physical and standardized
/// coordinates, with regression weights when the sampler is weighted.
struct Design {
    Eigen::MatrixXd points_physical;
    Eigen::MatrixXd points_standard;
    Eigen::VectorXd weights;  // empty when unweighted
    nlohmann::json provenance;

    int size() const { return static_cast<int>(points_physical.rows()); }
    int dimension() const { return static_cast<int>(points_physical.cols()); }
    bool weighted() const { return weights.size() > 0; }

    Design subset(const std::vector<int>& rows) const {
        Design out;
        out.points_physical.resize(rows.size(), dimension());
        out.points_standard.resize(rows.size(), dimension());
        if (weighted()) out.weights.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out.points_physical.row(i) = points_physical.row(rows[i]);
            out.points_standard.row(i) = points_standard.row(rows[i]);
            if (weighted()) out.weights[i] = weights[rows[i]];
        }
        out.provenance = provenance;
        return out;
    }
};

// ---------------------------------------------------------------------------
// Regression-matrix quality criteria
// ---------------------------------------------------------------------------

/// D(Psi) = det((1/N) Psi^T Psi)^(1/P); 0 when N < P or the information
/// matrix is singular.
inline double d_value(const Eigen::MatrixXd& psi) {
    const Eigen::Index n = psi.rows(), p = psi.cols();
    if (n < p) return 0.0;
    Eigen::MatrixXd info = (psi.transpose() * psi) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double emax = ev[p - 1];
    if (!(emax > 0.0) || ev[0] <= 1e-12 * emax) return 0.0;  // singular
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) logdet += std::log(ev[i]);
    return std::exp(logdet / static_cast<double>(p));
}

/// S(Psi) = (sqrt(det Psi^T Psi) / prod ||col_i||)^(1/P); 0 when N < P.
inline double s_value(const Eigen::MatrixXd& psi) {
    const Eigen::Index n = psi.rows(), p = psi.cols();
    if (n < p) return 0.0;
    Eigen::MatrixXd gram = psi.transpose() * psi;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double emax = ev[p - 1];
    if (!(emax > 0.0) || ev[0] <= 1e-12 * emax) return 0.0;  // singular
    double half_logdet = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) half_logdet += 0.5 * std::log(ev[i]);
    double log_colnorms = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        double nn = psi.col(i).norm();
        if (nn == 0.0) return 0.0;
        log_colnorms += std::log(nn);
    }
    return std::exp((half_logdet - log_colnorms) / static_cast<double>(p));
}

/// Worst-case cross-correlation between any two (normalized) columns.
inline double mutual_coherence(const Eigen::MatrixXd& psi) {
    const Eigen::Index p = psi.cols();
    if (p < 2) return 0.0;
    Eigen::VectorXd norms = psi.colwise().norm();
    double mu = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            if (norms[i] == 0.0 || norms[j] == 0.0) continue;
            double c = std::abs(psi.col(i).dot(psi.col(j))) / (norms[i] * norms[j]);
            mu = std::max(mu, c);
        }
    }
    return mu;
}

/// Mean of squared off-diagonal normalized Gram entries, 1/(P(P-1)) scaling.
inline double avg_cross_correlation(const Eigen::MatrixXd& psi) {
    const Eigen::Index p = psi.cols();
    if (p < 2) return 0.0;
    Eigen::VectorXd norms = psi.colwise().norm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (i == j || norms[i] == 0.0 || norms[j] == 0.0) continue;
            double c = psi.col(i).dot(psi.col(j)) / (norms[i] * norms[j]);
            s += c * c;
        }
    }
    return s / (static_cast<double>(p) * static_cast<double>(p - 1));
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

/// Monte Carlo design: rows i.i.d. from the input distribution, unweighted.
inline Design mc_design(const InputModel& input, int n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("mc_design: n >= 1 required");
    Design d;
    d.points_physical = input.sample_iid(n, rng);
    d.points_standard = input.to_standard(d.points_physical);
    d.provenance = {{"sampler", "mc"}, {"n", n}};
    return d;
}

/// Maximin Latin hypercube: among n_tries stratified designs, keep the one
/// with the largest minimal pairwise distance in quantile space.
inline Design lhs_maximin(const InputModel& input, int n, int n_tries, RngStream& rng) {
    if (n < 1 || n_tries < 1) throw std::invalid_argument("lhs_maximin: n, n_tries >= 1 required");
    const int d = input.dimension();
    Eigen::MatrixXd best_q;
    double best_dist = -1.0;
    std::vector<int> perm(n);
    for (int t = 0; t < n_tries; ++t) {
        Eigen::MatrixXd q(n, d);
        for (int j = 0; j < d; ++j) {
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            for (int i = 0; i < n; ++i) {
                double u = rng.uniform01();
                if (u <= 0.0) u = std::numeric_limits<double>::min();
                q(i, j) = (perm[i] + u) / n;
            }
        }
        double mind = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n && mind > 0; ++i)
            for (int k = i + 1; k < n; ++k)
                mind = std::min(mind, (q.row(i) - q.row(k)).norm());
        if (n == 1) mind = 0.0;
        if (mind > best_dist || t == 0) {
            best_dist = mind;
            best_q = q;
        }
    }
    Design out;
    out.points_physical.resize(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            out.points_physical(i, j) = input.marginals[j].quantile(best_q(i, j));
    out.points_standard = input.to_standard(out.points_physical);
    out.provenance = {{"sampler", "lhs"}, {"n", n}, {"n_tries", n_tries}};
    return out;
}

/// Asymptotic sampling: Chebyshev per dimension for all-uniform input with
/// weight prod (1-u_k^2)^(1/4); uniform on the ball of radius
/// sqrt(2)*sqrt(2p+1) for all-Gaussian input with weight exp(-||u||^2/4).
inline Design asymptotic_design(const InputModel& input, int p, int n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("asymptotic_design: n >= 1 required");
    const int d = input.dimension();
    bool all_uniform = true, all_gaussian = true;
    for (const auto& m : input.marginals) {
        if (m.family == Family::Uniform) all_gaussian = false;
        else all_uniform = false;
    }
    Design out;
    out.points_standard.resize(n, d);
    out.weights.resize(n);
    if (all_uniform) {
        for (int i = 0; i < n; ++i) {
            double w = 1.0;
            for (int j = 0; j < d; ++j) {
                double u = std::cos(kPi * rng.uniform01());
                out.points_standard(i, j) = u;
                w *= std::pow(1.0 - u * u, 0.25);
            }
            out.weights[i] = w;
        }
    } else if (all_gaussian) {
        const double radius = std::sqrt(2.0) * std::sqrt(2.0 * p + 1.0);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd g(d);
            for (int j = 0; j < d; ++j) g[j] = rng.normal();
            double r = radius * std::pow(rng.uniform01(), 1.0 / d);
            Eigen::VectorXd u = g.normalized() * r;
            out.points_standard.row(i) = u.transpose();
            out.weights[i] = std::exp(-0.25 * u.squaredNorm());
        }
    } else {
        throw std::invalid_argument("asymptotic_design: mixed marginal families unsupported");
    }
    out.points_physical = input.from_standard(out.points_standard);
    out.provenance = {{"sampler", "asymptotic"}, {"n", n}, {"p", p}};
    return out;
}

namespace detail {

// Per-(dimension, degree) supremum of psi_j(u)^2 * extra(u) on a grid over
// the dimension's standardized domain. Used for the rejection bound.
inline double grid_sup_psi_sq(PolyFamily fam, int degree, double lo, double hi,
                              bool times_normal_pdf) {
    const int ng = 2001;
    double best = 0.0;
    std::vector<double> evals(degree + 1);
    for (int g = 0; g < ng; ++g) {
        double u = lo + (hi - lo) * g / (ng - 1);
        univariate_eval_all(fam, degree, u, evals.data());
        double v = evals[degree] * evals[degree];
        if (times_normal_pdf) v *= normal_pdf(u);
        best = std::max(best, v);
    }
    return best;
}

inline double ball_volume(int dims, double radius) {
    // V = pi^(d/2) r^d / Gamma(d/2 + 1)
    return std::exp(0.5 * dims * std::log(kPi) + dims * std::log(radius) -
                    std::lgamma(0.5 * dims + 1.0));
}

}  // namespace detail

/// Coherence-optimal design by rejection sampling: points distributed
/// proportionally to B(u)^2 f(u) in standardized space (restricted to the
/// ball of radius sqrt(2)*sqrt(2p+2) over Gaussian-type dimensions), with
/// weights 1/B(u_i).
///
/// Proposals are per-marginal: U(-1,1) for uniform marginals; for
/// Gaussian-type marginals, standard normal when d >= p, otherwise uniform
/// on the ball (the asymptotic measure). The acceptance constant is a
/// verified upper bound of the target/proposal ratio: a dense-grid supremum
/// for d <= 2, otherwise a per-dimension bound maximized over the index set,
/// both inflated by 1.1.
inline Design coherence_optimal_design(const InputModel& input, const MultiIndexSet& indexset,
                                       const std::vector<PolyFamily>& families, int n,
                                       RngStream& rng) {
    if (n < 1) throw std::invalid_argument("coherence_optimal_design: n >= 1 required");
    const int d = input.dimension();
    if (indexset.dim != d || static_cast<int>(families.size()) != d)
        throw std::invalid_argument("coherence_optimal_design: dimension mismatch");
    const int p = indexset.spec.p;

    std::vector<int> gdims, udims;
    for (int j = 0; j < d; ++j)
        (families[j] == PolyFamily::Hermite ? gdims : udims).push_back(j);
    const int ng = static_cast<int>(gdims.size());
    const double radius = std::sqrt(2.0) * std::sqrt(2.0 * p + 2.0);
    const bool gaussian_proposal = (d >= p);  // else ball-uniform on the Gaussian block
    const double ball_vol = ng > 0 ? detail::ball_volume(ng, radius) : 1.0;
    // Normal-density product over Gaussian dims appears in the ratio only for
    // the ball proposal; for the Gaussian proposal it cancels.
    const bool ratio_has_pdf = !gaussian_proposal && ng > 0;

    auto ratio = [&](const Eigen::VectorXd& u, double b) {
        double v = b * b;
        if (ratio_has_pdf) {
            for (int j : gdims) v *= normal_pdf(u[j]);
            v *= ball_vol;
        }
        return v;
    };

    // Acceptance bound gamma.
    double gamma;
    if (d <= 2) {
        const int ngrid = 401;
        double best = 0.0;
        Eigen::VectorXd u(d);
        auto domain = [&](int j) {
            return families[j] == PolyFamily::Hermite ? radius : 1.0;
        };
        if (d == 1) {
            for (int a = 0; a < ngrid; ++a) {
                u[0] = -domain(0) + 2.0 * domain(0) * a / (ngrid - 1);
                best = std::max(best, ratio(u, tight_bound_B(indexset, families, u)));
            }
        } else {
            for (int a = 0; a < ngrid; ++a) {
                u[0] = -domain(0) + 2.0 * domain(0) * a / (ngrid - 1);
                for (int b2 = 0; b2 < ngrid; ++b2) {
                    u[1] = -domain(1) + 2.0 * domain(1) * b2 / (ngrid - 1);
                    if (ng == 2 && u.norm() > radius) continue;
                    best = std::max(best, ratio(u, tight_bound_B(indexset, families, u)));
                }
            }
        }
        gamma = 1.1 * best;
    } else {
        // Per-(dimension, degree) suprema combined over the index set:
        // B(u)^2 * extra(u) <= max_alpha prod_k sup_u psi_{alpha_k}(u)^2 extra_k(u).
        std::vector<std::vector<double>> t(d);
        std::vector<int> pmax(d, 0);
        for (const auto& a : indexset.indices)
            for (int k = 0; k < d; ++k) pmax[k] = std::max(pmax[k], a[k]);
        for (int k = 0; k < d; ++k) {
            t[k].resize(pmax[k] + 1);
            bool is_g = families[k] == PolyFamily::Hermite;
            double dom = is_g ? radius : 1.0;
            for (int j = 0; j <= pmax[k]; ++j)
                t[k][j] = detail::grid_sup_psi_sq(families[k], j, -dom, dom, is_g && ratio_has_pdf);
        }
        double best = 0.0;
        for (const auto& a : indexset.indices) {
            double v = 1.0;
            for (int k = 0; k < d; ++k) v *= t[k][a[k]];
            best = std::max(best, v);
        }
        if (ratio_has_pdf) best *= ball_vol;
        gamma = 1.1 * best;
    }

    Design out;
    out.points_standard.resize(n, d);
    out.weights.resize(n);
    long long proposals = 0, accepted = 0;
    Eigen::VectorXd u(d);
    while (accepted < n) {
        ++proposals;
        if (proposals >= 1000000 &&
            static_cast<double>(accepted) / static_cast<double>(proposals) < 1e-6) {
            throw std::runtime_error(
                "coherence_optimal_design: acceptance rate below 1e-6 (accepted " +
                std::to_string(accepted) + " of " + std::to_string(proposals) + " proposals)");
        }
        for (int j : udims) u[j] = rng.uniform(-1.0, 1.0);
        if (ng > 0) {
            if (gaussian_proposal) {
                for (int j : gdims) u[j] = rng.normal();
            } else {
                Eigen::VectorXd g(ng);
                for (int k = 0; k < ng; ++k) g[k] = rng.normal();
                double r = radius * std::pow(rng.uniform01(), 1.0 / ng);
                g = g.normalized() * r;
                for (int k = 0; k < ng; ++k) u[gdims[k]] = g[k];
            }
            double nrm2 = 0.0;
            for (int j : gdims) nrm2 += u[j] * u[j];
            if (nrm2 > radius * radius) continue;  // outside the target's support
        }
        double b = tight_bound_B(indexset, families, u);
        if (rng.uniform01() <= ratio(u, b) / gamma) {
            out.points_standard.row(accepted) = u.transpose();
            out.weights[accepted] = 1.0 / b;
            ++accepted;
        }
    }
    out.points_physical = input.from_standard(out.points_standard);
    out.provenance = {{"sampler", "coh-opt"}, {"n", n}, {"p", p}};
    return out;
}

inline Design coherence_optimal_design(const InputModel& input, const MultiIndexSet& indexset,
                                       int n, RngStream& rng) {
    return coherence_optimal_design(input, indexset, poly_families_for(input), n, rng);
}

// ---------------------------------------------------------------------------
// Candidate pools and subset selection
// ---------------------------------------------------------------------------

/// Candidate pool of size 2M from which M-subsets are drawn without
/// replacement; M defaults to 10 P.
struct CandidatePool {
    Design pool;
    int draw_size{0};
};

enum class SamplerKind { MC, LHS, Asymptotic, CoherenceOptimal };

inline std::string sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::MC: return "mc";
        case SamplerKind::LHS: return "lhs";
        case SamplerKind::Asymptotic: return "asymptotic";
        case SamplerKind::CoherenceOptimal: return "coh-opt";
    }
    return "?";
}

inline Design make_design(SamplerKind kind, const InputModel& input, const MultiIndexSet& indexset,
                          int n, RngStream& rng, int lhs_tries = 20) {
    switch (kind) {
        case SamplerKind::MC: return mc_design(input, n, rng);
        case SamplerKind::LHS: return lhs_maximin(input, n, lhs_tries, rng);
        case SamplerKind::Asymptotic: return asymptotic_design(input, indexset.spec.p, n, rng);
        case SamplerKind::CoherenceOptimal: return coherence_optimal_design(input, indexset, n, rng);
    }
    throw std::invalid_argument("make_design: unknown sampler");
}

inline CandidatePool build_candidate_pool(SamplerKind kind, const InputModel& input,
                                          const MultiIndexSet& indexset, RngStream& rng,
                                          int m_override = 0) {
    const int m = m_override > 0 ? m_override : 10 * indexset.size();
    CandidatePool cp;
    cp.pool = make_design(kind, input, indexset, 2 * m, rng);
    cp.draw_size = m;
    cp.pool.provenance["pool_size"] = 2 * m;
    cp.pool.provenance["draw_size"] = m;
    return cp;
}

/// Draw of size M from the 2M pool, uniform without replacement.
inline Design draw_m(const CandidatePool& cp, RngStream& rng) {
    const int total = cp.pool.size();
    std::vector<int> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < cp.draw_size; ++i) {
        int j = i + static_cast<int>(rng.index(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cp.draw_size);
    std::sort(idx.begin(), idx.end());
    return cp.pool.subset(idx);
}

/// D-optimal subset via SVD + rank-revealing (column-pivoted) QR: take the
/// first min(n,P) left singular vectors of the candidate matrix, pivot its
/// transpose, and keep the first n pivot rows.
inline std::vector<int> d_optimal_rrqr_indices(const Eigen::MatrixXd& psi_cand, int n) {
    const int m = static_cast<int>(psi_cand.rows());
    if (n > m) throw std::invalid_argument("d_optimal_rrqr: n > candidate count");
    if (n == m) {
        std::vector<int> all(m);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }
    const int k = std::min<int>(n, static_cast<int>(psi_cand.cols()));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(psi_cand, Eigen::ComputeThinU);
    Eigen::MatrixXd vt = svd.matrixU().leftCols(k).transpose();  // k x M
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vt);
    Eigen::VectorXi perm = qr.colsPermutation().indices();
    // perm maps original column -> pivoted position; invert to pivot order.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[perm[i]] = i;
    std::vector<int> chosen(order.begin(), order.begin() + n);
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

inline Design d_optimal_rrqr(const Design& candidates, const Eigen::MatrixXd& psi_cand, int n) {
    auto idx = d_optimal_rrqr_indices(psi_cand, n);
    Design out = candidates.subset(idx);
    out.provenance["subset"] = "d-opt-rrqr";
    return out;
}

/// Greedy near-optimal subset selection: start from a random candidate row,
/// then repeatedly add the candidate whose augmented matrix minimizes the
/// normalized distance of (mutual coherence, average cross-correlation) to
/// the utopia point. Degenerate normalization (max == min) contributes zero;
/// ties break toward the lowest candidate index.
inline std::vector<int> near_optimal_greedy_indices(const Eigen::MatrixXd& psi_cand, int n,
                                                    RngStream& rng) {
    const int m = static_cast<int>(psi_cand.rows());
    const int p = static_cast<int>(psi_cand.cols());
    if (n > m) throw std::invalid_argument("near_optimal_greedy: n > candidate count");
    if (static_cast<double>(n) * m * p * p > 1e9) {
        std::cerr << "near_optimal_greedy: warning: ~" << static_cast<double>(n) * m * p * p
                  << " scalar ops requested; this will be slow\n";
    }
    std::vector<int> chosen;
    std::vector<bool> used(m, false);
    int first = static_cast<int>(rng.index(m));
    chosen.push_back(first);
    used[first] = true;
    if (n == m) {
        std::vector<int> all(m);
        std::iota(all.begin(), all.end(), 0);
        return all;
    }

    Eigen::MatrixXd gram = psi_cand.row(first).transpose() * psi_cand.row(first);
    auto crit = [&](const Eigen::RowVectorXd& row, double& mu, double& gam) {
        mu = 0.0;
        double s = 0.0;
        for (int i = 0; i < p; ++i) {
            double nii = gram(i, i) + row[i] * row[i];
            if (nii == 0.0) continue;
            for (int j = i + 1; j < p; ++j) {
                double njj = gram(j, j) + row[j] * row[j];
                if (njj == 0.0) continue;
                double gij = gram(i, j) + row[i] * row[j];
                double c2 = (gij * gij) / (nii * njj);
                mu = std::max(mu, c2);
                s += c2;
            }
        }
        mu = std::sqrt(mu);
        gam = 2.0 * s / (static_cast<double>(p) * (p - 1));
    };

    std::vector<double> mus(m), gams(m);
    while (static_cast<int>(chosen.size()) < n) {
        double mu_min = std::numeric_limits<double>::infinity(), mu_max = -mu_min;
        double ga_min = mu_min, ga_max = -mu_min;
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            crit(psi_cand.row(j), mus[j], gams[j]);
            mu_min = std::min(mu_min, mus[j]);
            mu_max = std::max(mu_max, mus[j]);
            ga_min = std::min(ga_min, gams[j]);
            ga_max = std::max(ga_max, gams[j]);
        }
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) {
            if (used[j]) continue;
            double dm = mu_max > mu_min ? (mus[j] - mu_min) / (mu_max - mu_min) : 0.0;
            double dg = ga_max > ga_min ? (gams[j] - ga_min) / (ga_max - ga_min) : 0.0;
            double dist = dm * dm + dg * dg;
            if (dist < best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        used[best] = true;
        chosen.push_back(best);
        gram += psi_cand.row(best).transpose() * psi_cand.row(best);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

inline Design near_optimal_greedy(const Design& candidates, const Eigen::MatrixXd& psi_cand,
                                  int n, RngStream& rng) {
    auto idx = near_optimal_greedy_indices(psi_cand, n, rng);
    Design out = candidates.subset(idx);
    out.provenance["subset"] = "near-opt";
    return out;
}

/// Write the physical-space points (and weights, if any) as CSV, plus a
/// "<path>.json" sidecar holding the provenance record.
inline void write_design_csv(const Design& design, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_design_csv: cannot open " + path);
    f.precision(17);
    const int d = design.dimension();
    for (int j = 0; j < d; ++j) f << (j ? ",dim_" : "dim_") << j;
    if (design.weighted()) f << ",weight";
    f << "\n";
    for (int i = 0; i < design.size(); ++i) {
        for (int j = 0; j < d; ++j) f << (j ? "," : "") << design.points_physical(i, j);
        if (design.weighted()) f << "," << design.weights[i];
        f << "\n";
    }
    std::ofstream side(path + ".json");
    if (!side) throw std::runtime_error("write_design_csv: cannot open " + path + ".json");
    side << design.provenance.dump(2) << "\n";
}

}  // namespace spce

#endif
