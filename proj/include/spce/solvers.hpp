#ifndef SPCE_SOLVERS_HPP
#define SPCE_SOLVERS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spce/selection.hpp"

namespace spce {

/// Regression system min ||W(Psi c - y)||; weights (if present) multiply
/// rows directly, matching the coherence-optimal weighting convention.
struct RegressionProblem {
    Eigen::MatrixXd psi;
    Eigen::VectorXd y;
    Eigen::VectorXd weights;  // empty when unweighted

    RegressionProblem() = default;
    RegressionProblem(Eigen::MatrixXd psi_, Eigen::VectorXd y_,
                      Eigen::VectorXd w = Eigen::VectorXd())
        : psi(std::move(psi_)), y(std::move(y_)), weights(std::move(w)) {
        if (psi.rows() != y.size())
            throw std::invalid_argument("RegressionProblem: row count mismatch");
        if (weights.size() > 0 && weights.size() != y.size())
            throw std::invalid_argument("RegressionProblem: weight count mismatch");
    }

    int n() const { return static_cast<int>(psi.rows()); }
    int p() const { return static_cast<int>(psi.cols()); }
    bool weighted() const { return weights.size() > 0; }

    Eigen::MatrixXd psi_w() const {
        return weighted() ? Eigen::MatrixXd(weights.asDiagonal() * psi) : psi;
    }
    Eigen::VectorXd y_w() const {
        return weighted() ? Eigen::VectorXd(weights.asDiagonal() * y) : y;
    }
};

struct SparseSolution {
    Eigen::VectorXd coefficients;  // length P, zero outside active_set
    std::vector<int> active_set;
    double cv_error{std::numeric_limits<double>::quiet_NaN()};
    std::string solver;
    double hyperparameter{std::numeric_limits<double>::quiet_NaN()};
    int iterations{0};
    bool flagged_maxiter{false};

    nlohmann::json to_json() const {
        nlohmann::json coeffs = nlohmann::json::object();
        for (int j : active_set) coeffs[std::to_string(j)] = coefficients[j];
        return {{"coefficients", coeffs},
                {"active_set", active_set},
                {"cv_error", cv_error},
                {"meta",
                 {{"solver", solver},
                  {"hyperparameter", hyperparameter},
                  {"iterations", iterations},
                  {"flagged_maxiter", flagged_maxiter}}}};
    }
};

namespace detail {

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
    Eigen::MatrixXd out(m.rows(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(j) = m.col(cols[j]);
    return out;
}

inline std::vector<int> nonzero_indices(const Eigen::VectorXd& c, double tol = 0.0) {
    double scale = c.cwiseAbs().maxCoeff();
    std::vector<int> idx;
    for (int j = 0; j < c.size(); ++j)
        if (std::abs(c[j]) > tol * scale && c[j] != 0.0) idx.push_back(j);
    return idx;
}

}  // namespace detail

/// Least-squares coefficients on a column subset of the (weighted) system.
/// Throws on rank deficiency, naming the first dependent column.
inline Eigen::VectorXd ols_subset(const RegressionProblem& problem,
                                  const std::vector<int>& active_subset) {
    if (static_cast<int>(active_subset.size()) > problem.n())
        throw std::invalid_argument("ols: |active_subset| <= N required");
    Eigen::MatrixXd a = detail::select_columns(problem.psi_w(), active_subset);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < a.cols()) {
        int bad = active_subset[qr.colsPermutation().indices()[qr.rank()]];
        throw std::runtime_error("ols: regression matrix is rank deficient (column " +
                                 std::to_string(bad) + " dependent on the others)");
    }
    return qr.solve(problem.y_w());
}

/// OLS on all columns, packaged as a SparseSolution.
inline SparseSolution ols(const RegressionProblem& problem) {
    std::vector<int> all(problem.p());
    std::iota(all.begin(), all.end(), 0);
    Eigen::VectorXd c = ols_subset(problem, all);
    SparseSolution sol;
    sol.coefficients = c;
    sol.active_set = detail::nonzero_indices(c);
    sol.solver = "ols";
    return sol;
}

/// Incrementally maintained thin QR (modified Gram-Schmidt with one
/// reorthogonalization pass). Supports the greedy solver paths: leverages
/// come from the rows of Q, tr[(A^T A)^{-1}] from the inverse of R.
class IncrementalQr {
public:
    explicit IncrementalQr(int n, int kmax)
        : q_(Eigen::MatrixXd::Zero(n, kmax)), r_(Eigen::MatrixXd::Zero(kmax, kmax)), k_(0) {}

    int size() const { return k_; }

    /// Returns false (and leaves the factorization unchanged) when the new
    /// column is numerically dependent on the current ones.
    bool add_column(const Eigen::VectorXd& v) {
        double vnorm = v.norm();
        Eigen::VectorXd w = v;
        Eigen::VectorXd r = Eigen::VectorXd::Zero(k_);
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k_; ++j) {
                double c = q_.col(j).dot(w);
                r[j] += c;
                w -= c * q_.col(j);
            }
        }
        double wnorm = w.norm();
        if (wnorm <= 1e-12 * std::max(vnorm, 1.0)) return false;
        r_.col(k_).head(k_) = r;
        r_(k_, k_) = wnorm;
        q_.col(k_) = w / wnorm;
        ++k_;
        return true;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& y) const {
        Eigen::VectorXd z = q_.leftCols(k_).transpose() * y;
        return r_.topLeftCorner(k_, k_).template triangularView<Eigen::Upper>().solve(z);
    }

    Eigen::VectorXd fitted(const Eigen::VectorXd& y) const {
        return q_.leftCols(k_) * (q_.leftCols(k_).transpose() * y);
    }

    Eigen::VectorXd leverages() const { return q_.leftCols(k_).rowwise().squaredNorm(); }

    /// tr[(A^T A)^{-1}] = ||R^{-1}||_F^2.
    double trace_gram_inverse() const {
        Eigen::MatrixXd rinv = r_.topLeftCorner(k_, k_)
                                   .template triangularView<Eigen::Upper>()
                                   .solve(Eigen::MatrixXd::Identity(k_, k_));
        return rinv.squaredNorm();
    }

private:
    Eigen::MatrixXd q_, r_;
    int k_;
};

namespace detail {

// Modified LOO from an incremental QR state; infinity when infeasible
// (N <= K or degenerate leverage) so path selection skips the step.
inline double modified_loo_from_qr(const IncrementalQr& qr, const Eigen::VectorXd& y,
                                   double var_y) {
    const int n = static_cast<int>(y.size());
    const int k = qr.size();
    if (n <= k) return std::numeric_limits<double>::infinity();
    Eigen::VectorXd h = qr.leverages();
    Eigen::VectorXd fit = qr.fitted(y);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        if (h[i] >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
        double e = (y[i] - fit[i]) / (1.0 - h[i]);
        acc += e * e;
    }
    double eps = (acc / n) / var_y;
    return eps * modified_loo_factor(n, k, qr.trace_gram_inverse());
}

}  // namespace detail

/// Stopping rule for the greedy path solvers.
struct PathStop {
    int max_terms{0};  // 0 = LOO-selected
    static PathStop loo_selected() { return PathStop{0}; }
    static PathStop terms(int k) { return PathStop{k}; }
};

/// Result of a path solver: the selected model plus the visited supports
/// and their modified-LOO estimates.
struct PathSolution {
    SparseSolution best;
    std::vector<std::vector<int>> path;
    std::vector<double> path_cv;
};

/// Orthogonal matching pursuit: greedily add the column with maximal
/// normalized correlation with the residual; pick the path model with the
/// smallest modified LOO. Stops early after ceil(0.1 min(N,P)) consecutive
/// non-improving steps.
inline PathSolution omp(const RegressionProblem& problem, PathStop stop = PathStop::loo_selected()) {
    const Eigen::MatrixXd psi = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    const int n = problem.n(), p = problem.p();
    if (stop.max_terms > std::min(n, p))
        throw std::invalid_argument("omp: max_terms <= min(N,P) required");
    const int maxk = stop.max_terms > 0 ? stop.max_terms : std::min(n, p);
    const double var_y = n >= 2 ? sample_variance(y) : 1.0;
    const int patience = static_cast<int>(std::ceil(0.1 * std::min(n, p)));

    Eigen::VectorXd colnorm = psi.colwise().norm();
    IncrementalQr qr(n, maxk);
    Eigen::VectorXd residual = y;
    std::vector<int> active;
    std::vector<char> used(p, 0);

    PathSolution out;
    double best_cv = std::numeric_limits<double>::infinity();
    int best_step = -1, since_best = 0;

    while (static_cast<int>(active.size()) < maxk) {
        int pick = -1;
        double best_corr = -1.0;
        for (int j = 0; j < p; ++j) {
            if (used[j] || colnorm[j] == 0.0) continue;
            double c = std::abs(psi.col(j).dot(residual)) / colnorm[j];
            if (c > best_corr) {
                best_corr = c;
                pick = j;
            }
        }
        if (pick < 0 || !qr.add_column(psi.col(pick))) break;
        used[pick] = 1;
        active.push_back(pick);
        residual = y - qr.fitted(y);

        out.path.push_back(active);
        double cv = detail::modified_loo_from_qr(qr, y, var_y);
        out.path_cv.push_back(cv);
        if (cv < best_cv) {
            best_cv = cv;
            best_step = static_cast<int>(out.path.size()) - 1;
            since_best = 0;
        } else if (stop.max_terms == 0 && ++since_best >= patience) {
            break;
        }
    }
    if (out.path.empty()) throw std::runtime_error("omp: no admissible column");

    int chosen = stop.max_terms > 0 ? static_cast<int>(out.path.size()) - 1
                                    : (best_step >= 0 ? best_step : 0);
    const auto& support = out.path[chosen];
    Eigen::VectorXd c_sub = ols_subset(problem, support);
    SparseSolution& sol = out.best;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < support.size(); ++j) sol.coefficients[support[j]] = c_sub[j];
    sol.active_set = support;
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.cv_error = out.path_cv[chosen];
    sol.solver = "omp";
    sol.hyperparameter = static_cast<double>(support.size());
    sol.iterations = static_cast<int>(out.path.size());
    return out;
}

/// Least-angle regression (plain LARS, no LASSO sign-removal). The path is
/// computed on unit-normalized columns; every path model is evaluated by
/// modified LOO on its OLS refit. hybrid=true returns the refit
/// coefficients, otherwise the LARS path coefficients.
inline PathSolution lars(const RegressionProblem& problem, bool hybrid) {
    const Eigen::MatrixXd psi_raw = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    const int n = problem.n(), p = problem.p();
    const double var_y = n >= 2 ? sample_variance(y) : 1.0;

    Eigen::VectorXd colnorm = psi_raw.colwise().norm();
    std::vector<int> keep;
    for (int j = 0; j < p; ++j)
        if (colnorm[j] > 0.0) keep.push_back(j);
    Eigen::MatrixXd x(n, keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) x.col(j) = psi_raw.col(keep[j]) / colnorm[keep[j]];
    const int pn = static_cast<int>(keep.size());
    const int max_steps = std::min(pn, n - 1 > 0 ? n - 1 : 1);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);        // current fit
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(pn);     // normalized-space coefficients
    std::vector<int> active;                              // indices into keep
    std::vector<char> in_active(pn, 0);

    PathSolution out;
    double best_cv = std::numeric_limits<double>::infinity();
    int best_step = -1, since_best = 0;
    const int patience = static_cast<int>(std::ceil(0.1 * std::min(n, p)));
    std::vector<Eigen::VectorXd> path_beta;

    for (int step = 0; step < max_steps; ++step) {
        Eigen::VectorXd c = x.transpose() * (y - mu);
        int next = -1;
        double cmax = -1.0;
        for (int j = 0; j < pn; ++j) {
            if (in_active[j]) continue;
            if (std::abs(c[j]) > cmax) {
                cmax = std::abs(c[j]);
                next = j;
            }
        }
        if (next < 0 || cmax <= 1e-14) break;
        active.push_back(next);
        in_active[next] = 1;
        const int k = static_cast<int>(active.size());

        Eigen::VectorXd s(k);
        Eigen::MatrixXd xa(n, k);
        for (int j = 0; j < k; ++j) {
            s[j] = c[active[j]] >= 0.0 ? 1.0 : -1.0;
            xa.col(j) = x.col(active[j]) * s[j];
        }
        Eigen::MatrixXd ga = xa.transpose() * xa;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(ga);
        Eigen::VectorXd ginv1 = ldlt.solve(Eigen::VectorXd::Ones(k));
        double denom = ginv1.sum();
        if (!(denom > 0.0)) break;  // equicorrelation degeneracy
        double aa = 1.0 / std::sqrt(denom);
        Eigen::VectorXd w = aa * ginv1;
        Eigen::VectorXd u = xa * w;           // equiangular direction
        Eigen::VectorXd a = x.transpose() * u;

        double cbar = std::abs(c[active[0]]);
        double gamma;
        if (k == pn) {
            gamma = cbar / aa;
        } else {
            gamma = cbar / aa;
            for (int j = 0; j < pn; ++j) {
                if (in_active[j]) continue;
                double d1 = (cbar - c[j]) / (aa - a[j]);
                double d2 = (cbar + c[j]) / (aa + a[j]);
                if (d1 > 1e-14 && d1 < gamma) gamma = d1;
                if (d2 > 1e-14 && d2 < gamma) gamma = d2;
            }
        }
        if (!(gamma > 0.0) || !std::isfinite(gamma)) break;  // truncate path
        mu += gamma * u;
        for (int j = 0; j < k; ++j) beta[active[j]] += gamma * s[j] * w[j];

        std::vector<int> support;
        for (int j : active) support.push_back(keep[j]);
        std::sort(support.begin(), support.end());
        out.path.push_back(support);
        path_beta.push_back(beta);

        double cv = std::numeric_limits<double>::infinity();
        if (n > k) {
            try {
                Eigen::MatrixXd sub = detail::select_columns(psi_raw, support);
                cv = modified_loo(sub, y);
            } catch (const std::exception&) {
                cv = std::numeric_limits<double>::infinity();
            }
        }
        out.path_cv.push_back(cv);
        if (cv < best_cv) {
            best_cv = cv;
            best_step = static_cast<int>(out.path.size()) - 1;
            since_best = 0;
        } else if (++since_best >= patience) {
            break;
        }
    }
    if (out.path.empty()) throw std::runtime_error("lars: empty path");

    int chosen = best_step >= 0 ? best_step : 0;
    const auto& support = out.path[chosen];
    SparseSolution& sol = out.best;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    if (hybrid) {
        Eigen::VectorXd c_sub = ols_subset(problem, support);
        for (std::size_t j = 0; j < support.size(); ++j) sol.coefficients[support[j]] = c_sub[j];
    } else {
        const Eigen::VectorXd& b = path_beta[chosen];
        for (int j = 0; j < pn; ++j)
            if (b[j] != 0.0) sol.coefficients[keep[j]] = b[j] / colnorm[keep[j]];
    }
    sol.active_set = support;
    sol.cv_error = out.path_cv[chosen];
    sol.solver = hybrid ? "lars-hybrid" : "lars";
    sol.hyperparameter = static_cast<double>(support.size());
    sol.iterations = static_cast<int>(out.path.size());
    return out;
}

/// Subspace pursuit with fixed sparsity K (requires 2K <= min(N,P)).
inline SparseSolution subspace_pursuit(const RegressionProblem& problem, int k) {
    const int n = problem.n(), p = problem.p();
    if (k < 1 || 2 * k > std::min(n, p))
        throw std::invalid_argument("subspace_pursuit: 2K <= min(N,P) required");
    const Eigen::MatrixXd psi = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    Eigen::VectorXd colnorm = psi.colwise().norm();

    auto top_k = [&](const Eigen::VectorXd& v, int kk) {
        std::vector<int> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(),
                          [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
        idx.resize(kk);
        return idx;
    };
    auto normalized_corr = [&](const Eigen::VectorXd& r) {
        Eigen::VectorXd c = psi.transpose() * r;
        for (int j = 0; j < p; ++j) c[j] = colnorm[j] > 0.0 ? c[j] / colnorm[j] : 0.0;
        return c;
    };
    auto ls_on = [&](const std::vector<int>& cols) {
        Eigen::MatrixXd sub = detail::select_columns(psi, cols);
        return Eigen::VectorXd(sub.colPivHouseholderQr().solve(y));
    };

    std::vector<int> support = top_k(normalized_corr(y), k);
    std::sort(support.begin(), support.end());
    Eigen::VectorXd coef = ls_on(support);
    Eigen::VectorXd residual = y - detail::select_columns(psi, support) * coef;
    double rnorm = residual.norm();

    const int max_iter = 10 * k;
    int it = 0;
    bool flagged = false;
    for (; it < max_iter; ++it) {
        std::vector<int> add = top_k(normalized_corr(residual), k);
        std::vector<int> merged = support;
        for (int j : add)
            if (std::find(merged.begin(), merged.end(), j) == merged.end()) merged.push_back(j);
        Eigen::VectorXd cm = ls_on(merged);
        std::vector<int> order(merged.size());
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](int a, int b) { return std::abs(cm[a]) > std::abs(cm[b]); });
        std::vector<int> next;
        for (int j = 0; j < k; ++j) next.push_back(merged[order[j]]);
        std::sort(next.begin(), next.end());
        Eigen::VectorXd cn = ls_on(next);
        Eigen::VectorXd rn = y - detail::select_columns(psi, next) * cn;
        if (rn.norm() >= rnorm) break;  // new approximation is worse: keep previous
        support = next;
        coef = cn;
        residual = rn;
        rnorm = rn.norm();
    }
    if (it == max_iter) flagged = true;

    SparseSolution sol;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    for (std::size_t j = 0; j < support.size(); ++j) sol.coefficients[support[j]] = coef[j];
    sol.active_set = support;
    sol.solver = "sp";
    sol.hyperparameter = static_cast<double>(k);
    sol.iterations = it;
    sol.flagged_maxiter = flagged;
    return sol;
}

/// Subspace pursuit swept over 10 geometrically spaced K values in
/// [1, floor(min(N,P)/2)], selected by the given CV rule on the OLS refit
/// of each candidate support.
/// The 10-point geometric sparsity grid swept by sp_sweep: deduplicated
/// roundings of kmax^(i/9) for kmax = floor(min(N,P)/2).
inline std::vector<int> sp_k_grid(int n, int p) {
    const int kmax = std::min(n, p) / 2;
    if (kmax < 1) throw std::invalid_argument("sp_sweep: feasible K grid is empty");
    std::vector<int> grid;
    for (int i = 0; i < 10; ++i) {
        double t = i / 9.0;
        int k = static_cast<int>(std::lround(std::pow(static_cast<double>(kmax), t)));
        k = std::max(1, std::min(k, kmax));
        if (grid.empty() || grid.back() != k) grid.push_back(k);
    }
    return grid;
}

inline SparseSolution sp_sweep(const RegressionProblem& problem, const CvSpec& cv) {
    std::vector<int> grid = sp_k_grid(problem.n(), problem.p());

    const Eigen::MatrixXd psi = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    SparseSolution best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int k : grid) {
        SparseSolution sol;
        try {
            sol = subspace_pursuit(problem, k);
        } catch (const std::exception&) {
            continue;
        }
        double err;
        try {
            Eigen::MatrixXd sub = detail::select_columns(psi, sol.active_set);
            if (cv.kind == CvSpec::Kind::LOO) {
                err = loo_ols(sub, y);
            } else {
                auto fit = [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
                    return Eigen::VectorXd(a.colPivHouseholderQr().solve(b));
                };
                err = kfold_cv(fit, sub, y, cv);
            }
        } catch (const std::exception&) {
            continue;
        }
        if (err < best_err) {
            best_err = err;
            best = sol;
            best.cv_error = err;
        }
    }
    if (!std::isfinite(best_err)) throw std::runtime_error("sp_sweep: no feasible K");
    best.solver = "sp";
    return best;
}

// ---------------------------------------------------------------------------
// Basis-pursuit denoising via SPGL1-style Pareto root finding
// ---------------------------------------------------------------------------

namespace detail {

/// Euclidean projection onto the l1 ball of radius tau (sort-based).
inline Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double tau) {
    if (tau <= 0.0) return Eigen::VectorXd::Zero(v.size());
    double l1 = v.lpNorm<1>();
    if (l1 <= tau) return v;
    std::vector<double> u(v.size());
    for (int i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cssv += u[i];
        double t = (cssv - tau) / static_cast<double>(i + 1);
        if (u[i] > t) {
            rho = static_cast<int>(i + 1);
            theta = t;
        } else {
            break;
        }
    }
    (void)rho;
    Eigen::VectorXd out(v.size());
    for (int i = 0; i < v.size(); ++i) {
        double m = std::abs(v[i]) - theta;
        out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
    }
    return out;
}

/// Spectral projected gradient for min 0.5||Ax-b||^2 s.t. ||x||_1 <= tau.
/// Barzilai-Borwein step, nonmonotone line search over a 10-value window.
/// Returns the iterate; spg_budget is decremented by the iterations used.
inline Eigen::VectorXd spg_lasso(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tau,
                                 Eigen::VectorXd x, int& spg_budget, double phi_target = 0.0) {
    x = project_l1(x, tau);
    Eigen::VectorXd r = a * x - b;
    double f = 0.5 * r.squaredNorm();
    Eigen::VectorXd g = a.transpose() * r;
    std::vector<double> fmem{f};
    double alpha = 1.0;
    double gmax = g.cwiseAbs().maxCoeff();
    if (gmax > 0.0) alpha = std::min(1e10, std::max(1e-10, 1.0 / gmax));

    while (spg_budget > 0) {
        --spg_budget;
        if (phi_target > 0.0 && 2.0 * f <= phi_target * phi_target) break;  // feasible
        // projected-gradient optimality check
        Eigen::VectorXd pg = project_l1(x - g, tau) - x;
        if (pg.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, x.lpNorm<Eigen::Infinity>()))
            break;

        double fref = *std::max_element(fmem.begin(), fmem.end());
        Eigen::VectorXd xnew, rnew, d;
        double fnew = 0.0, step = alpha;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
            xnew = project_l1(x - step * g, tau);
            d = xnew - x;
            rnew = a * xnew - b;
            fnew = 0.5 * rnew.squaredNorm();
            if (fnew <= fref + 1e-4 * g.dot(d) || d.norm() == 0.0) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok || d.norm() == 0.0) break;
        Eigen::VectorXd gnew = a.transpose() * rnew;
        Eigen::VectorXd yv = gnew - g;
        double sty = d.dot(yv);
        alpha = sty > 0.0 ? std::min(1e10, std::max(1e-10, d.squaredNorm() / sty)) : 1e10;
        double fprev = f;
        x = xnew;
        r = rnew;
        g = gnew;
        f = fnew;
        fmem.push_back(f);
        if (fmem.size() > 10) fmem.erase(fmem.begin());
        if (std::abs(fprev - f) <= 1e-14 * f) break;  // relative stagnation
    }
    return x;
}

}  // namespace detail

/// Value and derivative of the Pareto curve phi(tau) = min ||Psi x - y||_2
/// subject to ||x||_1 <= tau; phi'(tau) = -||Psi^T r||_inf / ||r||_2.
struct ParetoPoint {
    double phi;
    double dphi;
    Eigen::VectorXd x;
};

inline ParetoPoint pareto_phi(const RegressionProblem& problem, double tau,
                              int spg_budget = 10000) {
    const Eigen::MatrixXd a = problem.psi_w();
    const Eigen::VectorXd b = problem.y_w();
    Eigen::VectorXd x = detail::spg_lasso(a, b, tau, Eigen::VectorXd::Zero(problem.p()),
                                          spg_budget);
    Eigen::VectorXd r = b - a * x;
    double phi = r.norm();
    double dphi = phi > 0.0 ? -(a.transpose() * r).lpNorm<Eigen::Infinity>() / phi : 0.0;
    return {phi, dphi, std::move(x)};
}

/// Basis-pursuit denoising min ||x||_1 s.t. ||W(Psi x - y)||_2 <= sigma,
/// solved by Newton root finding on the Pareto curve with an SPG LASSO
/// inner solver. Caps: 30 Newton steps, 1e4 SPG steps in total.
inline SparseSolution bpdn_spg(const RegressionProblem& problem, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("bpdn_spg: sigma >= 0 required");
    const Eigen::MatrixXd a = problem.psi_w();
    const Eigen::VectorXd b = problem.y_w();
    const int p = problem.p();

    SparseSolution sol;
    sol.solver = "spgl1";
    sol.hyperparameter = sigma * sigma;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    if (b.norm() <= sigma) return sol;  // tau = 0 already feasible

    const double feas_tol = sigma * (1.0 + 1e-3) + 1e-12 * b.norm();
    double tau = 0.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    int spg_budget = 10000;
    double best_l1 = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = x;
    bool found_feasible = false;

    int newton = 0;
    for (; newton < 30 && spg_budget > 0; ++newton) {
        Eigen::VectorXd r = b - a * x;
        double phi = r.norm();
        if (phi <= feas_tol) {
            found_feasible = true;
            double l1 = x.lpNorm<1>();
            if (l1 < best_l1) {
                best_l1 = l1;
                best_x = x;
            }
            if (phi >= sigma * (1.0 - 1e-3)) break;  // at the Pareto root
        }
        double dphi = phi > 0.0 ? -(a.transpose() * r).lpNorm<Eigen::Infinity>() / phi : 0.0;
        if (dphi >= -1e-300) break;
        double tau_next = tau + (sigma - phi) / dphi;  // may decrease on overshoot
        if (!std::isfinite(tau_next) || tau_next < 0.0) break;
        if (tau_next == tau) tau_next = tau + std::max(1e-12, 1e-6 * (1.0 + tau));
        tau = tau_next;
        x = detail::spg_lasso(a, b, tau, x, spg_budget, feas_tol);
    }
    {
        Eigen::VectorXd r = b - a * x;
        if (r.norm() <= feas_tol && x.lpNorm<1>() < best_l1) {
            found_feasible = true;
            best_x = x;
        }
    }
    sol.coefficients = found_feasible ? best_x : x;
    sol.iterations = newton;
    sol.flagged_maxiter = !found_feasible;
    if (sol.flagged_maxiter)
        std::cerr << "bpdn_spg: warning: no feasible iterate within caps (sigma=" << sigma
                  << "); returning last iterate\n";
    sol.active_set = detail::nonzero_indices(sol.coefficients, 1e-8);
    return sol;
}

// ---------------------------------------------------------------------------
// Bayesian compressive sensing with a hierarchical Laplace prior
// ---------------------------------------------------------------------------

/// FastLaplace BCS: sequential add / re-estimate / delete updates of the
/// per-coefficient prior variances gamma_i, shared Laplace hyperparameter
/// lambda updated in closed form (nu = 0), fixed noise precision beta.
inline SparseSolution bcs_fastlaplace(const RegressionProblem& problem, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("bcs_fastlaplace: beta > 0 required");
    const Eigen::MatrixXd phi = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    const int p = problem.p();

    SparseSolution sol;
    sol.solver = "bcs";
    sol.hyperparameter = beta;
    sol.coefficients = Eigen::VectorXd::Zero(p);
    if (y.norm() == 0.0) return sol;

    const Eigen::VectorXd phi_sq = phi.colwise().squaredNorm();
    const Eigen::VectorXd phi_ty = phi.transpose() * y;

    std::vector<int> active;
    std::vector<double> gammas;
    auto find_active = [&](int j) {
        for (std::size_t i = 0; i < active.size(); ++i)
            if (active[i] == j) return static_cast<int>(i);
        return -1;
    };

    // log-likelihood contribution of coordinate i at prior variance g,
    // given leave-i-out quantities (s, q) and Laplace rate lambda
    auto ell = [](double g, double s, double q, double lambda) {
        return 0.5 * (q * q * g / (1.0 + g * s) - std::log1p(g * s) - lambda * g);
    };
    // stationary point of ell in g > 0 (or <= 0 when none exists)
    auto gamma_star = [](double s, double q, double lambda) {
        if (lambda <= 0.0) return (q * q - s) / (s * s);
        double a2 = lambda * s * s;
        double a1 = s * s + 2.0 * lambda * s;
        double a0 = lambda + s - q * q;
        double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc < 0.0) return -1.0;
        return (-a1 + std::sqrt(disc)) / (2.0 * a2);
    };

    int it = 0;
    const int max_iter = 1000;
    double l_total = 0.0;
    for (; it < max_iter; ++it) {
        const int k = static_cast<int>(active.size());
        Eigen::VectorXd s_all(p), q_all(p);
        Eigen::MatrixXd sigma;  // posterior covariance on the active set
        if (k == 0) {
            s_all = beta * phi_sq;
            q_all = beta * phi_ty;
        } else {
            Eigen::MatrixXd phi_a(phi.rows(), k);
            for (int i = 0; i < k; ++i) phi_a.col(i) = phi.col(active[i]);
            Eigen::MatrixXd prec = beta * (phi_a.transpose() * phi_a);
            for (int i = 0; i < k; ++i) prec(i, i) += 1.0 / gammas[i];
            sigma = prec.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
            Eigen::MatrixXd phia_t_phi = phi_a.transpose() * phi;   // k x p
            Eigen::VectorXd phia_t_y = phi_a.transpose() * y;       // k
            Eigen::MatrixXd tmp = sigma * phia_t_phi;               // k x p
            for (int j = 0; j < p; ++j) {
                double corr = phia_t_phi.col(j).dot(tmp.col(j));
                s_all[j] = beta * phi_sq[j] - beta * beta * corr;
                q_all[j] = beta * phi_ty[j] - beta * beta * phia_t_phi.col(j).dot(sigma * phia_t_y);
            }
        }

        double gsum = 0.0;
        for (double g : gammas) gsum += g;
        double lambda = (k > 1 && gsum > 0.0) ? 2.0 * (k - 1) / gsum : 0.0;

        // best single-coordinate action
        int best_j = -1;
        double best_dl = 0.0, best_g = 0.0;
        for (int j = 0; j < p; ++j) {
            if (s_all[j] <= 0.0) continue;
            int ai = find_active(j);
            double s = s_all[j], q = q_all[j];
            if (ai >= 0) {
                double denom = 1.0 - gammas[ai] * s_all[j];
                if (std::abs(denom) < 1e-300) continue;
                s = s_all[j] / denom;
                q = q_all[j] / denom;
                if (s <= 0.0) continue;
            }
            double gs = gamma_star(s, q, lambda);
            double dl;
            double gnew;
            if (ai < 0) {
                if (gs <= 0.0) continue;
                gnew = gs;
                dl = ell(gs, s, q, lambda);
            } else if (gs > 0.0) {
                gnew = gs;
                dl = ell(gs, s, q, lambda) - ell(gammas[ai], s, q, lambda);
            } else {
                gnew = 0.0;
                dl = -ell(gammas[ai], s, q, lambda);
            }
            if (dl > best_dl) {
                best_dl = dl;
                best_j = j;
                best_g = gnew;
            }
        }
        if (best_j < 0) break;

        int ai = find_active(best_j);
        if (ai < 0) {
            active.push_back(best_j);
            gammas.push_back(best_g);
        } else if (best_g > 0.0) {
            gammas[ai] = best_g;
        } else {
            active.erase(active.begin() + ai);
            gammas.erase(gammas.begin() + ai);
        }
        l_total += best_dl;
        if (best_dl < 1e-8 * std::max(1.0, std::abs(l_total))) break;  // converged
    }
    sol.flagged_maxiter = (it == max_iter);
    if (sol.flagged_maxiter)
        std::cerr << "bcs_fastlaplace: warning: not converged in " << max_iter << " iterations\n";
    sol.iterations = it;

    const int k = static_cast<int>(active.size());
    if (k > 0) {
        Eigen::MatrixXd phi_a(phi.rows(), k);
        for (int i = 0; i < k; ++i) phi_a.col(i) = phi.col(active[i]);
        Eigen::MatrixXd prec = beta * (phi_a.transpose() * phi_a);
        for (int i = 0; i < k; ++i) prec(i, i) += 1.0 / gammas[i];
        Eigen::VectorXd mu = beta * prec.ldlt().solve(phi_a.transpose() * y);
        std::vector<int> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return active[a] < active[b]; });
        for (int i : order) {
            sol.coefficients[active[i]] = mu[i];
            sol.active_set.push_back(active[i]);
        }
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Hyperparameter selection wrappers
// ---------------------------------------------------------------------------

enum class SolverId { OLS, OMP, LARS, LARSHybrid, SP, SPLoo, SPGL1, BCS };

inline std::string solver_name(SolverId id) {
    switch (id) {
        case SolverId::OLS: return "ols";
        case SolverId::OMP: return "omp";
        case SolverId::LARS: return "lars";
        case SolverId::LARSHybrid: return "lars-hybrid";
        case SolverId::SP: return "sp";
        case SolverId::SPLoo: return "sp-loo";
        case SolverId::SPGL1: return "spgl1";
        case SolverId::BCS: return "bcs";
    }
    return "?";
}

inline SolverId solver_from_name(const std::string& name) {
    if (name == "ols") return SolverId::OLS;
    if (name == "omp") return SolverId::OMP;
    if (name == "lars") return SolverId::LARS;
    if (name == "lars-hybrid") return SolverId::LARSHybrid;
    if (name == "sp") return SolverId::SP;
    if (name == "sp-loo") return SolverId::SPLoo;
    if (name == "spgl1") return SolverId::SPGL1;
    if (name == "bcs") return SolverId::BCS;
    throw std::invalid_argument("unknown solver id: " + name);
}

/// Relative sigma^2 grid for SPGL1/BCS: 16 log-spaced factors g such that
/// sigma^2 = N * Var(y) * g, g in [1e-16, 1e-1].
inline std::vector<double> sigma2_relative_grid(int size = 16) {
    std::vector<double> g(size);
    for (int i = 0; i < size; ++i)
        g[i] = std::pow(10.0, -16.0 + 15.0 * i / (size - 1.0));
    return g;
}

/// Runs a solver with its hyperparameter rule: OMP/LARS pick the number of
/// regressors by modified LOO along the path; SP sweeps 10 K values by the
/// given CV rule; SPGL1/BCS select sigma^2 from the 16-point relative grid
/// by the given CV rule (default 5-fold).
inline SparseSolution solve_with_hyperparameters(SolverId id, const RegressionProblem& problem,
                                                 const CvSpec& cv = CvSpec::kfold(5)) {
    switch (id) {
        case SolverId::OLS: {
            SparseSolution sol = ols(problem);
            Eigen::MatrixXd psi = problem.psi_w();
            Eigen::VectorXd y = problem.y_w();
            if (problem.n() > problem.p()) sol.cv_error = loo_ols(psi, y);
            return sol;
        }
        case SolverId::OMP: return omp(problem).best;
        case SolverId::LARS: return lars(problem, false).best;
        case SolverId::LARSHybrid: return lars(problem, true).best;
        case SolverId::SP: return sp_sweep(problem, cv.kind == CvSpec::Kind::KFold
                                                        ? cv : CvSpec::kfold(4, cv.fold_seed));
        case SolverId::SPLoo: return sp_sweep(problem, CvSpec::loo());
        case SolverId::SPGL1:
        case SolverId::BCS: break;
    }

    const Eigen::MatrixXd psi = problem.psi_w();
    const Eigen::VectorXd y = problem.y_w();
    const double var_y = sample_variance(y);
    const auto grid = sigma2_relative_grid();

    double best_err = std::numeric_limits<double>::infinity();
    double best_g = grid.front();
    for (double g : grid) {
        auto fit = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
            double var_b = sample_variance(b);
            RegressionProblem sub(a, b);
            if (id == SolverId::SPGL1) {
                double sigma = std::sqrt(static_cast<double>(b.size()) * var_b * g);
                return bpdn_spg(sub, sigma).coefficients;
            }
            double beta = 1.0 / (var_b * g);
            return bcs_fastlaplace(sub, beta).coefficients;
        };
        double err;
        try {
            err = kfold_cv(fit, psi, y, cv);
        } catch (const std::exception&) {
            continue;
        }
        if (err < best_err) {
            best_err = err;
            best_g = g;
        }
    }

    SparseSolution sol;
    if (id == SolverId::SPGL1) {
        double sigma = std::sqrt(problem.n() * var_y * best_g);
        sol = bpdn_spg(RegressionProblem(psi, y), sigma);
        sol.hyperparameter = sigma * sigma;
    } else {
        double beta = 1.0 / (var_y * best_g);
        sol = bcs_fastlaplace(RegressionProblem(psi, y), beta);
        sol.hyperparameter = beta;
    }
    sol.cv_error = best_err;
    return sol;
}

}  // namespace spce

#endif
