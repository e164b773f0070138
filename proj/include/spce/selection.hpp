#ifndef SPCE_SELECTION_HPP
#define SPCE_SELECTION_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spce/inputs.hpp"
#include "spce/rng.hpp"

namespace spce {

/// Cross-validation rule: exhaustive leave-one-out or seeded k-fold.
struct CvSpec {
    enum class Kind { LOO, KFold };
    Kind kind{Kind::LOO};
    int k{0};
    std::uint64_t fold_seed{0};

    static CvSpec loo() { return CvSpec{Kind::LOO, 0, 0}; }
    static CvSpec kfold(int k, std::uint64_t fold_seed = 0) {
        if (k < 2) throw std::invalid_argument("CvSpec: kfold requires k >= 2");
        return CvSpec{Kind::KFold, k, fold_seed};
    }
};

/// Sample variance with the 1/(N-1) convention.
inline double sample_variance(const Eigen::VectorXd& y) {
    const Eigen::Index n = y.size();
    if (n < 2) throw std::invalid_argument("sample_variance: n >= 2 required");
    double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(n - 1);
}

namespace detail {

// Thin-QR leverages h_i and fitted values for the active design matrix.
inline void hat_and_fit(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y,
                        Eigen::VectorXd& h, Eigen::VectorXd& fit) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(psi);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(psi.rows(), psi.cols());
    h = q.rowwise().squaredNorm();
    fit = q * (q.transpose() * y);
}

}  // namespace detail

/// Fast leave-one-out error of the OLS fit on the given (active) matrix,
/// relative to the sample variance of y:
/// eps = [(1/N) sum ((y_i - yhat_i)/(1 - h_i))^2] / Var(y).
inline double loo_ols(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
    const Eigen::Index n = psi.rows(), p = psi.cols();
    if (n <= p) throw std::invalid_argument("loo_ols: N > P_active required");
    Eigen::VectorXd h, fit;
    detail::hat_and_fit(psi, y, h, fit);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (h[i] >= 1.0 - 1e-12)
            throw std::runtime_error("loo_ols: degenerate leverage h_i >= 1 - 1e-12");
        double e = (y[i] - fit[i]) / (1.0 - h[i]);
        acc += e * e;
    }
    return (acc / static_cast<double>(n)) / sample_variance(y);
}

/// Modified (corrected) LOO error: eps* = eps_LOO * T with
/// T = N/(N - P_a) * (1 + tr[(Psi_A^T Psi_A)^{-1}]).
inline double modified_loo(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
    const Eigen::Index n = psi.rows(), p = psi.cols();
    if (n <= p) throw std::invalid_argument("modified_loo: N > P_active required");
    double eps = loo_ols(psi, y);
    Eigen::MatrixXd gram = psi.transpose() * psi;
    double trace_inv = gram.ldlt().solve(Eigen::MatrixXd::Identity(p, p)).trace();
    double t = static_cast<double>(n) / static_cast<double>(n - p) * (1.0 + trace_inv);
    return eps * t;
}

/// Correction factor alone (for solvers that combine it with an
/// incrementally maintained plain-LOO value).
inline double modified_loo_factor(Eigen::Index n, Eigen::Index p, double trace_inv) {
    return static_cast<double>(n) / static_cast<double>(n - p) * (1.0 + trace_inv);
}

/// Seeded fold assignment: random permutation split into k near-equal blocks.
inline std::vector<std::vector<int>> make_folds(int n, int k, std::uint64_t fold_seed) {
    if (k < 2 || k > n) throw std::invalid_argument("make_folds: 2 <= k <= N required");
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    RngStream rng(fold_seed);
    rng.shuffle(perm);
    std::vector<std::vector<int>> folds(k);
    for (int i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
    return folds;
}

/// k-fold CV of an arbitrary fitting closure. The closure maps a training
/// (psi, y) pair to a full-length coefficient vector; the return value is
/// the mean held-out squared error normalized by the sample variance of y.
inline double kfold_cv(
    const std::function<Eigen::VectorXd(const Eigen::MatrixXd&, const Eigen::VectorXd&)>& fit,
    const Eigen::MatrixXd& psi, const Eigen::VectorXd& y, const CvSpec& spec) {
    const int n = static_cast<int>(psi.rows());
    const int k = spec.kind == CvSpec::Kind::LOO ? n : spec.k;
    auto folds = make_folds(n, k, spec.fold_seed);
    double var = sample_variance(y);
    double acc = 0.0;
    long count = 0;
    for (const auto& test : folds) {
        if (test.empty()) continue;
        const int ntr = n - static_cast<int>(test.size());
        std::vector<char> is_test(n, 0);
        for (int i : test) is_test[i] = 1;
        Eigen::MatrixXd psi_tr(ntr, psi.cols());
        Eigen::VectorXd y_tr(ntr);
        int r = 0;
        for (int i = 0; i < n; ++i) {
            if (is_test[i]) continue;
            psi_tr.row(r) = psi.row(i);
            y_tr[r] = y[i];
            ++r;
        }
        Eigen::VectorXd c = fit(psi_tr, y_tr);
        for (int i : test) {
            double e = y[i] - psi.row(i).dot(c);
            acc += e * e;
            ++count;
        }
    }
    return (acc / static_cast<double>(count)) / var;
}

/// Relative mean-squared error on a fresh i.i.d. validation sample:
/// sum (y - yhat)^2 / sum (y - ybar)^2 with ybar the validation mean.
inline double relmse(const std::function<double(const Eigen::VectorXd&)>& surrogate,
                     const std::function<double(const Eigen::VectorXd&)>& model,
                     const InputModel& input, int n_val, RngStream& rng) {
    if (n_val < 2) throw std::invalid_argument("relmse: n_val >= 2 required");
    Eigen::MatrixXd x = input.sample_iid(n_val, rng);
    Eigen::VectorXd y(n_val), yhat(n_val);
    for (int i = 0; i < n_val; ++i) {
        Eigen::VectorXd xi = x.row(i).transpose();
        y[i] = model(xi);
        yhat[i] = surrogate(xi);
    }
    double ybar = y.mean();
    double denom = (y.array() - ybar).square().sum();
    if (denom <= 0.0) throw std::runtime_error("relmse: zero validation variance");
    return (y - yhat).squaredNorm() / denom;
}

/// RelMSE from precomputed validation values.
inline double relmse_values(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    double ybar = y.mean();
    double denom = (y.array() - ybar).square().sum();
    if (denom <= 0.0) throw std::runtime_error("relmse: zero validation variance");
    return (y - yhat).squaredNorm() / denom;
}

}  // namespace spce

#endif
