#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spce/rng.hpp"
#include "spce/selection.hpp"

using namespace spce;

namespace {

Eigen::MatrixXd gaussian_matrix(int n, int p, RngStream& rng) {
    Eigen::MatrixXd m(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = rng.normal();
    return m;
}

// LOO by literal refitting, for the oracle comparison.
double loo_brute(const Eigen::MatrixXd& psi, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(psi.rows());
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        Eigen::MatrixXd a(n - 1, psi.cols());
        Eigen::VectorXd b(n - 1);
        int r = 0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            a.row(r) = psi.row(j);
            b[r] = y[j];
            ++r;
        }
        Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
        double e = y[i] - psi.row(i).dot(c);
        acc += e * e;
    }
    return (acc / n) / sample_variance(y);
}

}  // namespace

TEST_CASE("sample_variance") {
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, 3.0;
    CHECK(sample_variance(y) == Catch::Approx(1.0));
    CHECK_THROWS_AS(sample_variance(Eigen::VectorXd::Ones(1)), std::invalid_argument);
}

TEST_CASE("loo_ols intercept-only model") {
    // with a constant column, the LOO residual for point i is
    // (y_i - ybar) * N/(N-1); dividing by Var(y) gives a closed form.
    Eigen::VectorXd y(5);
    y << 1.0, 4.0, 2.0, 8.0, 5.0;
    const int n = 5;
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    double ybar = y.mean();
    double expect = 0.0;
    for (int i = 0; i < n; ++i) {
        double e = (y[i] - ybar) * n / (n - 1.0);
        expect += e * e;
    }
    expect = (expect / n) / sample_variance(y);
    CHECK(loo_ols(ones, y) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("loo_ols requires N > P and non-degenerate leverages") {
    RngStream rng(1);
    Eigen::MatrixXd sq = gaussian_matrix(4, 4, rng);
    CHECK_THROWS_AS(loo_ols(sq, Eigen::VectorXd::Ones(4)), std::invalid_argument);
    // an identity block makes h_i = 1 for the first rows
    Eigen::MatrixXd deg = Eigen::MatrixXd::Zero(5, 2);
    deg(0, 0) = 1.0;
    deg(1, 1) = 1.0;
    Eigen::VectorXd y(5);
    y << 1.0, 2.0, 3.0, 4.0, 5.0;
    CHECK_THROWS_AS(loo_ols(deg, y), std::runtime_error);
}

TEST_CASE("loo_ols matches brute-force refitting") {
    for (int trial = 0; trial < 10; ++trial) {
        RngStream rng(100 + trial);
        Eigen::MatrixXd psi = gaussian_matrix(12, 3, rng);
        Eigen::VectorXd y = gaussian_matrix(12, 1, rng);
        CHECK(loo_ols(psi, y) == Catch::Approx(loo_brute(psi, y)).epsilon(1e-10));
    }
}

TEST_CASE("modified_loo correction factor") {
    // orthonormal columns: tr[(Psi^T Psi)^{-1}] = P, so T = N/(N-P)(1 + P).
    // Columns of an identity block scaled to have unit norm are orthonormal
    // but have degenerate leverages; instead scale a Haar-like Q.
    RngStream rng(2);
    Eigen::MatrixXd a = gaussian_matrix(20, 4, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(20, 4);
    Eigen::VectorXd y = gaussian_matrix(20, 1, rng);
    double t = 20.0 / (20.0 - 4.0) * (1.0 + 4.0);
    CHECK(modified_loo(q, y) == Catch::Approx(loo_ols(q, y) * t).epsilon(1e-10));

    // T > 1 always, so modified >= plain
    Eigen::MatrixXd psi = gaussian_matrix(15, 3, rng);
    Eigen::VectorXd y2 = gaussian_matrix(15, 1, rng);
    CHECK(modified_loo(psi, y2) > loo_ols(psi, y2));

    // factor approaches 1 as N grows with fixed, well-conditioned columns
    double t_small = modified_loo_factor(20, 1, 1.0 / 20.0);
    double t_big = modified_loo_factor(20000, 1, 1.0 / 20000.0);
    CHECK(t_big < t_small);
    CHECK(t_big == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("make_folds") {
    auto folds = make_folds(10, 3, 42);
    CHECK(folds.size() == 3);
    std::vector<int> seen;
    for (const auto& f : folds) {
        CHECK(std::abs(static_cast<int>(f.size()) - 10 / 3) <= 1);
        for (int i : f) seen.push_back(i);
    }
    std::sort(seen.begin(), seen.end());
    for (int i = 0; i < 10; ++i) CHECK(seen[i] == i);
    CHECK(make_folds(10, 3, 42) == make_folds(10, 3, 42));
    CHECK(make_folds(10, 3, 42) != make_folds(10, 3, 43));
    CHECK_THROWS_AS(make_folds(5, 6, 0), std::invalid_argument);
}

TEST_CASE("kfold_cv") {
    auto ols_fit = [](const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
        return Eigen::VectorXd(a.colPivHouseholderQr().solve(b));
    };
    RngStream rng(3);
    Eigen::MatrixXd psi = gaussian_matrix(14, 3, rng);
    Eigen::VectorXd y = gaussian_matrix(14, 1, rng);

    // k = N is exactly LOO
    CHECK(kfold_cv(ols_fit, psi, y, CvSpec::kfold(14)) ==
          Catch::Approx(loo_ols(psi, y)).epsilon(1e-10));
    CHECK(kfold_cv(ols_fit, psi, y, CvSpec::loo()) ==
          Catch::Approx(loo_ols(psi, y)).epsilon(1e-10));

    // a constant-mean closure scores about 1 (errors the size of Var(y))
    auto mean_fit = [&psi](const Eigen::MatrixXd&, const Eigen::VectorXd& b) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(psi.cols());
        (void)b;
        return c;
    };
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(14, 1);
    auto const_fit = [](const Eigen::MatrixXd&, const Eigen::VectorXd& b) {
        Eigen::VectorXd c(1);
        c << b.mean();
        return c;
    };
    double score = kfold_cv(const_fit, ones, y, CvSpec::kfold(7, 5));
    CHECK(score == Catch::Approx(1.0).epsilon(0.6));
    (void)mean_fit;

    // deterministic in the fold seed
    CHECK(kfold_cv(ols_fit, psi, y, CvSpec::kfold(5, 9)) ==
          kfold_cv(ols_fit, psi, y, CvSpec::kfold(5, 9)));
}

TEST_CASE("relmse") {
    // exact surrogate: error 0
    InputModel input({Marginal::uniform(0.0, 1.0)});
    auto f = [](const Eigen::VectorXd& x) { return 3.0 * x[0] + 1.0; };
    RngStream rng(4);
    CHECK(relmse(f, f, input, 1000, rng) == 0.0);

    // predicting the mean: error about 1
    auto mean_pred = [](const Eigen::VectorXd&) { return 2.5; };
    double e = relmse(mean_pred, f, input, 100000, rng);
    CHECK(e == Catch::Approx(1.0).epsilon(0.02));

    CHECK_THROWS_AS(relmse(f, f, input, 1, rng), std::invalid_argument);

    Eigen::VectorXd y(3), yhat(3);
    y << 1.0, 2.0, 3.0;
    yhat << 1.0, 2.0, 4.0;
    CHECK(relmse_values(y, yhat) == Catch::Approx(0.5));
    CHECK(relmse_values(y, y) == 0.0);
}

TEST_CASE("relmse is invariant to affine transforms of the response") {
    InputModel input({Marginal::gaussian(0.0, 1.0)});
    auto f = [](const Eigen::VectorXd& x) { return x[0] * x[0]; };
    auto g = [](const Eigen::VectorXd& x) { return x[0] * x[0] + 0.1 * x[0]; };
    auto af = [&](const Eigen::VectorXd& x) { return 5.0 * f(x) - 2.0; };
    auto ag = [&](const Eigen::VectorXd& x) { return 5.0 * g(x) - 2.0; };
    RngStream r1(5), r2(5);
    double e1 = relmse(g, f, input, 20000, r1);
    double e2 = relmse(ag, af, input, 20000, r2);
    CHECK(e1 == Catch::Approx(e2).epsilon(1e-10));
}
