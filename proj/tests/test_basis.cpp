#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "spce/basis.hpp"

using namespace spce;

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence; weights are the squared first
// eigenvector components (times the measure's total mass, which is 1 for
// the probability measures used here).
void golub_welsch(int n, const std::vector<double>& offdiag, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) jac(k, k + 1) = jac(k + 1, k) = offdiag[k];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()[i];
        double v = es.eigenvectors()(0, i);
        weights[i] = v * v;
    }
}

// Uniform[-1,1] measure: monic Legendre recurrence, b_k = k/sqrt(4k^2-1).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    std::vector<double> b(n - 1);
    for (int k = 1; k < n; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(n, b, nodes, weights);
}

// Standard normal measure: probabilists' Hermite recurrence, b_k = sqrt(k).
void gauss_hermite_prob(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    std::vector<double> b(n - 1);
    for (int k = 1; k < n; ++k) b[k - 1] = std::sqrt(static_cast<double>(k));
    golub_welsch(n, b, nodes, weights);
}

}  // namespace

TEST_CASE("univariate_eval spot values") {
    CHECK(univariate_eval(PolyFamily::Legendre, 0, 0.37) == 1.0);
    CHECK(univariate_eval(PolyFamily::Legendre, 1, 1.0) == Catch::Approx(std::sqrt(3.0)));
    CHECK(univariate_eval(PolyFamily::Hermite, 2, 0.0) == Catch::Approx(-1.0 / std::sqrt(2.0)));
    CHECK_THROWS_AS(univariate_eval(PolyFamily::Legendre, -1, 0.0), std::invalid_argument);
}

TEST_CASE("orthonormality under Gauss quadrature") {
    std::vector<double> nodes, weights;
    gauss_legendre(40, nodes, weights);
    for (int j = 0; j <= 10; ++j) {
        for (int k = j; k <= 10; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                acc += weights[i] * univariate_eval(PolyFamily::Legendre, j, nodes[i]) *
                       univariate_eval(PolyFamily::Legendre, k, nodes[i]);
            CHECK(acc == Catch::Approx(j == k ? 1.0 : 0.0).margin(1e-10));
        }
    }
    gauss_hermite_prob(40, nodes, weights);
    for (int j = 0; j <= 10; ++j) {
        for (int k = j; k <= 10; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                acc += weights[i] * univariate_eval(PolyFamily::Hermite, j, nodes[i]) *
                       univariate_eval(PolyFamily::Hermite, k, nodes[i]);
            CHECK(acc == Catch::Approx(j == k ? 1.0 : 0.0).margin(1e-10));
        }
    }
}

TEST_CASE("univariate_eval_all matches univariate_eval") {
    std::vector<double> out(21);
    for (double u : {-0.9, 0.0, 0.3, 2.5}) {
        for (PolyFamily fam : {PolyFamily::Legendre, PolyFamily::Hermite}) {
            univariate_eval_all(fam, 20, u, out.data());
            for (int k = 0; k <= 20; ++k)
                CHECK(out[k] == Catch::Approx(univariate_eval(fam, k, u)).margin(1e-12));
        }
    }
}

TEST_CASE("enumerate_truncation examples") {
    auto set = enumerate_truncation(2, TruncationSpec(2, 1.0));
    REQUIRE(set.size() == 6);
    std::vector<MultiIndex> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    CHECK(set.indices == expect);

    auto hyper = enumerate_truncation(2, TruncationSpec(2, 0.5));
    REQUIRE(hyper.size() == 5);
    const MultiIndex excluded{1, 1};
    for (const auto& a : hyper.indices) CHECK(a != excluded);

    CHECK(enumerate_truncation(3, TruncationSpec(14, 1.0)).size() == 680);
}

TEST_CASE("truncation cardinality and monotonicity") {
    RngStream rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        int d = 1 + static_cast<int>(rng.index(8));
        int p = static_cast<int>(rng.index(9));
        auto set = enumerate_truncation(d, TruncationSpec(p, 1.0));
        CHECK(set.size() == static_cast<int>(binom(d + p, p)));
    }
    // A^{p,q1} subset of A^{p,q2} for q1 <= q2; A^{p,q} subset of A^{p+1,q}
    auto to_set = [](const MultiIndexSet& s) {
        return std::set<MultiIndex>(s.indices.begin(), s.indices.end());
    };
    auto s_q1 = to_set(enumerate_truncation(3, TruncationSpec(4, 0.4)));
    auto s_q2 = to_set(enumerate_truncation(3, TruncationSpec(4, 0.8)));
    auto s_p1 = to_set(enumerate_truncation(3, TruncationSpec(5, 0.4)));
    for (const auto& a : s_q1) {
        CHECK(s_q2.count(a) == 1);
        CHECK(s_p1.count(a) == 1);
    }
    // interaction-order cap
    auto r2 = enumerate_truncation(4, TruncationSpec(3, 1.0, 2));
    for (const auto& a : r2.indices) CHECK(interaction_order(a) <= 2);
}

TEST_CASE("truncation contains zero index, no duplicates, all admissible") {
    auto set = enumerate_truncation(4, TruncationSpec(5, 0.75, 3));
    std::set<MultiIndex> uniq(set.indices.begin(), set.indices.end());
    CHECK(uniq.size() == set.indices.size());
    CHECK(uniq.count(MultiIndex(4, 0)) == 1);
    for (const auto& a : set.indices) {
        double qn = 0.0;
        for (int v : a) qn += std::pow(static_cast<double>(v), 0.75);
        CHECK(std::pow(qn, 1.0 / 0.75) <= 5.0 + 1e-9);
        CHECK(interaction_order(a) <= 3);
    }
}

TEST_CASE("assemble") {
    auto set = enumerate_truncation(2, TruncationSpec(1, 1.0));
    std::vector<PolyFamily> fams{PolyFamily::Legendre, PolyFamily::Legendre};
    Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(1, 2);
    Eigen::MatrixXd psi = assemble(fams, set, pts);
    REQUIRE(psi.rows() == 1);
    REQUIRE(psi.cols() == 3);
    CHECK(psi(0, 0) == 1.0);
    CHECK(psi(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(psi(0, 2) == Catch::Approx(0.0).margin(1e-15));

    // constant column all-ones; Monte Carlo Gram -> identity
    RngStream rng(8);
    auto set2 = enumerate_truncation(2, TruncationSpec(3, 1.0));
    const int n = 100000;
    Eigen::MatrixXd u(n, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) u(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::MatrixXd psi2 = assemble(fams, set2, u);
    CHECK((psi2.col(0).array() == 1.0).all());
    Eigen::MatrixXd gram = psi2.transpose() * psi2 / n;
    Eigen::MatrixXd err = gram - Eigen::MatrixXd::Identity(set2.size(), set2.size());
    CHECK(err.cwiseAbs().maxCoeff() < 0.05);

    CHECK_THROWS_AS(assemble(fams, set, Eigen::MatrixXd::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("assemble permutation equivariance") {
    RngStream rng(21);
    auto set = enumerate_truncation(3, TruncationSpec(2, 1.0));
    std::vector<PolyFamily> fams(3, PolyFamily::Hermite);
    Eigen::MatrixXd u(7, 3);
    for (int i = 0; i < u.size(); ++i) u(i / 3, i % 3) = rng.normal();
    Eigen::MatrixXd psi = assemble(fams, set, u);
    Eigen::MatrixXd rev = u.colwise().reverse();
    Eigen::MatrixXd psir = assemble(fams, set, rev);
    CHECK((psir - psi.colwise().reverse()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tight_bound_B and empirical coherence") {
    MultiIndexSet zero_only;
    zero_only.dim = 1;
    zero_only.indices = {MultiIndex{0}};
    std::vector<PolyFamily> leg{PolyFamily::Legendre};
    Eigen::VectorXd u(1);
    u << 0.42;
    CHECK(tight_bound_B(zero_only, leg, u) == 1.0);

    auto p1 = enumerate_truncation(1, TruncationSpec(1, 1.0));
    u << 1.0;
    CHECK(tight_bound_B(p1, leg, u) == Catch::Approx(std::sqrt(3.0)));

    RngStream rng(3);
    auto set = enumerate_truncation(2, TruncationSpec(4, 1.0));
    std::vector<PolyFamily> fams{PolyFamily::Legendre, PolyFamily::Hermite};
    for (int i = 0; i < 50; ++i) {
        Eigen::VectorXd v(2);
        v << rng.uniform(-1.0, 1.0), rng.normal();
        CHECK(tight_bound_B(set, fams, v) >= 1.0);
    }

    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    CHECK(empirical_coherence(p1, leg, pts) == Catch::Approx(3.0));
    MultiIndexSet z1 = zero_only;
    CHECK(empirical_coherence(z1, leg, pts) == 1.0);
}

TEST_CASE("MultiIndexSet JSON") {
    auto set = enumerate_truncation(2, TruncationSpec(1, 1.0));
    auto j = set.to_json();
    REQUIRE(j.is_array());
    CHECK(j.size() == 3);
    CHECK(j[0] == nlohmann::json::array({0, 0}));
}
