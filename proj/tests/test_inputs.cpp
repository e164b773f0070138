#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "spce/inputs.hpp"

using namespace spce;

namespace {

// One-sample Kolmogorov-Smirnov statistic against a marginal's CDF.
double ks_statistic(std::vector<double> xs, const Marginal& m) {
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double c = m.cdf(xs[i]);
        d = std::max(d, std::max(std::abs(c - i / n), std::abs(c - (i + 1) / n)));
    }
    return d;
}

}  // namespace

TEST_CASE("marginal parameter validation") {
    CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Marginal::uniform(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Marginal::gaussian(0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Marginal::lognormal(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("marginal pdf integrates to one") {
    auto integrate = [](const Marginal& m, double lo, double hi) {
        const int n = 200000;
        double h = (hi - lo) / n, acc = 0.0;
        for (int i = 0; i <= n; ++i)
            acc += m.pdf(lo + i * h) * ((i == 0 || i == n) ? 0.5 : 1.0);
        return acc * h;
    };
    CHECK(integrate(Marginal::uniform(-2.0, 5.0), -2.0, 5.0) == Catch::Approx(1.0).margin(1e-6));
    CHECK(integrate(Marginal::gaussian(1.0, 2.0), -19.0, 21.0) == Catch::Approx(1.0).margin(1e-6));
    CHECK(integrate(Marginal::lognormal(0.5, 0.8), 1e-9, 200.0) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("sample_iid basics") {
    RngStream rng(11);
    InputModel uni({Marginal::uniform(0.0, 1.0)});
    auto x = uni.sample_iid(10000, rng);
    // LLN bound: 3 sigma of the sample mean of U(0,1)
    CHECK(std::abs(x.mean() - 0.5) < 3.0 * (1.0 / std::sqrt(12.0)) / 100.0);

    InputModel gauss({Marginal::gaussian(0.0, 1.0)});
    RngStream a(99), b(99);
    CHECK(gauss.sample_iid(1, a)(0, 0) == gauss.sample_iid(1, b)(0, 0));

    InputModel logn({Marginal::lognormal(7.71, 1.0056)});
    RngStream rng2(5);
    auto xs = logn.sample_iid(1000, rng2);
    CHECK(xs.minCoeff() > 0.0);
}

TEST_CASE("to_standard and from_standard pointwise") {
    InputModel m({Marginal::uniform(-kPi, kPi)});
    CHECK(m.marginals[0].to_standard(0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(Marginal::gaussian(2.0, 3.0).to_standard(5.0) == Catch::Approx(1.0));
    CHECK(Marginal::lognormal(0.0, 1.0).to_standard(std::exp(1.0)) == Catch::Approx(1.0));
    CHECK(Marginal::uniform(0.0, 2.0).from_standard(-1.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(Marginal::gaussian(0.0, 1.0).from_standard(0.0) == 0.0);
    CHECK(Marginal::lognormal(1.0, 2.0).from_standard(0.0) == Catch::Approx(std::exp(1.0)));
}

TEST_CASE("to_standard domain errors") {
    CHECK_THROWS_AS(Marginal::uniform(0.0, 1.0).to_standard(2.0), std::domain_error);
    CHECK_THROWS_AS(Marginal::lognormal(0.0, 1.0).to_standard(-1.0), std::domain_error);
}

TEST_CASE("transform round trip, random parameters and points") {
    RngStream rng(314);
    for (int trial = 0; trial < 200; ++trial) {
        double a = rng.uniform(-5.0, 5.0);
        Marginal m;
        switch (trial % 3) {
            case 0: m = Marginal::uniform(a, a + rng.uniform(0.1, 10.0)); break;
            case 1: m = Marginal::gaussian(a, rng.uniform(0.1, 4.0)); break;
            default: m = Marginal::lognormal(a, rng.uniform(0.1, 2.0)); break;
        }
        double x = m.sample(rng);
        double back = m.from_standard(m.to_standard(x));
        CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
    }
}

TEST_CASE("joint pdf") {
    InputModel sq({Marginal::uniform(0.0, 1.0), Marginal::uniform(0.0, 1.0)});
    Eigen::Vector2d p(0.3, 0.7);
    CHECK(sq.joint_pdf(p) == Catch::Approx(1.0));
    InputModel u({Marginal::uniform(0.0, 1.0)});
    Eigen::VectorXd out(1);
    out << 2.0;
    CHECK(u.joint_pdf(out) == 0.0);
    InputModel g({Marginal::gaussian(0.0, 1.0)});
    Eigen::VectorXd zero(1);
    zero << 0.0;
    CHECK(g.joint_pdf(zero) == Catch::Approx(1.0 / std::sqrt(2.0 * kPi)));
}

TEST_CASE("KS statistic of iid samples under each family") {
    const int n = 10000;
    RngStream rng(2718);
    for (const Marginal& m : {Marginal::uniform(-1.0, 3.0), Marginal::gaussian(0.5, 1.5),
                              Marginal::lognormal(0.2, 0.7)}) {
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) xs[i] = m.sample(rng);
        CHECK(ks_statistic(xs, m) < 0.02);
    }
}

TEST_CASE("quantile inverts cdf") {
    RngStream rng(77);
    for (const Marginal& m : {Marginal::uniform(-1.0, 3.0), Marginal::gaussian(0.5, 1.5),
                              Marginal::lognormal(0.2, 0.7)}) {
        for (int i = 0; i < 50; ++i) {
            double q = rng.uniform(0.001, 0.999);
            CHECK(m.cdf(m.quantile(q)) == Catch::Approx(q).margin(1e-10));
        }
    }
}

TEST_CASE("InputModel JSON round trip") {
    InputModel m({Marginal::uniform(-kPi, kPi), Marginal::gaussian(0.10, 0.0161812),
                  Marginal::lognormal(7.71, 1.0056)});
    auto j = m.to_json();
    InputModel back = InputModel::from_json(j);
    REQUIRE(back.dimension() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.marginals[i].family == m.marginals[i].family);
        CHECK(back.marginals[i].param1 == m.marginals[i].param1);
        CHECK(back.marginals[i].param2 == m.marginals[i].param2);
    }
    CHECK_THROWS_AS(InputModel::from_json(nlohmann::json::array(
                        {{{"family", "gumbel"}, {"params", {0.0, 1.0}}}})),
                    std::invalid_argument);
}
