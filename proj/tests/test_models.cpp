#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spce/basis.hpp"
#include "spce/models.hpp"
#include "spce/rng.hpp"

using namespace spce;

TEST_CASE("ishigami point values") {
    Eigen::Vector3d x(0.0, 0.0, 0.0);
    CHECK(ishigami(x) == 0.0);
    x << kPi / 2.0, 0.0, 0.0;
    CHECK(ishigami(x) == Catch::Approx(1.0));
    x << kPi / 2.0, kPi / 2.0, 1.0;
    CHECK(ishigami(x) == Catch::Approx(8.1));
    CHECK_THROWS_AS(ishigami(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("borehole") {
    // central point (marginal medians), frozen reference value
    Eigen::VectorXd x(8);
    x << 0.10, 1400.0, 10950.0, 89335.0, 89.55, 1050.0, 760.0, std::exp(7.71);
    CHECK(borehole(x) == Catch::Approx(70.94751944097906).epsilon(1e-12));

    // linear in the head difference H_u - H_l
    Eigen::VectorXd x2 = x;
    x2[5] = 1050.0 + 2.0 * (1050.0 - 760.0) / 2.0;  // widen the gap
    x2[6] = 760.0 - (1050.0 - 760.0);
    double scale = (x2[5] - x2[6]) / (x[5] - x[6]);
    CHECK(borehole(x2) == Catch::Approx(scale * borehole(x)).epsilon(1e-12));

    // positive over the input distribution (H_u > H_l by construction)
    BenchmarkModel m = make_borehole();
    RngStream rng(1);
    Eigen::MatrixXd xs = m.input.sample_iid(1000, rng);
    for (int i = 0; i < 1000; ++i) {
        double v = m.evaluate(xs.row(i).transpose());
        CHECK(std::isfinite(v));
        CHECK(v > 0.0);
    }

    // violated positivity constraints are detected
    Eigen::VectorXd bad = x;
    bad[0] = -0.1;
    CHECK_THROWS_AS(borehole(bad), std::domain_error);
    bad = x;
    bad[7] = 0.05;  // r <= r_w
    CHECK_THROWS_AS(borehole(bad), std::domain_error);
}

TEST_CASE("hundred_d") {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(100);
    CHECK(hundred_d(ones) == Catch::Approx(-184.33202246057425).epsilon(1e-12));
    CHECK_THROWS_AS(hundred_d(Eigen::VectorXd::Ones(99)), std::invalid_argument);

    // the log argument x^2 + x^4 is at least 2 on the support [1, 3]
    BenchmarkModel m = make_hundred_d();
    RngStream rng(2);
    Eigen::MatrixXd xs = m.input.sample_iid(10000, rng);
    CHECK(xs.minCoeff() >= 1.0);
    double lo = xs.minCoeff();
    CHECK(lo * lo + std::pow(lo, 4) >= 2.0);
    for (int i = 0; i < 10000; ++i)
        REQUIRE(std::isfinite(m.evaluate(xs.row(i).transpose())));
}

TEST_CASE("registry and basis defaults") {
    auto models = registry();
    REQUIRE(models.size() == 3);
    CHECK(models[0].name == "ishigami");
    CHECK(models[1].name == "borehole");
    CHECK(models[2].name == "hundred_d");

    BenchmarkModel ish = model_by_name("ishigami");
    CHECK(ish.d == 3);
    CHECK(enumerate_truncation(ish.d, TruncationSpec(ish.p_default, ish.q)).size() == 680);

    BenchmarkModel hd = model_by_name("hundred_d");
    CHECK(hd.d == 100);
    CHECK(hd.input.marginals[19].param2 == 3.0);  // X20 ~ U(1,3)
    CHECK(hd.input.marginals[0].param2 == 2.0);
    CHECK(enumerate_truncation(hd.d, TruncationSpec(hd.p_default, hd.q)).size() == 5351);

    BenchmarkModel bh = model_by_name("borehole");
    CHECK(bh.input.marginals[0].family == Family::Gaussian);
    CHECK(bh.input.marginals[7].family == Family::Lognormal);

    CHECK_THROWS_AS(model_by_name("nope"), std::invalid_argument);
}

TEST_CASE("model evaluations are pure") {
    for (const auto& m : registry()) {
        RngStream rng(3);
        Eigen::MatrixXd xs = m.input.sample_iid(20, rng);
        for (int i = 0; i < 20; ++i) {
            Eigen::VectorXd xi = xs.row(i).transpose();
            double a = m.evaluate(xi);
            double b = m.evaluate(xi);
            CHECK(a == b);  // bit-identical
        }
    }
}

TEST_CASE("external model adapter") {
    InputModel input({Marginal::uniform(0.0, 1.0), Marginal::uniform(0.0, 1.0)});
    BenchmarkModel ext =
        external_model("sum2", "awk -F, '{print $1+$2}'", input, 2, 1.0, 50);
    CHECK(ext.d == 2);
    Eigen::Vector2d x(0.25, 0.5);
    CHECK(ext.evaluate(x) == Catch::Approx(0.75).epsilon(1e-12));

    BenchmarkModel bad = external_model("broken", "false", input, 2, 1.0, 50);
    CHECK_THROWS_AS(bad.evaluate(x), std::runtime_error);
}
