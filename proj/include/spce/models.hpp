#ifndef SPCE_MODELS_HPP
#define SPCE_MODELS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spce/inputs.hpp"

namespace spce {

/// An analytical (or externally evaluated) benchmark model together with
/// its input distribution and default basis settings.
struct BenchmarkModel {
    std::string name;
    int d{0};
    InputModel input;
    std::function<double(const Eigen::VectorXd&)> evaluate;
    int p_default{0};
    int p_small{0};  // smaller basis used by the near-optimal study
    double q{1.0};
    int n_max{0};
};

/// Ishigami: sin(x1) + a sin^2(x2) + b x3^4 sin(x1), a=7, b=0.1.
inline double ishigami(const Eigen::VectorXd& x) {
    if (x.size() != 3) throw std::invalid_argument("ishigami: d = 3 required");
    const double a = 7.0, b = 0.1;
    return std::sin(x[0]) + a * std::sin(x[1]) * std::sin(x[1]) +
           b * std::pow(x[2], 4) * std::sin(x[0]);
}

/// Borehole water-flow model; arguments (r_w, L, K_w, T_u, T_l, H_u, H_l, r).
inline double borehole(const Eigen::VectorXd& x) {
    if (x.size() != 8) throw std::invalid_argument("borehole: d = 8 required");
    const double r_w = x[0], l = x[1], k_w = x[2], t_u = x[3], t_l = x[4];
    const double h_u = x[5], h_l = x[6], r = x[7];
    if (!(r > r_w && r_w > 0.0 && k_w > 0.0 && t_u > 0.0 && t_l > 0.0))
        throw std::domain_error("borehole: inputs violate positivity constraints");
    const double lnr = std::log(r / r_w);
    return 2.0 * kPi * t_u * (h_u - h_l) /
           (lnr * (1.0 + 2.0 * l * t_u / (lnr * r_w * r_w * k_w) + t_u / t_l));
}

/// 100-dimensional analytical function: index-weighted sums plus four
/// interaction terms; natural log in the log term.
inline double hundred_d(const Eigen::VectorXd& x) {
    const int d = static_cast<int>(x.size());
    if (d != 100) throw std::invalid_argument("hundred_d: d = 100 required");
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int i = 1; i <= d; ++i) {
        double xi = x[i - 1];
        s1 += i * xi;
        s2 += i * xi * xi * xi;
        s3 += i * std::log(xi * xi + std::pow(xi, 4));
    }
    return 3.0 - 5.0 / d * s1 + s2 / d + s3 / (3.0 * d) + x[0] * x[1] * x[1] +
           x[1] * x[3] - x[2] * x[4] + x[50] + x[49] * x[53] * x[53];
}

inline BenchmarkModel make_ishigami() {
    BenchmarkModel m;
    m.name = "ishigami";
    m.d = 3;
    m.input = InputModel({Marginal::uniform(-kPi, kPi), Marginal::uniform(-kPi, kPi),
                          Marginal::uniform(-kPi, kPi)});
    m.evaluate = ishigami;
    m.p_default = 14;
    m.p_small = 12;
    m.q = 1.0;
    m.n_max = 200;
    return m;
}

inline BenchmarkModel make_borehole() {
    BenchmarkModel m;
    m.name = "borehole";
    m.d = 8;
    // N(0.10, 0.0161812): the second parameter is the standard deviation;
    // Lognormal(7.71, 1.0056): underlying-Gaussian mean and std.
    m.input = InputModel({Marginal::gaussian(0.10, 0.0161812),
                          Marginal::uniform(1120.0, 1680.0),
                          Marginal::uniform(9855.0, 12045.0),
                          Marginal::uniform(63070.0, 115600.0),
                          Marginal::uniform(63.1, 116.0),
                          Marginal::uniform(990.0, 1110.0),
                          Marginal::uniform(700.0, 820.0),
                          Marginal::lognormal(7.71, 1.0056)});
    m.evaluate = borehole;
    m.p_default = 5;
    m.p_small = 4;
    m.q = 1.0;
    m.n_max = 300;
    return m;
}

inline BenchmarkModel make_hundred_d() {
    BenchmarkModel m;
    m.name = "hundred_d";
    m.d = 100;
    std::vector<Marginal> ms;
    for (int i = 1; i <= 100; ++i)
        ms.push_back(i == 20 ? Marginal::uniform(1.0, 3.0) : Marginal::uniform(1.0, 2.0));
    m.input = InputModel(std::move(ms));
    m.evaluate = hundred_d;
    m.p_default = 4;
    m.p_small = 4;
    m.q = 0.5;
    m.n_max = 1400;
    return m;
}

/// The in-scope analytical models. User models can be appended with the
/// same BenchmarkModel contract (e.g. via external_model).
inline std::vector<BenchmarkModel> registry() {
    return {make_ishigami(), make_borehole(), make_hundred_d()};
}

inline BenchmarkModel model_by_name(const std::string& name) {
    for (auto& m : registry())
        if (m.name == name) return m;
    throw std::invalid_argument("unknown model: " + name);
}

/// Adapter for external simulators: the command receives one CSV row of
/// inputs per line on stdin and must print one scalar per line on stdout.
inline BenchmarkModel external_model(const std::string& name, const std::string& command,
                                     InputModel input, int p, double q, int n_max) {
    BenchmarkModel m;
    m.name = name;
    m.d = input.dimension();
    m.input = std::move(input);
    m.p_default = m.p_small = p;
    m.q = q;
    m.n_max = n_max;
    m.evaluate = [command](const Eigen::VectorXd& x) {
        std::string in_path = "/tmp/spce_ext_in_" + std::to_string(::getpid()) + ".csv";
        std::string out_path = "/tmp/spce_ext_out_" + std::to_string(::getpid()) + ".txt";
        {
            std::ofstream f(in_path);
            f.precision(17);
            for (int j = 0; j < x.size(); ++j) f << (j ? "," : "") << x[j];
            f << "\n";
        }
        std::string cmd = command + " < " + in_path + " > " + out_path;
        int rc = std::system(cmd.c_str());
        if (rc != 0) throw std::runtime_error("external model command failed: " + command);
        std::ifstream f(out_path);
        double v;
        if (!(f >> v)) throw std::runtime_error("external model produced no output");
        std::remove(in_path.c_str());
        std::remove(out_path.c_str());
        return v;
    };
    return m;
}

}  // namespace spce

#endif
