#ifndef SPCE_INPUTS_HPP
#define SPCE_INPUTS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spce/math.hpp"
#include "spce/rng.hpp"

namespace spce {

enum class Family { Uniform, Gaussian, Lognormal };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Uniform: return "uniform";
        case Family::Gaussian: return "gaussian";
        case Family::Lognormal: return "lognormal";
    }
    return "?";
}

/// One independent marginal distribution.
///
/// Parameters (param1, param2) by family:
///   Uniform(a, b)          -- bounds, a < b
///   Gaussian(mu, sigma)    -- mean and standard deviation
///   Lognormal(lambda, zeta)-- mean and std of the underlying Gaussian
///
/// Standardized-space conventions: Uniform maps affinely to [-1,1]
/// (Legendre domain); Gaussian and Lognormal map to the standard normal
/// (Hermite domain).
struct Marginal {
    Family family{Family::Uniform};
    double param1{0.0};
    double param2{1.0};

    static Marginal uniform(double a, double b) {
        if (!(a < b)) throw std::invalid_argument("Uniform marginal requires a < b");
        return Marginal{Family::Uniform, a, b};
    }
    static Marginal gaussian(double mu, double sigma) {
        if (!(sigma > 0.0)) throw std::invalid_argument("Gaussian marginal requires sigma > 0");
        return Marginal{Family::Gaussian, mu, sigma};
    }
    static Marginal lognormal(double lambda, double zeta) {
        if (!(zeta > 0.0)) throw std::invalid_argument("Lognormal marginal requires zeta > 0");
        return Marginal{Family::Lognormal, lambda, zeta};
    }

    bool in_support(double x) const {
        switch (family) {
            case Family::Uniform: return x >= param1 && x <= param2;
            case Family::Gaussian: return std::isfinite(x);
            case Family::Lognormal: return x > 0.0;
        }
        return false;
    }

    double pdf(double x) const {
        switch (family) {
            case Family::Uniform:
                return (x >= param1 && x <= param2) ? 1.0 / (param2 - param1) : 0.0;
            case Family::Gaussian:
                return normal_pdf((x - param1) / param2) / param2;
            case Family::Lognormal:
                if (x <= 0.0) return 0.0;
                return normal_pdf((std::log(x) - param1) / param2) / (param2 * x);
        }
        return 0.0;
    }

    double cdf(double x) const {
        switch (family) {
            case Family::Uniform:
                if (x <= param1) return 0.0;
                if (x >= param2) return 1.0;
                return (x - param1) / (param2 - param1);
            case Family::Gaussian:
                return normal_cdf((x - param1) / param2);
            case Family::Lognormal:
                if (x <= 0.0) return 0.0;
                return normal_cdf((std::log(x) - param1) / param2);
        }
        return 0.0;
    }

    double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("quantile: q outside [0,1]");
        switch (family) {
            case Family::Uniform:
                return param1 + q * (param2 - param1);
            case Family::Gaussian:
                return param1 + param2 * normal_quantile(q);
            case Family::Lognormal:
                return std::exp(param1 + param2 * normal_quantile(q));
        }
        return 0.0;
    }

    double sample(RngStream& rng) const {
        switch (family) {
            case Family::Uniform:
                return rng.uniform(param1, param2);
            case Family::Gaussian:
                return param1 + param2 * rng.normal();
            case Family::Lognormal:
                return std::exp(param1 + param2 * rng.normal());
        }
        return 0.0;
    }

    /// Physical -> standardized coordinate.
    double to_standard(double x) const {
        if (!in_support(x)) {
            throw std::domain_error("to_standard: point outside marginal support");
        }
        switch (family) {
            case Family::Uniform:
                return 2.0 * (x - param1) / (param2 - param1) - 1.0;
            case Family::Gaussian:
                return (x - param1) / param2;
            case Family::Lognormal:
                return (std::log(x) - param1) / param2;
        }
        return 0.0;
    }

    /// Standardized -> physical coordinate. Exact inverse of to_standard.
    double from_standard(double u) const {
        switch (family) {
            case Family::Uniform:
                return param1 + 0.5 * (u + 1.0) * (param2 - param1);
            case Family::Gaussian:
                return param1 + param2 * u;
            case Family::Lognormal:
                return std::exp(param1 + param2 * u);
        }
        return 0.0;
    }

    /// True when the standardized variable is standard normal (Hermite basis).
    bool is_gaussian_type() const { return family != Family::Uniform; }
};

/// Vector of independent marginals; joint density is the product.
struct InputModel {
    std::vector<Marginal> marginals;

    InputModel() = default;
    explicit InputModel(std::vector<Marginal> m) : marginals(std::move(m)) {
        if (marginals.empty()) throw std::invalid_argument("InputModel requires d >= 1");
    }

    int dimension() const { return static_cast<int>(marginals.size()); }

    /// n i.i.d. draws from the joint density, one physical-space point per row.
    Eigen::MatrixXd sample_iid(int n, RngStream& rng) const {
        if (n < 1) throw std::invalid_argument("sample_iid: n >= 1 required");
        Eigen::MatrixXd x(n, dimension());
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < dimension(); ++j) x(i, j) = marginals[j].sample(rng);
        return x;
    }

    Eigen::VectorXd to_standard(const Eigen::VectorXd& x) const {
        check_dim(x.size());
        Eigen::VectorXd u(x.size());
        for (int j = 0; j < x.size(); ++j) u[j] = marginals[j].to_standard(x[j]);
        return u;
    }

    Eigen::VectorXd from_standard(const Eigen::VectorXd& u) const {
        check_dim(u.size());
        Eigen::VectorXd x(u.size());
        for (int j = 0; j < u.size(); ++j) x[j] = marginals[j].from_standard(u[j]);
        return x;
    }

    Eigen::MatrixXd to_standard(const Eigen::MatrixXd& x) const {
        check_dim(x.cols());
        Eigen::MatrixXd u(x.rows(), x.cols());
        for (int i = 0; i < x.rows(); ++i)
            for (int j = 0; j < x.cols(); ++j) u(i, j) = marginals[j].to_standard(x(i, j));
        return u;
    }

    Eigen::MatrixXd from_standard(const Eigen::MatrixXd& u) const {
        check_dim(u.cols());
        Eigen::MatrixXd x(u.rows(), u.cols());
        for (int i = 0; i < u.rows(); ++i)
            for (int j = 0; j < u.cols(); ++j) x(i, j) = marginals[j].from_standard(u(i, j));
        return x;
    }

    /// Product of marginal densities; 0 outside support.
    double joint_pdf(const Eigen::VectorXd& x) const {
        check_dim(x.size());
        double p = 1.0;
        for (int j = 0; j < x.size(); ++j) p *= marginals[j].pdf(x[j]);
        return p;
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& m : marginals) {
            arr.push_back({{"family", family_name(m.family)}, {"params", {m.param1, m.param2}}});
        }
        return arr;
    }

    static InputModel from_json(const nlohmann::json& arr) {
        std::vector<Marginal> ms;
        for (const auto& item : arr) {
            std::string fam = item.at("family").get<std::string>();
            double p1 = item.at("params").at(0).get<double>();
            double p2 = item.at("params").at(1).get<double>();
            if (fam == "uniform") ms.push_back(Marginal::uniform(p1, p2));
            else if (fam == "gaussian") ms.push_back(Marginal::gaussian(p1, p2));
            else if (fam == "lognormal") ms.push_back(Marginal::lognormal(p1, p2));
            else throw std::invalid_argument("unknown marginal family: " + fam);
        }
        return InputModel(std::move(ms));
    }

private:
    void check_dim(Eigen::Index d) const {
        if (d != dimension()) throw std::invalid_argument("point dimension mismatch");
    }
};

}  // namespace spce

#endif
