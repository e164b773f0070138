#ifndef SPCE_RNG_HPP
#define SPCE_RNG_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spce/math.hpp"

namespace spce {

/// Explicit random stream. All randomized operations take an RngStream by
/// reference; there is no global RNG state. Draw implementations avoid the
/// standard-library distribution objects so that a given seed produces the
/// same stream on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Standard normal via inverse-CDF transform of a uniform draw.
    double normal() {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return normal_quantile(u);
    }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::min<std::size_t>(static_cast<std::size_t>(uniform01() * static_cast<double>(n)), n - 1);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    /// Child stream with a seed derived from this stream's seed and a label.
    RngStream derive(const std::string& label) {
        return RngStream(fnv1a(label, engine_()));
    }

private:
    std::mt19937_64 engine_;
};

/// Seed for one benchmark grid cell, derived so that every solver sees the
/// identical experimental design for fixed (model, sampler, N, replication).
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& model,
                                 const std::string& sampler, int n, int replication) {
    std::string key = model + "|" + sampler + "|" + std::to_string(n) + "|" + std::to_string(replication);
    return fnv1a(key, master ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace spce

#endif
