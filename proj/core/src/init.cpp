#include "roirank/init.hpp"

#include <cmath>

namespace roirank {

double Rng::normal() {
    // Box-Muller; u1 nudged away from 0 so log stays finite.
    double u1 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny vs 2^64, bias negligible,
    // and determinism is what matters.
    return next_u64() % n;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    Rng r(seed ^ (salt * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL));
    return r.next_u64();
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& salt) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : salt) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return mix_seed(seed, h);
}

Tensor xavier_init(const std::vector<std::size_t>& shape, std::size_t fan_in,
                   std::size_t fan_out, Rng& rng) {
    if (fan_in < 1 || fan_out < 1) {
        throw ConfigError("xavier_init: fan_in and fan_out must be >= 1");
    }
    Tensor t(shape);
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values()) v = rng.uniform(-a, a);
    return t;
}

}  // namespace roirank
