#pragma once

#include <cstdint>
#include <string>

#include "roirank/tensor.hpp"

namespace roirank {

/// Deterministic 64-bit generator (splitmix64). Self-contained so streams
/// are bit-identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached spare; keeps streams simple).
    double normal();

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t state_;
};

/// Stable seed derivation for fold / ROI / epoch sub-streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t mix_seed(std::uint64_t seed, const std::string& salt);

/// Uniform Xavier/Glorot: values in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_init(const std::vector<std::size_t>& shape, std::size_t fan_in,
                   std::size_t fan_out, Rng& rng);

}  // namespace roirank
