#pragma once

#include <vector>

#include "roirank/layers.hpp"

namespace roirank {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. L2 regularization enters as a gradient-side
/// penalty 2 * l2_factor * w for parameters that are not decay_exempt.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Requires every parameter's grad to be populated; zeroes grads after
    /// applying the update.
    void step(std::vector<Parameter>& params, double l2_factor);

    std::size_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::size_t step_count_ = 0;
    std::vector<Tensor> first_moment_;
    std::vector<Tensor> second_moment_;
};

}  // namespace roirank
