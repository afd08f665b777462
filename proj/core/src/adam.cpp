#include "roirank/adam.hpp"

#include <cmath>

namespace roirank {

void Adam::step(std::vector<Parameter>& params, double l2_factor) {
    if (first_moment_.empty()) {
        for (const auto& p : params) {
            first_moment_.push_back(Tensor::zeros_like(p.node->value));
            second_moment_.push_back(Tensor::zeros_like(p.node->value));
        }
    }
    if (first_moment_.size() != params.size()) {
        throw ConfigError("Adam: parameter set changed after first step");
    }
    for (const auto& p : params) {
        if (!p.node->grad_ready) {
            throw NumericError("Adam: missing gradient for parameter " + p.name);
        }
    }

    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = params[pi];
        double* w = p.node->value.data();
        double* g = p.node->grad.data();
        double* m = first_moment_[pi].data();
        double* v = second_moment_[pi].data();
        const bool decay = !p.decay_exempt && l2_factor != 0.0;
        for (std::size_t i = 0; i < p.node->value.size(); ++i) {
            double grad = g[i] + (decay ? 2.0 * l2_factor * w[i] : 0.0);
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad * grad;
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            w[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        p.node->zero_grad();
    }
}

}  // namespace roirank
