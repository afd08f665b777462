#include "roirank/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "roirank/init.hpp"

namespace roirank {

namespace {

double eval_scalar(const std::function<Value()>& fn) {
    NoGradGuard guard;
    Value out = fn();
    if (out->value.size() != 1) {
        throw ShapeError("grad_check: function must be scalar-valued");
    }
    return out->value[0];
}

double check_impl(const std::function<Value()>& fn,
                  const std::vector<Value>& leaves,
                  const std::vector<std::vector<std::size_t>>& probe_sets,
                  double epsilon) {
    // Non-determinism detection: two eval passes must agree bit-for-bit.
    double f0 = eval_scalar(fn);
    double f1 = eval_scalar(fn);
    if (f0 != f1) {
        throw NumericError("grad_check: function is not deterministic");
    }

    for (const auto& leaf : leaves) {
        leaf->requires_grad = true;
        leaf->zero_grad();
    }
    Value out = fn();
    if (out->value.size() != 1) {
        throw ShapeError("grad_check: function must be scalar-valued");
    }
    backward(out);

    double max_rel = 0.0;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        Node* leaf = leaves[li].get();
        leaf->ensure_grad();
        for (std::size_t i : probe_sets[li]) {
            const double orig = leaf->value[i];
            auto central = [&](double eps) {
                leaf->value[i] = orig + eps;
                double fp = eval_scalar(fn);
                leaf->value[i] = orig - eps;
                double fm = eval_scalar(fn);
                leaf->value[i] = orig;
                return (fp - fm) / (2.0 * eps);
            };
            const double numeric = central(epsilon);
            // Central differences are only a valid oracle where the function
            // is locally smooth. Kinked nonlinearities (leaky_relu) make some
            // probe points straddle a kink, and near-zero gradients drown in
            // roundoff; both show up as disagreement between step sizes, so
            // such probes are skipped rather than misreported.
            const double refined = central(epsilon * 0.5);
            const double step_gap =
                std::abs(numeric - refined) /
                std::max(1e-8, std::abs(numeric) + std::abs(refined));
            if (step_gap > 1e-5) continue;
            const double analytic = leaf->grad[i];
            // A central difference cannot resolve gradients below the
            // rounding noise of the loss itself (~ULP(f)/epsilon); such
            // elements carry no oracle information either way.
            const double noise_floor = 2.220446049250313e-16 *
                                       std::max(1.0, std::abs(f0)) / epsilon;
            if (std::abs(analytic) + std::abs(numeric) < 1e4 * noise_floor)
                continue;
            const double rel = std::abs(analytic - numeric) /
                               std::max(1e-8, std::abs(analytic) + std::abs(numeric));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace

double grad_check(const std::function<Value()>& fn,
                  const std::vector<Value>& leaves, double epsilon) {
    std::vector<std::vector<std::size_t>> probes(leaves.size());
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        probes[li].resize(leaves[li]->value.size());
        for (std::size_t i = 0; i < probes[li].size(); ++i) probes[li][i] = i;
    }
    return check_impl(fn, leaves, probes, epsilon);
}

double grad_check_sampled(const std::function<Value()>& fn,
                          const std::vector<Value>& leaves,
                          std::size_t max_elems_per_leaf, std::uint64_t seed,
                          double epsilon) {
    Rng rng(seed);
    std::vector<std::vector<std::size_t>> probes(leaves.size());
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        const std::size_t n = leaves[li]->value.size();
        if (n <= max_elems_per_leaf) {
            probes[li].resize(n);
            for (std::size_t i = 0; i < n; ++i) probes[li][i] = i;
        } else {
            for (std::size_t k = 0; k < max_elems_per_leaf; ++k) {
                probes[li].push_back(rng.below(n));
            }
            std::sort(probes[li].begin(), probes[li].end());
            probes[li].erase(std::unique(probes[li].begin(), probes[li].end()),
                             probes[li].end());
        }
    }
    return check_impl(fn, leaves, probes, epsilon);
}

}  // namespace roirank
