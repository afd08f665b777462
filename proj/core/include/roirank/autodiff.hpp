#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "roirank/tensor.hpp"

namespace roirank {

struct Node;
using Value = std::shared_ptr<Node>;

/// One vertex of the reverse-mode tape. Ops create nodes whose `backprop`
/// closure scatters this node's gradient into the parents' gradients.
struct Node {
    Tensor value;
    Tensor grad;                 // allocated lazily by backward()
    bool requires_grad = false;
    bool grad_ready = false;
    std::vector<Value> parents;
    std::function<void(Node&)> backprop;

    const std::vector<std::size_t>& shape() const { return value.shape(); }

    void ensure_grad() {
        if (!grad_ready) {
            grad = Tensor::zeros_like(value);
            grad_ready = true;
        }
    }
    void zero_grad() {
        if (grad_ready) grad.fill(0.0);
    }
};

/// Thread-local switch: when recording is off, ops compute values only and
/// the result graph carries no parents or closures (pure eval).
bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
    NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
    ~NoGradGuard() { set_grad_enabled(prev_); }

private:
    bool prev_;
};

Value make_leaf(Tensor value, bool requires_grad);
Value make_constant(Tensor value);

/// Reverse pass from a scalar (or any) root; seeds d(root)/d(root) = 1.
void backward(const Value& root);

}  // namespace roirank
