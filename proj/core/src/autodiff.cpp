#include "roirank/autodiff.hpp"

#include <unordered_set>

namespace roirank {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

Value make_leaf(Tensor value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad && grad_enabled();
    return n;
}

Value make_constant(Tensor value) { return make_leaf(std::move(value), false); }

namespace {

// Iterative post-order topological sort; recursion would overflow on long
// LSTM chains.
void topo_sort(const Value& root, std::vector<Node*>& order) {
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Node* p = node->parents[next_child].get();
            ++next_child;
            if (p->requires_grad && visited.insert(p).second) {
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
}

}  // namespace

void backward(const Value& root) {
    if (!root->requires_grad) return;
    std::vector<Node*> order;
    topo_sort(root, order);
    for (Node* n : order) n->ensure_grad();
    root->grad.fill(0.0);
    for (double& g : root->grad.values()) g = 1.0;
    // order is post-order: root last. Walk backwards.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop) n->backprop(*n);
    }
}

}  // namespace roirank
