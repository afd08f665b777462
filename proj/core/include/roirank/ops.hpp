#pragma once

#include <vector>

#include "roirank/autodiff.hpp"

namespace roirank {

// Elementwise / structural
Value add(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double s);
Value reshape(const Value& a, std::vector<std::size_t> shape);
Value narrow(const Value& a, std::size_t axis, std::size_t start, std::size_t len);
Value concat_lastdim(const Value& a, const Value& b);
Value stack_axis1(const std::vector<Value>& steps);

// Nonlinearities
Value leaky_relu(const Value& a, double slope = 0.1);
Value tanh_op(const Value& a);
Value sigmoid(const Value& a);

// Reductions
Value mean_lastdim(const Value& a);
Value mean_axis1(const Value& a);

// Linear algebra
// x: [... x in], w: [out x in], b: [out] or null. Leading dims are batch.
Value linear(const Value& x, const Value& w, const Value& b);
// x: [N x Cin x L], w: [Cout x Cin x K], b: [Cout]. Valid convolution,
// stride 1, output length L - (K-1)*dilation.
Value conv1d(const Value& x, const Value& w, const Value& b, std::size_t dilation);
// a: [B x N x M], b: [B x M x F] -> [B x N x F]
Value bmm(const Value& a, const Value& b);

// Attention building blocks
// u, r: [B x N x A] -> out[b,i,j,:] = u[b,i,:] + r[b,j,:], shape [B x N x N x A]
Value broadcast_add_pair(const Value& u, const Value& r);
// x: [... x A], v: [A] -> [...]
Value vecdot_lastdim(const Value& x, const Value& v);
Value softmax_lastdim(const Value& a);

// Loss: logits [B x 2], labels in {0,1}; mean negative log softmax.
Value softmax_cross_entropy(const Value& logits, const std::vector<int>& labels);

// Batch normalization over (N, L) per channel for x: [N x C x L].
// Training mode updates running stats in place with
// running = momentum * running + (1 - momentum) * batch.
Value batch_norm1d(const Value& x, const Value& gamma, const Value& beta,
                   Tensor& running_mean, Tensor& running_var, bool training,
                   double momentum = 0.9, double eps = 1e-5);

}  // namespace roirank
