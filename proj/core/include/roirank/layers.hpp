#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "roirank/init.hpp"
#include "roirank/ops.hpp"

namespace roirank {

struct Parameter {
    std::string name;
    Value node;               // leaf with requires_grad = true
    bool decay_exempt = false;  // biases and normalization parameters
};

/// Owns the named trainable parameters of one model. Registration order is
/// the canonical serialization and optimizer order.
class ParamStore {
public:
    Value add(const std::string& name, Tensor init, bool decay_exempt);
    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    std::size_t scalar_count() const;
    void zero_grads();

private:
    std::vector<Parameter> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct Conv1dLayer {
    Value weight;  // [Cout x Cin x K]
    Value bias;    // [Cout]
    std::size_t dilation = 1;

    Value forward(const Value& x) const { return conv1d(x, weight, bias, dilation); }
};

struct BatchNormLayer {
    Value gamma;
    Value beta;
    Tensor running_mean;
    Tensor running_var;

    Value forward(const Value& x, bool training) {
        return batch_norm1d(x, gamma, beta, running_mean, running_var, training);
    }
};

struct LinearLayer {
    Value weight;  // [out x in]
    Value bias;    // [out] or null

    Value forward(const Value& x) const { return linear(x, weight, bias); }
};

/// One LSTM direction; gate layout along the 4H axis is [i, f, g, o].
struct LstmDirection {
    Value w_ih;  // [4H x F]
    Value w_hh;  // [4H x H]
    Value bias;  // [4H]
};

struct BiLstm {
    LstmDirection fwd;
    LstmDirection bwd;
    std::size_t hidden = 0;

    /// x: [B x N x F] -> [B x N x 2H]; step j concatenates the forward state
    /// after consuming steps 0..j and the backward state after steps N-1..j.
    Value forward(const Value& x) const;
};

/// Pairwise additive scoring: score(i,j) = v . tanh(W [h_i; h_j] + b),
/// computed as v . tanh(Wu h_i + b + Wr h_j).
struct AttentionLayer {
    LinearLayer score_u;  // with bias
    LinearLayer score_r;  // no bias
    Value v;              // [A]

    struct Output {
        Value context;  // [B x N x F]
        Value alpha;    // [B x N x N], rows sum to 1
    };
    Output forward(const Value& h) const;
};

// Layer factories; weights Xavier-initialized, biases zero.
Conv1dLayer make_conv1d(ParamStore& store, const std::string& name,
                        std::size_t cin, std::size_t cout, std::size_t k,
                        std::size_t dilation, Rng& rng);
BatchNormLayer make_batch_norm(ParamStore& store, const std::string& name,
                               std::size_t channels);
LinearLayer make_linear(ParamStore& store, const std::string& name,
                        std::size_t in, std::size_t out, Rng& rng,
                        bool with_bias = true);
BiLstm make_bilstm(ParamStore& store, const std::string& name, std::size_t input,
                   std::size_t hidden, Rng& rng);
AttentionLayer make_attention(ParamStore& store, const std::string& name,
                              std::size_t feat, std::size_t attn_dim, Rng& rng);

}  // namespace roirank
