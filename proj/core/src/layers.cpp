#include "roirank/layers.hpp"

namespace roirank {

Value ParamStore::add(const std::string& name, Tensor init, bool decay_exempt) {
    if (index_.count(name)) {
        throw ConfigError("duplicate parameter name: " + name);
    }
    Parameter p;
    p.name = name;
    p.node = make_leaf(std::move(init), /*requires_grad=*/true);
    p.node->requires_grad = true;  // independent of the ambient grad mode
    p.decay_exempt = decay_exempt;
    index_[name] = params_.size();
    params_.push_back(std::move(p));
    return params_.back().node;
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.node->value.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) p.node->zero_grad();
}

Value BiLstm::forward(const Value& x) const {
    const auto& s = x->shape();
    if (s.size() != 3) throw ShapeError("BiLstm: expects [B x N x F]");
    const std::size_t batch = s[0], steps = s[1];
    const std::size_t h = hidden;

    auto run = [&](const LstmDirection& d, bool reverse) {
        std::vector<Value> outs(steps);
        Value h_prev = make_constant(Tensor({batch, h}));
        Value c_prev = make_constant(Tensor({batch, h}));
        for (std::size_t i = 0; i < steps; ++i) {
            std::size_t t = reverse ? steps - 1 - i : i;
            Value x_t = reshape(narrow(x, 1, t, 1), {batch, s[2]});
            Value gates = add(linear(x_t, d.w_ih, d.bias),
                              linear(h_prev, d.w_hh, nullptr));
            Value ig = sigmoid(narrow(gates, 1, 0, h));
            Value fg = sigmoid(narrow(gates, 1, h, h));
            Value gg = tanh_op(narrow(gates, 1, 2 * h, h));
            Value og = sigmoid(narrow(gates, 1, 3 * h, h));
            Value c = add(mul(fg, c_prev), mul(ig, gg));
            Value hs = mul(og, tanh_op(c));
            outs[t] = hs;
            h_prev = hs;
            c_prev = c;
        }
        return outs;
    };

    std::vector<Value> f = run(fwd, false);
    std::vector<Value> b = run(bwd, true);
    std::vector<Value> joined(steps);
    for (std::size_t t = 0; t < steps; ++t) joined[t] = concat_lastdim(f[t], b[t]);
    return stack_axis1(joined);
}

AttentionLayer::Output AttentionLayer::forward(const Value& h) const {
    const auto& s = h->shape();
    if (s.size() != 3) throw ShapeError("AttentionLayer: expects [B x N x F]");
    Value u = score_u.forward(h);  // [B x N x A], bias folded in
    Value r = score_r.forward(h);  // [B x N x A]
    Value pre = broadcast_add_pair(u, r);       // [B x N x N x A]
    Value scores = vecdot_lastdim(tanh_op(pre), v);  // [B x N x N]
    Value alpha = softmax_lastdim(scores);
    Value context = bmm(alpha, h);  // [B x N x F]
    return {context, alpha};
}

Conv1dLayer make_conv1d(ParamStore& store, const std::string& name,
                        std::size_t cin, std::size_t cout, std::size_t k,
                        std::size_t dilation, Rng& rng) {
    Conv1dLayer l;
    l.weight = store.add(name + ".weight",
                         xavier_init({cout, cin, k}, cin * k, cout * k, rng),
                         false);
    l.bias = store.add(name + ".bias", Tensor({cout}), true);
    l.dilation = dilation;
    return l;
}

BatchNormLayer make_batch_norm(ParamStore& store, const std::string& name,
                               std::size_t channels) {
    BatchNormLayer l;
    Tensor ones({channels});
    ones.fill(1.0);
    l.gamma = store.add(name + ".gamma", ones, true);
    l.beta = store.add(name + ".beta", Tensor({channels}), true);
    l.running_mean = Tensor({channels});
    l.running_var = Tensor({channels});
    l.running_var.fill(1.0);
    return l;
}

LinearLayer make_linear(ParamStore& store, const std::string& name,
                        std::size_t in, std::size_t out, Rng& rng,
                        bool with_bias) {
    LinearLayer l;
    l.weight = store.add(name + ".weight", xavier_init({out, in}, in, out, rng),
                         false);
    if (with_bias) l.bias = store.add(name + ".bias", Tensor({out}), true);
    return l;
}

BiLstm make_bilstm(ParamStore& store, const std::string& name, std::size_t input,
                   std::size_t hidden, Rng& rng) {
    BiLstm l;
    l.hidden = hidden;
    auto make_dir = [&](const std::string& dir) {
        LstmDirection d;
        d.w_ih = store.add(name + "." + dir + ".w_ih",
                           xavier_init({4 * hidden, input}, input, 4 * hidden, rng),
                           false);
        d.w_hh = store.add(name + "." + dir + ".w_hh",
                           xavier_init({4 * hidden, hidden}, hidden, 4 * hidden, rng),
                           false);
        d.bias = store.add(name + "." + dir + ".bias", Tensor({4 * hidden}), true);
        return d;
    };
    l.fwd = make_dir("fwd");
    l.bwd = make_dir("bwd");
    return l;
}

AttentionLayer make_attention(ParamStore& store, const std::string& name,
                              std::size_t feat, std::size_t attn_dim, Rng& rng) {
    AttentionLayer l;
    l.score_u = make_linear(store, name + ".score_u", feat, attn_dim, rng, true);
    l.score_r = make_linear(store, name + ".score_r", feat, attn_dim, rng, false);
    l.v = store.add(name + ".v", xavier_init({attn_dim}, attn_dim, 1, rng), false);
    return l;
}

}  // namespace roirank
