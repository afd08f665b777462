#include "roirank/model.hpp"

namespace roirank {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::SCCNN_RNN: return "SCCNN_RNN";
        case Variant::ASCRNN: return "ASCRNN";
        case Variant::ASDRNN: return "ASDRNN";
        case Variant::ASSRNN: return "ASSRNN";
    }
    throw ConfigError("unknown variant");
}

Variant variant_from_name(const std::string& name) {
    if (name == "SCCNN_RNN") return Variant::SCCNN_RNN;
    if (name == "ASCRNN") return Variant::ASCRNN;
    if (name == "ASDRNN") return Variant::ASDRNN;
    if (name == "ASSRNN") return Variant::ASSRNN;
    throw ConfigError("unknown model variant: " + name);
}

void ModelConfig::validate() const {
    if (kernel != 3) throw ConfigError("kernel width is fixed at 3");
    if (n_classes != 2) throw ConfigError("binary classification only");
    if (hidden_size < 1 || fc_size < 1 || attn_dim < 1) {
        throw ConfigError("hidden/fc/attention sizes must be positive");
    }
    for (std::size_t c : conv_channels) {
        if (c < 1) throw ConfigError("conv channel counts must be positive");
    }
    if (variant == Variant::ASDRNN && dilation < 1) {
        throw ConfigError("ASDRNN dilation must be positive");
    }
    if (variant == Variant::ASSRNN) {
        if (slice_length < 1 || slice_stride < 1 || slice_stride > slice_length) {
            throw ConfigError("ASSRNN slicing requires 1 <= w <= l");
        }
    }
}

std::vector<Segment> slice_sequence(std::size_t n_rois, std::size_t l,
                                    std::size_t w) {
    if (l < 1 || w < 1 || w > l || l > n_rois) {
        throw ConfigError("invalid slicing: need 1 <= w <= l <= N_R, got l=" +
                          std::to_string(l) + " w=" + std::to_string(w) +
                          " N_R=" + std::to_string(n_rois));
    }
    const std::size_t regular = (n_rois - l + w - 1) / w;  // ceil((N_R - l) / w)
    std::vector<Segment> segs;
    segs.reserve(regular + 1);
    for (std::size_t s = 0; s < regular; ++s) segs.push_back({s * w, l});
    segs.push_back({n_rois - l, l});  // tail window
    return segs;
}

Model::Model(ModelConfig config, std::uint64_t seed)
    : cfg_(config), seed_(seed) {
    cfg_.validate();
    Rng rng(seed);

    std::size_t cin = 1;
    const std::size_t dil = cfg_.encoder_dilation();
    for (std::size_t i = 0; i < cfg_.conv_channels.size(); ++i) {
        const std::size_t cout = cfg_.conv_channels[i];
        const std::string name = "conv" + std::to_string(i + 1);
        convs_.push_back(make_conv1d(store_, name, cin, cout, cfg_.kernel, dil, rng));
        norms_.push_back(make_batch_norm(store_, name + ".bn", cout));
        cin = cout;
    }
    if (cfg_.variant == Variant::ASDRNN) {
        skip_proj_ = make_conv1d(store_, "skip_proj", 1, cfg_.conv_channels.back(),
                                 1, 1, rng);
    }
    rnn_ = make_bilstm(store_, "rnn", cfg_.conv_channels.back(), cfg_.hidden_size,
                       rng);
    if (cfg_.uses_attention()) {
        attn_ = make_attention(store_, "attn", 2 * cfg_.hidden_size, cfg_.attn_dim,
                               rng);
    }
    fc_ = make_linear(store_, "fc", 2 * cfg_.hidden_size, cfg_.fc_size, rng);
    classifier_ = make_linear(store_, "classifier", cfg_.fc_size, cfg_.n_classes,
                              rng);
}

Model build_model(const ModelConfig& config, std::uint64_t seed) {
    return Model(config, seed);
}

Value Model::encode(const Value& signals, bool training) {
    const auto& s = signals->shape();
    if (s.size() != 3 || s[1] != 1) {
        throw ShapeError("encode: expects [N x 1 x T]");
    }
    Value x = signals;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        x = convs_[i].forward(x);
        x = norms_[i].forward(x, training);
        if (i + 1 == convs_.size() && cfg_.variant == Variant::ASDRNN) {
            // Skip path: 1x1 channel projection of the stack input, center
            // cropped on the time axis, added after the last normalization.
            const std::size_t out_len = x->shape()[2];
            const std::size_t in_len = s[2];
            const std::size_t offset = (in_len - out_len) / 2;
            Value proj = skip_proj_.forward(signals);
            proj = narrow(proj, 2, offset, out_len);
            x = add(x, proj);
        }
        x = leaky_relu(x, 0.1);
    }
    return mean_lastdim(x);  // global average pool over time
}

Tensor Model::encode_single(const Tensor& signal, bool training) {
    if (signal.ndim() != 2 || signal.extent(0) != 1) {
        throw ShapeError("encode_single: expects [1 x T]");
    }
    NoGradGuard guard;
    Value in = make_constant(signal.reshaped({1, 1, signal.extent(1)}));
    Tensor out = encode(in, training)->value;
    return out.reshaped({out.size()});
}

Value Model::roi_sequence_encode(const Value& features) const {
    return rnn_.forward(features);
}

AttentionLayer::Output Model::attention_forward(const Value& h) const {
    if (!cfg_.uses_attention()) {
        throw ConfigError("attention_forward: " + variant_name(cfg_.variant) +
                          " has no attention layer");
    }
    return attn_.forward(h);
}

Value Model::classify_forward(const Value& batch, bool training) {
    const auto& s = batch->shape();
    if (s.size() != 3) throw ShapeError("classify_forward: expects [B x N_R x T]");
    const std::size_t b = s[0], n_rois = s[1], t = s[2];

    Value signals = reshape(batch, {b * n_rois, 1, t});
    Value feats = encode(signals, training);  // [B*N x C]
    const std::size_t c = feats->shape()[1];
    feats = reshape(feats, {b, n_rois, c});

    Value pooled;  // [B x 2H]
    switch (cfg_.variant) {
        case Variant::SCCNN_RNN: {
            Value h = roi_sequence_encode(feats);
            pooled = reshape(narrow(h, 1, n_rois - 1, 1), {b, 2 * cfg_.hidden_size});
            break;
        }
        case Variant::ASCRNN:
        case Variant::ASDRNN: {
            Value h = roi_sequence_encode(feats);
            pooled = mean_axis1(attn_.forward(h).context);
            break;
        }
        case Variant::ASSRNN: {
            auto segs = slice_sequence(n_rois, cfg_.slice_length, cfg_.slice_stride);
            std::vector<Value> seg_states;
            seg_states.reserve(segs.size());
            for (const Segment& seg : segs) {
                Value window = narrow(feats, 1, seg.start, seg.length);
                Value h = rnn_.forward(window);
                seg_states.push_back(reshape(narrow(h, 1, seg.length - 1, 1),
                                             {b, 2 * cfg_.hidden_size}));
            }
            Value seg_seq = stack_axis1(seg_states);  // [B x S x 2H]
            pooled = mean_axis1(attn_.forward(seg_seq).context);
            break;
        }
    }

    Value hidden = leaky_relu(fc_.forward(pooled), 0.1);
    return classifier_.forward(hidden);
}

Tensor Model::classify_forward(const Tensor& batch, bool training) {
    NoGradGuard guard;
    return classify_forward(make_constant(batch), training)->value;
}

std::vector<std::pair<std::string, Tensor*>> Model::state_buffers() {
    std::vector<std::pair<std::string, Tensor*>> out;
    for (std::size_t i = 0; i < norms_.size(); ++i) {
        const std::string name = "conv" + std::to_string(i + 1) + ".bn";
        out.emplace_back(name + ".running_mean", &norms_[i].running_mean);
        out.emplace_back(name + ".running_var", &norms_[i].running_var);
    }
    return out;
}

}  // namespace roirank
