#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "roirank/adam.hpp"
#include "roirank/layers.hpp"

namespace roirank {

enum class Variant { SCCNN_RNN, ASCRNN, ASDRNN, ASSRNN };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelConfig {
    Variant variant = Variant::SCCNN_RNN;
    std::array<std::size_t, 4> conv_channels{32, 64, 96, 96};
    std::size_t kernel = 3;
    std::size_t hidden_size = 128;
    std::size_t fc_size = 128;
    std::size_t attn_dim = 128;
    std::size_t n_classes = 2;
    std::size_t dilation = 2;      // ASDRNN only
    std::size_t slice_length = 8;  // ASSRNN only (l)
    std::size_t slice_stride = 4;  // ASSRNN only (w)

    void validate() const;
    bool uses_attention() const { return variant != Variant::SCCNN_RNN; }
    std::size_t encoder_dilation() const {
        return variant == Variant::ASDRNN ? dilation : 1;
    }
    /// Time samples consumed by the four valid convolutions.
    std::size_t min_time_len() const {
        return 4 * (kernel - 1) * encoder_dilation() + 1;
    }
};

struct Segment {
    std::size_t start;  // 0-based ROI index
    std::size_t length;
};

/// Overlapping windows over the ROI axis: segment s covers
/// [s*w, s*w + l) for s < ceil((N_R - l) / w), plus the tail window
/// [N_R - l, N_R). Total count ceil((N_R - l) / w) + 1.
std::vector<Segment> slice_sequence(std::size_t n_rois, std::size_t l,
                                    std::size_t w);

/// One materialized model: parameters, normalization state, forward passes.
class Model {
public:
    Model(ModelConfig config, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    std::size_t param_count() const { return store_.scalar_count(); }

    /// Shared per-ROI encoder on stacked signals [N x 1 x T] -> [N x C_last].
    Value encode(const Value& signals, bool training);
    /// Single-signal convenience: [1 x T] -> [C_last].
    Tensor encode_single(const Tensor& signal, bool training);

    /// BiLSTM over the ROI axis: [B x N x C_last] -> [B x N x 2H].
    Value roi_sequence_encode(const Value& features) const;

    AttentionLayer::Output attention_forward(const Value& h) const;

    /// Full forward: batch [B x N_R x T] -> logits [B x n_classes].
    Value classify_forward(const Value& batch, bool training);
    Tensor classify_forward(const Tensor& batch, bool training);

    /// Mutable normalization state, in canonical order, for checkpointing.
    std::vector<std::pair<std::string, Tensor*>> state_buffers();

private:
    ModelConfig cfg_;
    std::uint64_t seed_;
    ParamStore store_;
    std::vector<Conv1dLayer> convs_;
    std::vector<BatchNormLayer> norms_;
    Conv1dLayer skip_proj_;  // ASDRNN: 1x1 channel projection for the skip path
    BiLstm rnn_;
    AttentionLayer attn_;  // attention variants only
    LinearLayer fc_;
    LinearLayer classifier_;
};

Model build_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace roirank
