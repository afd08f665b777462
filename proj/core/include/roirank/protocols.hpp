#pragma once

#include "roirank/train.hpp"

namespace roirank {

/// Per-ROI mean LOSO accuracies plus the derived rank order (descending
/// accuracy, ties broken by ascending ROI index).
struct RankingResult {
    std::vector<std::pair<std::size_t, double>> per_roi_accuracy;  // (roi, acc)
    std::vector<std::size_t> rank_order;
    std::vector<EvalReport> reports;  // aligned with per_roi_accuracy

    static std::vector<std::size_t> derive_order(
        const std::vector<std::pair<std::size_t, double>>& per_roi);
};

enum class SweepDirection { Top, Reverse };

std::string direction_name(SweepDirection d);
SweepDirection direction_from_name(const std::string& name);

struct SweepResult {
    SweepDirection direction = SweepDirection::Top;
    std::vector<std::pair<std::size_t, EvalReport>> points;  // (k, report)

    /// Best mean accuracy and its k; smallest-k tie-break.
    std::pair<std::size_t, double> best() const;
};

/// Trains one model per candidate ROI (all atlas ROIs by default) under
/// LOSO and ranks the candidates by mean accuracy.
RankingResult rank_single_roi(const Manifest& manifest, const TrainConfig& config,
                              std::vector<std::size_t> candidate_rois = {},
                              std::size_t jobs = 1);

/// For k = 1..k_max, trains a fresh model on the first k ROIs of the rank
/// order (or of its reverse). ROI feed order is the selection order.
SweepResult topk_sweep(const Manifest& manifest, const RankingResult& ranking,
                       std::size_t k_max, const TrainConfig& config,
                       SweepDirection direction, std::size_t jobs = 1);

struct VariantComparison {
    Variant variant;
    SweepResult sweep;
    std::size_t best_k = 0;
    double best_accuracy = 0.0;
};

std::vector<VariantComparison> model_comparison(
    const Manifest& manifest, const RankingResult& ranking,
    const std::vector<ModelConfig>& variants, std::size_t k_max,
    const TrainConfig& config, std::size_t jobs = 1);

}  // namespace roirank
