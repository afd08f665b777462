#include "roirank/protocols.hpp"

#include <algorithm>

#include "roirank/thread_pool.hpp"

namespace roirank {

std::string direction_name(SweepDirection d) {
    return d == SweepDirection::Top ? "top" : "reverse";
}

SweepDirection direction_from_name(const std::string& name) {
    if (name == "top") return SweepDirection::Top;
    if (name == "reverse") return SweepDirection::Reverse;
    throw ConfigError("unknown sweep direction: " + name);
}

std::vector<std::size_t> RankingResult::derive_order(
    const std::vector<std::pair<std::size_t, double>>& per_roi) {
    std::vector<std::size_t> order(per_roi.size());
    std::vector<std::size_t> idx(per_roi.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (per_roi[a].second != per_roi[b].second) {
            return per_roi[a].second > per_roi[b].second;
        }
        return per_roi[a].first < per_roi[b].first;
    });
    for (std::size_t i = 0; i < idx.size(); ++i) order[i] = per_roi[idx[i]].first;
    return order;
}

std::pair<std::size_t, double> SweepResult::best() const {
    if (points.empty()) throw ConfigError("SweepResult::best on empty sweep");
    std::size_t best_k = points.front().first;
    double best_acc = points.front().second.mean_accuracy;
    for (const auto& [k, report] : points) {
        if (report.mean_accuracy > best_acc) {
            best_acc = report.mean_accuracy;
            best_k = k;
        }
    }
    return {best_k, best_acc};
}

RankingResult rank_single_roi(const Manifest& manifest, const TrainConfig& config,
                              std::vector<std::size_t> candidate_rois,
                              std::size_t jobs) {
    if (manifest.records.empty()) throw DataError("rank_single_roi: empty dataset");
    const std::size_t n_rois = manifest.records.front().n_rois();
    if (candidate_rois.empty()) {
        candidate_rois.resize(n_rois);
        for (std::size_t r = 0; r < n_rois; ++r) candidate_rois[r] = r;
    }
    for (std::size_t r : candidate_rois) {
        if (r >= n_rois) {
            throw ConfigError("candidate ROI " + std::to_string(r) +
                              " outside atlas of size " + std::to_string(n_rois));
        }
    }

    RankingResult result;
    result.reports.resize(candidate_rois.size());
    // Parallel over ROI runs; each run does its LOSO folds sequentially.
    parallel_for(candidate_rois.size(), jobs, [&](std::size_t i) {
        result.reports[i] =
            loso_accuracy(manifest, {candidate_rois[i]}, config, /*jobs=*/1);
    });
    for (std::size_t i = 0; i < candidate_rois.size(); ++i) {
        result.per_roi_accuracy.emplace_back(candidate_rois[i],
                                             result.reports[i].mean_accuracy);
    }
    result.rank_order = RankingResult::derive_order(result.per_roi_accuracy);
    return result;
}

SweepResult topk_sweep(const Manifest& manifest, const RankingResult& ranking,
                       std::size_t k_max, const TrainConfig& config,
                       SweepDirection direction, std::size_t jobs) {
    if (k_max < 1 || k_max > ranking.rank_order.size()) {
        throw ConfigError("k_max must be in [1, " +
                          std::to_string(ranking.rank_order.size()) + "]");
    }
    std::vector<std::size_t> order = ranking.rank_order;
    if (direction == SweepDirection::Reverse) {
        std::reverse(order.begin(), order.end());
    }

    SweepResult result;
    result.direction = direction;
    std::vector<EvalReport> reports(k_max);
    parallel_for(k_max, jobs, [&](std::size_t i) {
        const std::size_t k = i + 1;
        std::vector<std::size_t> subset(order.begin(), order.begin() + k);
        reports[i] = loso_accuracy(manifest, subset, config, /*jobs=*/1);
    });
    for (std::size_t i = 0; i < k_max; ++i) {
        result.points.emplace_back(i + 1, std::move(reports[i]));
    }
    return result;
}

std::vector<VariantComparison> model_comparison(
    const Manifest& manifest, const RankingResult& ranking,
    const std::vector<ModelConfig>& variants, std::size_t k_max,
    const TrainConfig& config, std::size_t jobs) {
    std::vector<VariantComparison> out;
    for (const ModelConfig& mc : variants) {
        TrainConfig vc = config;
        vc.model = mc;
        VariantComparison cmp;
        cmp.variant = mc.variant;
        cmp.sweep = topk_sweep(manifest, ranking, k_max, vc, SweepDirection::Top,
                               jobs);
        auto [bk, ba] = cmp.sweep.best();
        cmp.best_k = bk;
        cmp.best_accuracy = ba;
        out.push_back(std::move(cmp));
    }
    return out;
}

}  // namespace roirank
