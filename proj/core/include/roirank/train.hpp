#pragma once

#include <map>
#include <string>
#include <vector>

#include "roirank/batches.hpp"
#include "roirank/dataset.hpp"
#include "roirank/model.hpp"

namespace roirank {

struct TrainConfig {
    double learning_rate = 1e-4;
    double l2_factor = 0.0005;
    std::size_t batch_size = 32;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    ModelConfig model;

    void validate() const;
    std::map<std::string, std::string> echo() const;
};

struct TrainResult {
    std::vector<double> loss_trace;  // one entry per batch
    double final_train_accuracy = 0.0;
};

/// Per-site and mean accuracy for one experiment configuration.
struct EvalReport {
    std::vector<std::pair<std::string, double>> per_site;  // sorted by site
    double mean_accuracy = 0.0;
    std::vector<std::size_t> roi_subset;  // feed order
    std::map<std::string, std::string> config_echo;

    double recompute_mean() const;
};

/// Trains in place: balanced batches for config.epochs epochs, Adam with
/// gradient-side L2, training-mode normalization. `roi_subset` is the
/// ordered list of ROI rows fed to the model. Batches are cropped on the
/// time axis to the shortest series they contain.
TrainResult train(Model& model, const std::vector<const SubjectRecord*>& records,
                  const std::vector<std::size_t>& roi_subset,
                  const TrainConfig& config);

/// Fraction of subjects whose argmax logit matches the label (eval mode).
double evaluate_fold(Model& model,
                     const std::vector<const SubjectRecord*>& records,
                     const std::vector<std::size_t>& roi_subset);

/// One fresh model per LOSO fold (fold seed derived from config.seed and the
/// held-out site), trained on the remaining sites.
EvalReport loso_accuracy(const Manifest& manifest,
                         const std::vector<std::size_t>& roi_subset,
                         const TrainConfig& config, std::size_t jobs = 1);

std::uint64_t fold_seed(const TrainConfig& config, const std::string& test_site);

}  // namespace roirank
