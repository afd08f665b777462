#include "roirank/train.hpp"

#include <algorithm>
#include <sstream>

#include "roirank/init.hpp"
#include "roirank/ops.hpp"
#include "roirank/thread_pool.hpp"

namespace roirank {

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
    if (l2_factor < 0) throw ConfigError("l2_factor must be non-negative");
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw ConfigError("batch_size must be even and >= 2");
    }
    model.validate();
}

std::map<std::string, std::string> TrainConfig::echo() const {
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    std::map<std::string, std::string> m;
    m["variant"] = variant_name(model.variant);
    m["learning_rate"] = fmt(learning_rate);
    m["l2_factor"] = fmt(l2_factor);
    m["batch_size"] = std::to_string(batch_size);
    m["epochs"] = std::to_string(epochs);
    m["seed"] = std::to_string(seed);
    if (model.variant == Variant::ASDRNN) {
        m["dilation"] = std::to_string(model.dilation);
    }
    if (model.variant == Variant::ASSRNN) {
        m["slice_length"] = std::to_string(model.slice_length);
        m["slice_stride"] = std::to_string(model.slice_stride);
    }
    return m;
}

double EvalReport::recompute_mean() const {
    if (per_site.empty()) return 0.0;
    double s = 0;
    for (const auto& [site, acc] : per_site) s += acc;
    return s / static_cast<double>(per_site.size());
}

namespace {

void check_roi_subset(const std::vector<const SubjectRecord*>& records,
                      const std::vector<std::size_t>& roi_subset) {
    if (roi_subset.empty()) throw ConfigError("roi_subset must be non-empty");
    if (records.empty()) throw DataError("no records given");
    const std::size_t n_rois = records.front()->n_rois();
    for (std::size_t r : roi_subset) {
        if (r >= n_rois) {
            throw ConfigError("ROI index " + std::to_string(r) +
                              " outside atlas of size " + std::to_string(n_rois));
        }
    }
}

/// Assemble [B x k x T_min] with rows in roi_subset order; series longer
/// than the shortest in the batch are cropped at the front.
Tensor assemble_batch(const std::vector<const SubjectRecord*>& records,
                      const std::vector<std::size_t>& batch_indices,
                      const std::vector<std::size_t>& roi_subset,
                      std::vector<int>& labels_out) {
    std::size_t t_min = records[batch_indices[0]]->time_len();
    for (std::size_t i : batch_indices) {
        t_min = std::min(t_min, records[i]->time_len());
    }
    const std::size_t b = batch_indices.size(), k = roi_subset.size();
    Tensor batch({b, k, t_min});
    labels_out.clear();
    labels_out.reserve(b);
    for (std::size_t bi = 0; bi < b; ++bi) {
        const SubjectRecord* rec = records[batch_indices[bi]];
        labels_out.push_back(rec->label == ClassLabel::ADHD ? 0 : 1);
        for (std::size_t ri = 0; ri < k; ++ri) {
            const std::size_t roi = roi_subset[ri];
            for (std::size_t t = 0; t < t_min; ++t) {
                batch.at3(bi, ri, t) = rec->series.at2(roi, t);
            }
        }
    }
    return batch;
}

int predict_label(const Tensor& logits_row) {
    return logits_row[1] > logits_row[0] ? 1 : 0;
}

}  // namespace

std::uint64_t fold_seed(const TrainConfig& config, const std::string& test_site) {
    return mix_seed(config.seed, "fold/" + test_site);
}

TrainResult train(Model& model, const std::vector<const SubjectRecord*>& records,
                  const std::vector<std::size_t>& roi_subset,
                  const TrainConfig& config) {
    config.validate();
    check_roi_subset(records, roi_subset);

    Adam optimizer(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
    TrainResult result;
    const std::uint64_t batch_seed_root = mix_seed(config.seed, "batches");

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        auto plan = balanced_batches(records, config.batch_size,
                                     mix_seed(batch_seed_root, epoch));
        for (const auto& batch_indices : plan) {
            std::vector<int> labels;
            Tensor batch = assemble_batch(records, batch_indices, roi_subset, labels);
            Value input = make_constant(batch);
            Value logits = model.classify_forward(input, /*training=*/true);
            Value loss = softmax_cross_entropy(logits, labels);
            if (!loss->value.all_finite()) {
                throw NumericError("non-finite training loss");
            }
            backward(loss);
            result.loss_trace.push_back(loss->value[0]);
            optimizer.step(model.params().params(), config.l2_factor);
        }
    }
    if (config.epochs > 0) {
        result.final_train_accuracy = evaluate_fold(model, records, roi_subset);
    }
    return result;
}

double evaluate_fold(Model& model,
                     const std::vector<const SubjectRecord*>& records,
                     const std::vector<std::size_t>& roi_subset) {
    if (records.empty()) throw DataError("evaluate_fold: empty test set");
    check_roi_subset(records, roi_subset);
    std::size_t correct = 0;
    const std::size_t k = roi_subset.size();
    for (const SubjectRecord* rec : records) {
        Tensor input({1, k, rec->time_len()});
        for (std::size_t ri = 0; ri < k; ++ri) {
            for (std::size_t t = 0; t < rec->time_len(); ++t) {
                input.at3(0, ri, t) = rec->series.at2(roi_subset[ri], t);
            }
        }
        Tensor logits = model.classify_forward(input, /*training=*/false);
        const int truth = rec->label == ClassLabel::ADHD ? 0 : 1;
        if (predict_label(logits) == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

EvalReport loso_accuracy(const Manifest& manifest,
                         const std::vector<std::size_t>& roi_subset,
                         const TrainConfig& config, std::size_t jobs) {
    config.validate();
    auto folds = loso_split(manifest);
    std::vector<double> fold_acc(folds.size());

    parallel_for(folds.size(), jobs, [&](std::size_t fi) {
        const LosoFold& fold = folds[fi];
        std::vector<const SubjectRecord*> train_records, test_records;
        for (std::size_t i : fold.train_indices) {
            train_records.push_back(&manifest.records[i]);
        }
        for (std::size_t i : fold.test_indices) {
            test_records.push_back(&manifest.records[i]);
        }
        bool has_adhd = false, has_hc = false;
        for (const auto* r : train_records) {
            (r->label == ClassLabel::ADHD ? has_adhd : has_hc) = true;
        }
        if (!has_adhd || !has_hc) {
            throw DataError("LOSO fold " + fold.test_site +
                            ": training pool lacks a class");
        }
        TrainConfig fold_config = config;
        fold_config.seed = fold_seed(config, fold.test_site);
        Model model(config.model, fold_config.seed);
        train(model, train_records, roi_subset, fold_config);
        fold_acc[fi] = evaluate_fold(model, test_records, roi_subset);
    });

    EvalReport report;
    for (std::size_t fi = 0; fi < folds.size(); ++fi) {
        report.per_site.emplace_back(folds[fi].test_site, fold_acc[fi]);
    }
    std::sort(report.per_site.begin(), report.per_site.end());
    report.mean_accuracy = report.recompute_mean();
    report.roi_subset = roi_subset;
    report.config_echo = config.echo();
    return report;
}

}  // namespace roirank
