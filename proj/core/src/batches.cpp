#include "roirank/batches.hpp"

#include "roirank/init.hpp"

namespace roirank {

namespace {

void shuffle_indices(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

std::vector<std::vector<std::size_t>> balanced_batches(
    const std::vector<const SubjectRecord*>& records, std::size_t batch_size,
    std::uint64_t seed) {
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw ConfigError("balanced_batches: batch_size must be even and >= 2");
    }
    std::vector<std::size_t> adhd, hc;
    for (std::size_t i = 0; i < records.size(); ++i) {
        (records[i]->label == ClassLabel::ADHD ? adhd : hc).push_back(i);
    }
    if (adhd.empty() || hc.empty()) {
        throw DataError("balanced_batches: both classes must be present");
    }

    Rng rng(seed);
    shuffle_indices(adhd, rng);
    shuffle_indices(hc, rng);
    std::vector<std::size_t>& major = adhd.size() >= hc.size() ? adhd : hc;
    std::vector<std::size_t>& minor = adhd.size() >= hc.size() ? hc : adhd;

    const std::size_t half = batch_size / 2;
    std::vector<std::vector<std::size_t>> batches;
    std::size_t major_pos = 0, minor_pos = 0;
    while (major.size() - major_pos >= half) {
        std::vector<std::size_t> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < half; ++i) batch.push_back(major[major_pos++]);
        for (std::size_t i = 0; i < half; ++i) {
            if (minor_pos < minor.size()) {
                batch.push_back(minor[minor_pos++]);
            } else {
                batch.push_back(minor[rng.below(minor.size())]);
            }
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace roirank
