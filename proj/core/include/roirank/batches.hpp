#pragma once

#include <cstdint>
#include <vector>

#include "roirank/dataset.hpp"

namespace roirank {

/// Class-balanced mini-batch plan for one epoch: each batch holds exactly
/// batch_size/2 ADHD and batch_size/2 HC records. The minority class is
/// oversampled with replacement; the epoch ends when the majority class is
/// exhausted, so every majority-class record appears at most once.
std::vector<std::vector<std::size_t>> balanced_batches(
    const std::vector<const SubjectRecord*>& records, std::size_t batch_size,
    std::uint64_t seed);

}  // namespace roirank
