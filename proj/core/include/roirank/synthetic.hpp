#pragma once

#include <cstdint>
#include <set>

#include "roirank/dataset.hpp"

namespace roirank {

/// Synthetic site-grouped dataset with planted discriminative ROIs.
/// Each series is smoothed Gaussian noise with a site-specific amplitude and
/// offset shift; ADHD subjects additionally carry a class-conditional
/// oscillation of magnitude `effect_strength` in every planted ROI.
struct SyntheticSpec {
    std::size_t n_sites = 3;
    std::size_t subjects_per_site_per_class = 20;
    std::size_t n_rois = 116;
    std::size_t time_len = 64;
    std::set<std::size_t> planted_rois;
    double effect_strength = 1.0;
    double site_shift_scale = 0.3;
    std::uint64_t seed = 0;

    void validate() const;
};

Manifest gen_synthetic(const SyntheticSpec& spec);

}  // namespace roirank
