#pragma once

#include <string>
#include <vector>

#include "roirank/model.hpp"

namespace roirank {

/// Binary checkpoint: magic "ROIRANKNET1", a JSON header (config, seed,
/// canonical ROI order) and named flat little-endian float64 arrays for
/// every parameter and normalization buffer.
void save_checkpoint(const std::string& path, Model& model,
                     const std::vector<std::size_t>& roi_order);

struct Checkpoint {
    Model model;
    std::vector<std::size_t> roi_order;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace roirank
