#pragma once

#include <map>
#include <string>
#include <vector>

#include "roirank/train.hpp"

namespace roirank {

/// Parses a `key = value` experiment configuration file (one pair per line,
/// `#` comments). Unknown keys are rejected.
std::map<std::string, std::string> parse_kv_file(const std::string& path);

/// Applies `key=value` override strings on top of file values.
void apply_overrides(std::map<std::string, std::string>& kv,
                     const std::vector<std::string>& overrides);

/// Recognized keys: variant, learning_rate, l2_factor, batch_size, epochs,
/// seed, dilation, slice_length, slice_stride.
TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

const std::vector<std::string>& known_config_keys();

}  // namespace roirank
