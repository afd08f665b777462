#include "roirank/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace roirank {

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "variant",  "learning_rate", "l2_factor",    "batch_size", "epochs",
        "seed",     "dilation",      "slice_length", "slice_stride",
    };
    return keys;
}

namespace {

void check_known(const std::string& key) {
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown config key: " + key);
    }
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    s.erase(s.find_last_not_of(" \t\r") + 1);
    return s;
}

}  // namespace

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("malformed config line (expected key = value): " + line);
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        check_known(key);
        kv[key] = value;
    }
    return kv;
}

void apply_overrides(std::map<std::string, std::string>& kv,
                     const std::vector<std::string>& overrides) {
    for (const std::string& o : overrides) {
        std::size_t eq = o.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override must be key=value: " + o);
        }
        std::string key = trim(o.substr(0, eq));
        std::string value = trim(o.substr(eq + 1));
        check_known(key);
        kv[key] = value;
    }
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig cfg;
    auto get_double = [&](const std::string& key, double& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        std::istringstream ss(it->second);
        if (!(ss >> out)) throw ConfigError("bad numeric value for " + key);
    };
    auto get_size = [&](const std::string& key, std::size_t& out) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        std::istringstream ss(it->second);
        long long v;
        if (!(ss >> v) || v < 0) throw ConfigError("bad integer value for " + key);
        out = static_cast<std::size_t>(v);
    };
    if (auto it = kv.find("variant"); it != kv.end()) {
        cfg.model.variant = variant_from_name(it->second);
    }
    get_double("learning_rate", cfg.learning_rate);
    get_double("l2_factor", cfg.l2_factor);
    get_size("batch_size", cfg.batch_size);
    get_size("epochs", cfg.epochs);
    std::size_t seed = cfg.seed;
    get_size("seed", seed);
    cfg.seed = seed;
    get_size("dilation", cfg.model.dilation);
    get_size("slice_length", cfg.model.slice_length);
    get_size("slice_stride", cfg.model.slice_stride);
    cfg.validate();
    return cfg;
}

}  // namespace roirank
