#include "roirank/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace roirank {

namespace {

constexpr char kMagic[] = "ROIRANKNET1";

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64_array(std::ostream& os, const Tensor& t) {
    write_u64(os, t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits;
        double v = t[i];
        std::memcpy(&bits, &v, 8);
        write_u64(os, bits);
    }
}

void read_f64_array(std::istream& is, Tensor& t) {
    std::uint64_t n = read_u64(is);
    if (n != t.size()) {
        throw DataError("checkpoint: array length " + std::to_string(n) +
                        " does not match expected " + std::to_string(t.size()));
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t bits = read_u64(is);
        double v;
        std::memcpy(&v, &bits, 8);
        t[i] = v;
    }
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    return s;
}

nlohmann::json config_to_json(const ModelConfig& c) {
    return {
        {"variant", variant_name(c.variant)},
        {"conv_channels", c.conv_channels},
        {"kernel", c.kernel},
        {"hidden_size", c.hidden_size},
        {"fc_size", c.fc_size},
        {"attn_dim", c.attn_dim},
        {"n_classes", c.n_classes},
        {"dilation", c.dilation},
        {"slice_length", c.slice_length},
        {"slice_stride", c.slice_stride},
    };
}

ModelConfig config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.variant = variant_from_name(j.at("variant").get<std::string>());
    auto ch = j.at("conv_channels").get<std::vector<std::size_t>>();
    if (ch.size() != c.conv_channels.size()) {
        throw DataError("checkpoint: bad conv_channels");
    }
    std::copy(ch.begin(), ch.end(), c.conv_channels.begin());
    c.kernel = j.at("kernel").get<std::size_t>();
    c.hidden_size = j.at("hidden_size").get<std::size_t>();
    c.fc_size = j.at("fc_size").get<std::size_t>();
    c.attn_dim = j.at("attn_dim").get<std::size_t>();
    c.n_classes = j.at("n_classes").get<std::size_t>();
    c.dilation = j.at("dilation").get<std::size_t>();
    c.slice_length = j.at("slice_length").get<std::size_t>();
    c.slice_stride = j.at("slice_stride").get<std::size_t>();
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, Model& model,
                     const std::vector<std::size_t>& roi_order) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path);

    nlohmann::json header = {
        {"format", kMagic},
        {"version", 1},
        {"config", config_to_json(model.config())},
        {"seed", model.seed()},
        {"roi_order", roi_order},
    };
    os.write(kMagic, sizeof(kMagic) - 1);
    write_string(os, header.dump());

    const auto& params = model.params().params();
    write_u64(os, params.size());
    for (const auto& p : params) {
        write_string(os, p.name);
        write_f64_array(os, p.node->value);
    }
    auto buffers = model.state_buffers();
    write_u64(os, buffers.size());
    for (const auto& [name, tensor] : buffers) {
        write_string(os, name);
        write_f64_array(os, *tensor);
    }
    if (!os) throw DataError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    char magic[sizeof(kMagic) - 1];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw DataError("not a ROIRANKNET1 checkpoint: " + path);
    }
    nlohmann::json header = nlohmann::json::parse(read_string(is));
    ModelConfig cfg = config_from_json(header.at("config"));
    std::uint64_t seed = header.at("seed").get<std::uint64_t>();
    auto roi_order = header.at("roi_order").get<std::vector<std::size_t>>();

    Model model(cfg, seed);
    std::uint64_t n_params = read_u64(is);
    auto& params = model.params().params();
    if (n_params != params.size()) {
        throw DataError("checkpoint: parameter count mismatch");
    }
    for (auto& p : params) {
        std::string name = read_string(is);
        if (name != p.name) {
            throw DataError("checkpoint: parameter order mismatch at " + name);
        }
        read_f64_array(is, p.node->value);
    }
    std::uint64_t n_buffers = read_u64(is);
    auto buffers = model.state_buffers();
    if (n_buffers != buffers.size()) {
        throw DataError("checkpoint: state buffer count mismatch");
    }
    for (auto& [name, tensor] : buffers) {
        std::string got = read_string(is);
        if (got != name) {
            throw DataError("checkpoint: state buffer order mismatch at " + got);
        }
        read_f64_array(is, *tensor);
    }
    if (!is) throw DataError("truncated checkpoint: " + path);
    return Checkpoint{std::move(model), std::move(roi_order)};
}

}  // namespace roirank
