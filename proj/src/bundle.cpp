#include "lpface/bundle.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "lpface/errors.hpp"

namespace lpface {

namespace {

constexpr char kMagic[] = "LPFACEBUNDLE";

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t len) {
    return bundle_checksum(data, len);
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t read_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void append_double(std::vector<std::uint8_t>& out, double d) {
    append_u64_le(out, std::bit_cast<std::uint64_t>(d));
}

std::string format_double(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

class Manifest {
public:
    void set(const std::string& key, const std::string& value) {
        text_ += key + " = " + value + "\n";
        values_[key] = value;
    }
    void set(const std::string& key, int v) { set(key, std::to_string(v)); }
    void set(const std::string& key, std::uint32_t v) { set(key, std::to_string(v)); }
    void set(const std::string& key, double v) { set(key, format_double(v)); }

    const std::string& text() const { return text_; }

    static Manifest parse(const std::string& text) {
        Manifest m;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find(" = ");
            if (eq == std::string::npos) {
                throw PersistenceError("malformed bundle manifest line: " + line);
            }
            m.values_[line.substr(0, eq)] = line.substr(eq + 3);
        }
        return m;
    }

    const std::string& get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            throw PersistenceError("bundle manifest missing key: " + key);
        }
        return it->second;
    }
    int get_int(const std::string& key) const { return std::stoi(get(key)); }
    std::uint32_t get_u32(const std::string& key) const {
        return static_cast<std::uint32_t>(std::stoul(get(key)));
    }
    double get_double(const std::string& key) const { return std::stod(get(key)); }

private:
    std::string text_;
    std::map<std::string, std::string> values_;
};

/// Sequential reader over the double block.
struct DoubleReader {
    const std::uint8_t* p;
    std::size_t remaining;

    double next() {
        if (remaining < 8) {
            throw PersistenceError("bundle data block ended early");
        }
        const double d = std::bit_cast<double>(read_u64_le(p));
        p += 8;
        remaining -= 8;
        return d;
    }
};

}  // namespace

std::uint64_t bundle_checksum(const std::uint8_t* data, std::size_t size) {
    std::uint64_t hash = 1469598103934665603ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= data[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

const char* to_string(PipelineMode mode) {
    return mode == PipelineMode::visual ? "visual" : "logpolar";
}

PipelineMode pipeline_mode_from_string(const std::string& name) {
    if (name == "visual") return PipelineMode::visual;
    if (name == "logpolar" || name == "log-polar") return PipelineMode::log_polar;
    throw InvalidInput("unknown pipeline mode: " + name + " (expected visual or logpolar)");
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    Manifest m;
    m.set("mode", to_string(bundle.mode));
    m.set("input_width", bundle.input_width);
    m.set("input_height", bundle.input_height);
    m.set("feature_width", bundle.feature_width);
    m.set("num_classes", bundle.num_classes);
    m.set("logpolar_base", bundle.logpolar.base);
    m.set("logpolar_r_min", bundle.logpolar.r_min);
    m.set("logpolar_fill", static_cast<int>(bundle.logpolar.fill));
    m.set("eigen_dim", bundle.eigenspace.dim());
    m.set("eigen_components", bundle.eigenspace.components());

    std::string sizes;
    for (std::size_t i = 0; i < bundle.network.layer_sizes.size(); ++i) {
        if (i) sizes += ',';
        sizes += std::to_string(bundle.network.layer_sizes[i]);
    }
    m.set("layer_sizes", sizes);

    const Hyperparams& hp = bundle.hyperparams;
    m.set("mlp_learning_rate", hp.learning_rate);
    m.set("mlp_momentum", hp.momentum);
    m.set("mlp_rate_increment", hp.rate_increment);
    m.set("mlp_rate_decay", hp.rate_decay);
    m.set("mlp_smoothing", hp.smoothing);
    m.set("mlp_max_epochs", hp.max_epochs);
    m.set("mlp_gradient_goal", hp.gradient_goal);
    m.set("mlp_error_goal", hp.error_goal);
    m.set("mlp_seed", hp.seed);

    m.set("trained_seed", bundle.info.seed);
    m.set("epochs_run", bundle.info.epochs_run);
    m.set("final_error", bundle.info.final_error);
    m.set("stop_reason", bundle.info.stop_reason.empty() ? "unknown" : bundle.info.stop_reason);
    m.set("feature_padding", bundle.info.feature_padding ? 1 : 0);

    std::vector<std::uint8_t> bytes;
    {
        std::ostringstream head;
        head << kMagic << ' ' << ModelBundle::format_version << '\n' << m.text();
        const std::string& h = head.str();
        bytes.assign(h.begin(), h.end());
    }

    // The scale block always holds exactly feature_width entries; an unset
    // vector means unit scaling.
    std::vector<double> scale = bundle.feature_scale;
    if (scale.empty()) {
        scale.assign(static_cast<std::size_t>(bundle.feature_width), 1.0);
    }
    if (static_cast<int>(scale.size()) != bundle.feature_width) {
        throw PersistenceError("feature_scale length " + std::to_string(scale.size()) +
                               " does not match feature width " +
                               std::to_string(bundle.feature_width));
    }

    std::size_t n_doubles = bundle.eigenspace.mean.size() + bundle.eigenspace.basis.size() +
                            bundle.eigenspace.eigenvalues.size() + scale.size();
    for (const auto& layer : bundle.network.layers) {
        n_doubles += layer.weights.size() + layer.bias.size();
    }
    {
        const std::string marker = "data " + std::to_string(n_doubles) + "\n";
        bytes.insert(bytes.end(), marker.begin(), marker.end());
    }

    for (double d : bundle.eigenspace.mean) append_double(bytes, d);
    for (std::size_t i = 0; i < bundle.eigenspace.basis.size(); ++i) {
        append_double(bytes, bundle.eigenspace.basis.data()[i]);
    }
    for (double d : bundle.eigenspace.eigenvalues) append_double(bytes, d);
    for (double d : scale) append_double(bytes, d);
    for (const auto& layer : bundle.network.layers) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            append_double(bytes, layer.weights.data()[i]);
        }
        for (double b : layer.bias) append_double(bytes, b);
    }

    append_u64_le(bytes, fnv1a64(bytes.data(), bytes.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw PersistenceError("cannot open " + path + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw PersistenceError("short write to " + path);
    }
}

ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PersistenceError("cannot open " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 8 + sizeof kMagic) {
        throw PersistenceError(path + ": malformed container (too short)");
    }

    // Structural checks first so truncation reads as such; the checksum
    // then covers bit corruption anywhere in the surviving bytes.
    const std::string text(bytes.begin(), bytes.end());
    const auto data_pos = text.find("\ndata ");
    if (data_pos == std::string::npos) {
        throw PersistenceError(path + ": malformed container (no data marker)");
    }
    const auto data_end = text.find('\n', data_pos + 1);
    if (data_end == std::string::npos) {
        throw PersistenceError(path + ": malformed container (unterminated data marker)");
    }

    std::size_t declared_doubles = 0;
    {
        std::istringstream marker(text.substr(data_pos + 1, data_end - data_pos - 1));
        std::string word;
        marker >> word >> declared_doubles;
    }
    const std::size_t expected_size = (data_end + 1) + declared_doubles * 8 + 8;
    if (bytes.size() != expected_size) {
        throw PersistenceError(path + ": malformed container (truncated or padded: have " +
                               std::to_string(bytes.size()) + " bytes, expected " +
                               std::to_string(expected_size) + ")");
    }

    const std::uint64_t want = read_u64_le(bytes.data() + bytes.size() - 8);
    const std::uint64_t got = fnv1a64(bytes.data(), bytes.size() - 8);
    if (want != got) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "checksum mismatch: stored %016" PRIx64 ", computed %016" PRIx64,
                      want, got);
        throw PersistenceError(path + ": " + msg);
    }

    std::istringstream head(text.substr(0, data_pos + 1));
    std::string magic;
    int version = -1;
    head >> magic >> version;
    if (magic != kMagic) {
        throw PersistenceError(path + ": not a model bundle (bad magic)");
    }
    if (version != ModelBundle::format_version) {
        throw PersistenceError(path + ": format version mismatch: file has " +
                               std::to_string(version) + ", this build reads " +
                               std::to_string(ModelBundle::format_version));
    }
    std::string rest;
    std::getline(head, rest);  // consume the magic line's newline

    std::string manifest_text;
    {
        std::ostringstream manifest_stream;
        std::string line;
        while (std::getline(head, line)) manifest_stream << line << '\n';
        manifest_text = manifest_stream.str();
    }
    const Manifest m = Manifest::parse(manifest_text);

    ModelBundle bundle;
    bundle.mode = pipeline_mode_from_string(m.get("mode"));
    bundle.input_width = m.get_int("input_width");
    bundle.input_height = m.get_int("input_height");
    bundle.feature_width = m.get_int("feature_width");
    bundle.num_classes = m.get_int("num_classes");
    bundle.logpolar.base = m.get_int("logpolar_base");
    bundle.logpolar.r_min = m.get_double("logpolar_r_min");
    bundle.logpolar.fill = static_cast<std::uint8_t>(m.get_int("logpolar_fill"));

    Hyperparams& hp = bundle.hyperparams;
    hp.learning_rate = m.get_double("mlp_learning_rate");
    hp.momentum = m.get_double("mlp_momentum");
    hp.rate_increment = m.get_double("mlp_rate_increment");
    hp.rate_decay = m.get_double("mlp_rate_decay");
    hp.smoothing = m.get_double("mlp_smoothing");
    hp.max_epochs = m.get_int("mlp_max_epochs");
    hp.gradient_goal = m.get_double("mlp_gradient_goal");
    hp.error_goal = m.get_double("mlp_error_goal");
    hp.seed = m.get_u32("mlp_seed");

    bundle.info.seed = m.get_u32("trained_seed");
    bundle.info.epochs_run = m.get_int("epochs_run");
    bundle.info.final_error = m.get_double("final_error");
    bundle.info.stop_reason = m.get("stop_reason");
    bundle.info.feature_padding = m.get_int("feature_padding") != 0;

    const int dim = m.get_int("eigen_dim");
    const int components = m.get_int("eigen_components");
    if (dim < 1 || components < 0) {
        throw PersistenceError(path + ": malformed eigenspace dimensions");
    }

    std::vector<int> layer_sizes;
    {
        std::istringstream sizes(m.get("layer_sizes"));
        std::string token;
        while (std::getline(sizes, token, ',')) layer_sizes.push_back(std::stoi(token));
        if (layer_sizes.size() < 2) {
            throw PersistenceError(path + ": malformed layer_sizes");
        }
    }

    const std::size_t block_begin = data_end + 1;
    DoubleReader reader{bytes.data() + block_begin, declared_doubles * 8};

    bundle.eigenspace.mean.resize(static_cast<std::size_t>(dim));
    for (double& d : bundle.eigenspace.mean) d = reader.next();
    bundle.eigenspace.basis = Matrix(dim, components);
    for (std::size_t i = 0; i < bundle.eigenspace.basis.size(); ++i) {
        bundle.eigenspace.basis.data()[i] = reader.next();
    }
    bundle.eigenspace.eigenvalues.resize(static_cast<std::size_t>(components));
    for (double& d : bundle.eigenspace.eigenvalues) d = reader.next();

    bundle.feature_scale.resize(static_cast<std::size_t>(bundle.feature_width));
    for (double& d : bundle.feature_scale) d = reader.next();

    bundle.network.layer_sizes = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        Layer layer;
        layer.weights = Matrix(layer_sizes[l + 1], layer_sizes[l]);
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            layer.weights.data()[i] = reader.next();
        }
        layer.bias.resize(static_cast<std::size_t>(layer_sizes[l + 1]));
        for (double& b : layer.bias) b = reader.next();
        bundle.network.layers.push_back(std::move(layer));
    }
    if (reader.remaining != 0) {
        throw PersistenceError(path + ": malformed container (unread trailing data)");
    }
    return bundle;
}

}  // namespace lpface
