#pragma once

// ModelBundle persistence.
//
// Byte layout (all integers little-endian, doubles IEEE-754 binary64 LE):
//
//   offset  size  field
//   0       8     magic "RAGICBND"
//   8       4     u32 format version
//   12      4     u32 header length N
//   16      N     UTF-8 JSON header (format_version, W, H, K, feature schema,
//                 train/network config, risk hyperparameters, scaler)
//   16+N    4     u32 tensor count
//   ...           per tensor: u32 name length, name bytes, u32 rows, u32 cols,
//                 rows*cols doubles in column-major order
//   end-8   8     u64 FNV-1a checksum of every preceding byte

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragic/error.hpp"
#include "ragic/trainer.hpp"

namespace ragic {

inline constexpr char kBundleMagic[8] = {'R', 'A', 'G', 'I', 'C', 'B', 'N', 'D'};

namespace detail {

inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 0x100000001B3ULL;
    }
    return h;
}

class ByteWriter {
public:
    template <class T>
    void put(const T& v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        bytes.insert(bytes.end(), p, p + sizeof(T));
    }
    void put_bytes(const void* d, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(d);
        bytes.insert(bytes.end(), p, p + n);
    }
    std::vector<std::uint8_t> bytes;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& b, std::size_t limit) : bytes_(b), limit_(limit) {}

    template <class T>
    T get() {
        T v;
        need(sizeof(T));
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void get_doubles(double* out, std::size_t n) {
        need(n * sizeof(double));
        std::memcpy(out, bytes_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > limit_) fail(ErrorKind::integrity, "bundle: truncated or corrupt file");
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

inline nlohmann::json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},       {"batch_size", c.batch_size}, {"lr_generator", c.lr_generator},
            {"lr_critic", c.lr_critic}, {"gamma", c.gamma},           {"xi", c.xi},
            {"n_critic", c.n_critic},   {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs");
    c.batch_size = j.at("batch_size");
    c.lr_generator = j.at("lr_generator");
    c.lr_critic = j.at("lr_critic");
    c.gamma = j.at("gamma");
    c.xi = j.at("xi");
    c.n_critic = j.at("n_critic");
    c.seed = j.at("seed");
    return c;
}

inline nlohmann::json to_json(const GeneratorConfig& c) {
    return {{"window", c.window},
            {"features", c.features},
            {"horizon", c.horizon},
            {"heads", c.heads},
            {"head_dim", c.head_dim},
            {"tcn_layers", c.tcn_layers},
            {"kernel_size", c.kernel_size},
            {"tcn_hidden", c.tcn_hidden},
            {"use_risk_module", c.use_risk_module},
            {"use_temporal_module", c.use_temporal_module}};
}

inline GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    c.window = j.at("window");
    c.features = j.at("features");
    c.horizon = j.at("horizon");
    c.heads = j.at("heads");
    c.head_dim = j.at("head_dim");
    c.tcn_layers = j.at("tcn_layers");
    c.kernel_size = j.at("kernel_size");
    c.tcn_hidden = j.at("tcn_hidden");
    c.use_risk_module = j.at("use_risk_module");
    c.use_temporal_module = j.at("use_temporal_module");
    return c;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_bundle(const ModelBundle& b) {
    nlohmann::json header = {
        {"format_version", b.format_version},
        {"W", b.window()},
        {"H", b.horizon()},
        {"K", b.generator.config.features},
        {"feature_names", b.feature_names},
        {"volatility_mask", b.volatility_mask},
        {"train_config", detail::to_json(b.train)},
        {"generator_config", detail::to_json(b.generator.config)},
        {"critic_hidden", b.critic.hidden()},
        {"risk", {{"delta", detail::to_std(b.generator.risk.delta)},
                  {"lambda", detail::to_std(b.generator.risk.lambda)},
                  {"volatility_mask", b.generator.risk.volatility_mask}}},
        {"scaler", {{"vol_min", b.scaler.vol_min}, {"vol_max", b.scaler.vol_max}}},
    };
    const std::string header_text = header.dump();

    detail::ByteWriter w;
    w.put_bytes(kBundleMagic, sizeof kBundleMagic);
    w.put(b.format_version);
    w.put(static_cast<std::uint32_t>(header_text.size()));
    w.put_bytes(header_text.data(), header_text.size());

    std::uint32_t count = 0;
    b.generator.for_each([&](const std::string&, const auto&) { ++count; });
    b.critic.for_each([&](const std::string&, const auto&) { ++count; });
    w.put(count);
    auto put_tensor = [&](const std::string& name, const auto& t) {
        w.put(static_cast<std::uint32_t>(name.size()));
        w.put_bytes(name.data(), name.size());
        w.put(static_cast<std::uint32_t>(t.rows()));
        w.put(static_cast<std::uint32_t>(t.cols()));
        w.put_bytes(t.data(), static_cast<std::size_t>(t.size()) * sizeof(double));
    };
    b.generator.for_each([&](const std::string& n, const auto& t) { put_tensor("generator." + n, t); });
    b.critic.for_each([&](const std::string& n, const auto& t) { put_tensor("critic." + n, t); });
    w.put(detail::fnv1a(w.bytes.data(), w.bytes.size()));
    return std::move(w.bytes);
}

inline ModelBundle deserialize_bundle(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16 + 4 + 8 || std::memcmp(bytes.data(), kBundleMagic, sizeof kBundleMagic) != 0) {
        fail(ErrorKind::integrity, "bundle: not a model bundle or truncated");
    }
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 8, sizeof version);
    if (version != ModelBundle::kFormatVersion) {
        fail(ErrorKind::version, "bundle: format version " + std::to_string(version) + " not supported (expected " +
                                     std::to_string(ModelBundle::kFormatVersion) + ")");
    }
    const std::size_t body = bytes.size() - 8;
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + body, sizeof stored);
    if (stored != detail::fnv1a(bytes.data(), body)) fail(ErrorKind::integrity, "bundle: checksum mismatch");

    detail::ByteReader r(bytes, body);
    r.get_string(8);
    r.get<std::uint32_t>();
    const auto header_len = r.get<std::uint32_t>();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.get_string(header_len));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::integrity, std::string("bundle: bad header: ") + e.what());
    }

    ModelBundle b;
    try {
        if (header.at("format_version").get<std::uint32_t>() != ModelBundle::kFormatVersion) {
            fail(ErrorKind::version, "bundle: header format version mismatch");
        }
        b.feature_names = header.at("feature_names").get<std::vector<std::string>>();
        b.volatility_mask = header.at("volatility_mask").get<std::vector<bool>>();
        b.train = detail::train_config_from_json(header.at("train_config"));
        b.scaler.vol_min = header.at("scaler").at("vol_min");
        b.scaler.vol_max = header.at("scaler").at("vol_max");
        RiskParams risk;
        risk.delta = detail::to_eigen(header.at("risk").at("delta").get<std::vector<double>>());
        risk.lambda = detail::to_eigen(header.at("risk").at("lambda").get<std::vector<double>>());
        risk.volatility_mask = header.at("risk").at("volatility_mask").get<std::vector<bool>>();
        Rng shape_rng(0);
        b.generator = GeneratorParams::init(detail::generator_config_from_json(header.at("generator_config")),
                                            std::move(risk), shape_rng);
        b.critic = CriticParams::init(header.at("critic_hidden").get<int>(), shape_rng);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::integrity, std::string("bundle: bad header: ") + e.what());
    }

    std::map<std::string, std::pair<std::pair<std::uint32_t, std::uint32_t>, std::vector<double>>> tensors;
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name = r.get_string(r.get<std::uint32_t>());
        const auto rows = r.get<std::uint32_t>();
        const auto cols = r.get<std::uint32_t>();
        std::vector<double> data(static_cast<std::size_t>(rows) * cols);
        r.get_doubles(data.data(), data.size());
        tensors[name] = {{rows, cols}, std::move(data)};
    }
    if (r.position() != body) fail(ErrorKind::integrity, "bundle: trailing bytes");
    std::size_t used = 0;
    auto take = [&](const std::string& name, auto& t) {
        auto it = tensors.find(name);
        if (it == tensors.end()) fail(ErrorKind::integrity, "bundle: missing tensor " + name);
        const auto [rows, cols] = it->second.first;
        if (rows != t.rows() || cols != t.cols()) fail(ErrorKind::integrity, "bundle: shape mismatch for " + name);
        std::memcpy(t.data(), it->second.second.data(), it->second.second.size() * sizeof(double));
        ++used;
    };
    b.generator.for_each([&](const std::string& n, auto& t) { take("generator." + n, t); });
    b.critic.for_each([&](const std::string& n, auto& t) { take("critic." + n, t); });
    if (used != tensors.size()) fail(ErrorKind::integrity, "bundle: unexpected extra tensors");
    return b;
}

inline void save_bundle(const ModelBundle& b, const std::string& path) {
    const auto bytes = serialize_bundle(b);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "write failed for " + path);
}

inline ModelBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::missing_artifact, "model bundle not found: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_bundle(bytes);
}

}  // namespace ragic
