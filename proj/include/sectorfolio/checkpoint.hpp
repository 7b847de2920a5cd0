#pragma once

// Binary model checkpoint. All integers and floats are little-endian.
//
//   offset  size  field
//   0       8     magic "SFLSTMCK"
//   8       4     u32 format version (kCheckpointVersion)
//   12      8     u64 byte length L of the config document
//   20      L     LstmConfig as UTF-8 JSON
//   ..      8     f64 scaler min
//   ..      8     f64 scaler max
//   ..      4     u32 tensor count N
//   then N times:
//           4     u32 name length K
//           K     tensor name (e.g. "lstm0.w_input")
//           4     u32 rank (always 2)
//           8     u64 rows
//           8     u64 cols
//           8*r*c f64 values, row-major
//
// The reader rebuilds the expected shapes from the config and rejects any
// mismatch, unknown version, truncation or trailing bytes.

#include <bit>
#include <cstdint>
#include <cstring>
#include <set>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sectorfolio/error.hpp"
#include "sectorfolio/training.hpp"

namespace sectorfolio::forecast {

inline constexpr std::string_view kCheckpointMagic = "SFLSTMCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline nlohmann::ordered_json lstm_config_to_json(const LstmConfig& c) {
    return {{"window", c.window},
            {"horizon", c.horizon},
            {"lstm_layers", c.lstm_layers},
            {"dropout_rate", c.dropout_rate},
            {"dense_width", c.dense_width},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"huber_delta", c.huber_delta},
            {"seed", c.seed}};
}

/// Missing keys keep their defaults; unknown keys are errors.
inline LstmConfig lstm_config_from_json(const nlohmann::json& j, LstmConfig c = {}) {
    if (!j.is_object())
        throw std::invalid_argument("lstm config must be an object");
    static const std::set<std::string> known{"window", "horizon", "lstm_layers", "dropout_rate",
                                             "dense_width", "batch_size", "epochs", "learning_rate",
                                             "huber_delta", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("unknown lstm config key '" + it.key() + "'");
    try {
        if (j.contains("window")) c.window = j.at("window").get<int>();
        if (j.contains("horizon")) c.horizon = j.at("horizon").get<int>();
        if (j.contains("lstm_layers")) c.lstm_layers = j.at("lstm_layers").get<std::vector<int>>();
        if (j.contains("dropout_rate")) c.dropout_rate = j.at("dropout_rate").get<double>();
        if (j.contains("dense_width")) c.dense_width = j.at("dense_width").get<int>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
        if (j.contains("huber_delta")) c.huber_delta = j.at("huber_delta").get<double>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("lstm config: ") + e.what());
    }
    c.validate();
    return c;
}

namespace detail {

class ByteWriter {
public:
    void bytes(std::string_view s) { out_.append(s); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    std::string take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i)
            out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}

    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n)
            throw ParseError("checkpoint truncated at byte " + std::to_string(pos_));
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::string serialize_checkpoint(const LstmModel& model) {
    detail::ByteWriter w;
    w.bytes(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    const std::string cfg = lstm_config_to_json(model.config).dump();
    w.u64(cfg.size());
    w.bytes(cfg);
    w.f64(model.scaler.min);
    w.f64(model.scaler.max);
    w.u32(static_cast<std::uint32_t>(model.params.lstm.size() * 3 + 4));
    model.params.for_each([&](const std::string& name, const Eigen::MatrixXd& t) {
        w.u32(static_cast<std::uint32_t>(name.size()));
        w.bytes(name);
        w.u32(2);
        w.u64(static_cast<std::uint64_t>(t.rows()));
        w.u64(static_cast<std::uint64_t>(t.cols()));
        for (Eigen::Index i = 0; i < t.rows(); ++i)
            for (Eigen::Index j = 0; j < t.cols(); ++j)
                w.f64(t(i, j));
    });
    return w.take();
}

inline LstmModel deserialize_checkpoint(std::string_view bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic)
        throw ParseError("checkpoint: bad magic");
    if (auto v = r.u32(); v != kCheckpointVersion)
        throw ParseError("checkpoint: unsupported version " + std::to_string(v));
    const auto cfg_len = r.u64();
    if (cfg_len > bytes.size())
        throw ParseError("checkpoint: config length out of range");
    LstmModel model;
    try {
        model.config = lstm_config_from_json(nlohmann::json::parse(r.bytes(static_cast<std::size_t>(cfg_len))));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("checkpoint: bad config: ") + e.what());
    }
    model.scaler.min = r.f64();
    model.scaler.max = r.f64();
    try {
        model.scaler.validate();
    } catch (const std::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    model.params = make_parameters(model.config);
    const auto count = r.u32();
    if (count != model.params.lstm.size() * 3 + 4)
        throw ParseError("checkpoint: expected " + std::to_string(model.params.lstm.size() * 3 + 4) +
                         " tensors, found " + std::to_string(count));
    model.params.for_each([&](const std::string& name, Eigen::MatrixXd& t) {
        const auto len = r.u32();
        if (r.bytes(len) != name)
            throw ParseError("checkpoint: expected tensor " + name);
        const auto rank = r.u32();
        const auto rows = r.u64(), cols = r.u64();
        if (rank != 2 || rows != static_cast<std::uint64_t>(t.rows()) ||
            cols != static_cast<std::uint64_t>(t.cols()))
            throw ParseError("checkpoint: shape mismatch for " + name);
        for (Eigen::Index i = 0; i < t.rows(); ++i)
            for (Eigen::Index j = 0; j < t.cols(); ++j)
                t(i, j) = r.f64();
    });
    if (!r.done())
        throw ParseError("checkpoint: trailing bytes");
    if (!model.params.all_finite())
        throw ParseError("checkpoint: non-finite parameter");
    return model;
}

} // namespace sectorfolio::forecast
