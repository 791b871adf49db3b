#pragma once

// Model file layout (all integers and floats little-endian):
//
//   "HTXM"                 4 bytes magic
//   version                u16
//   header length          u32
//   header                 UTF-8 JSON: level, class_list, dimension,
//                          featurizer config, fitted_on, has_idf, metadata
//   weights                f64 * (dimension * n_classes), feature-major
//   bias                   f64 * n_classes
//   idf                    f64 * dimension, only when has_idf
//   crc32                  u32 over every preceding byte

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "hiertext/error.hpp"
#include "hiertext/features.hpp"
#include "hiertext/model.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext {

inline constexpr std::string_view model_magic = "HTXM";
inline constexpr std::uint16_t model_format_version = 1;

/// A trained classifier together with everything needed to featurize input.
struct Model {
    Level level = Level::A;
    ModelParams params;
    Featurizer featurizer{FeaturizerConfig{}};
    nlohmann::json metadata = nlohmann::json::object();

    Prediction predict(std::string_view text) const { return predict_one(params, featurizer, text); }
};

namespace detail {

class ByteWriter {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    template <typename T>
    void scalar(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        if constexpr (std::endian::native == std::endian::big) value = byteswap_any(value);
        char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        buf_.insert(buf_.end(), raw, raw + sizeof(T));
    }

    void doubles(const std::vector<double>& values) {
        if constexpr (std::endian::native == std::endian::little) {
            const auto* raw = reinterpret_cast<const char*>(values.data());
            buf_.insert(buf_.end(), raw, raw + values.size() * sizeof(double));
        } else {
            for (double v : values) scalar(v);
        }
    }

    const std::vector<char>& buffer() const noexcept { return buf_; }

    template <typename T>
    static T byteswap_any(T value) {
        char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        std::reverse(raw, raw + sizeof(T));
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

private:
    std::vector<char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const char> data) : data_(data) {}

    std::string_view bytes(std::size_t n) {
        need(n);
        std::string_view out(data_.data() + pos_, n);
        pos_ += n;
        return out;
    }

    template <typename T>
    T scalar() {
        need(sizeof(T));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        if constexpr (std::endian::native == std::endian::big) value = ByteWriter::byteswap_any(value);
        return value;
    }

    std::vector<double> doubles(std::size_t n) {
        if (n > (data_.size() - pos_) / sizeof(double)) throw Error(ErrorKind::CorruptModel, "truncated array");
        std::vector<double> out(n);
        for (auto& v : out) v = scalar<double>();
        return out;
    }

    std::size_t position() const noexcept { return pos_; }

private:
    void need(std::size_t n) const {
        if (n > data_.size() - pos_) throw Error(ErrorKind::CorruptModel, "truncated file");
    }

    std::span<const char> data_;
    std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::span<const char> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

} // namespace detail

inline std::vector<char> serialize_model(const Model& model) {
    const auto& p = model.params;
    nlohmann::json header{
        {"level", std::string(to_string(model.level))},
        {"class_list", p.class_list},
        {"dimension", p.dimension},
        {"featurizer", model.featurizer.config()},
        {"fitted_on", model.featurizer.fitted_on()},
        {"has_idf", model.featurizer.idf().has_value()},
        {"metadata", model.metadata},
    };
    const std::string header_text = header.dump();

    detail::ByteWriter w;
    w.bytes(model_magic);
    w.scalar<std::uint16_t>(model_format_version);
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(header_text.size()));
    w.bytes(header_text);
    w.doubles(p.weights);
    w.doubles(p.bias);
    if (model.featurizer.idf()) w.doubles(*model.featurizer.idf());
    w.scalar<std::uint32_t>(detail::crc32_of(w.buffer()));
    return w.buffer();
}

inline Model deserialize_model(std::span<const char> bytes) {
    if (bytes.size() < model_magic.size() + 2 + 4 + 4) throw Error(ErrorKind::CorruptModel, "file too short");
    const auto body = bytes.first(bytes.size() - 4);
    detail::ByteReader tail(bytes.last(4));
    if (tail.scalar<std::uint32_t>() != detail::crc32_of(body)) throw Error(ErrorKind::CorruptModel, "checksum mismatch");

    detail::ByteReader r(body);
    if (r.bytes(model_magic.size()) != model_magic) throw Error(ErrorKind::CorruptModel, "bad magic");
    const auto version = r.scalar<std::uint16_t>();
    if (version != model_format_version)
        throw Error(ErrorKind::CorruptModel, "unsupported version " + std::to_string(version));
    const auto header_len = r.scalar<std::uint32_t>();

    Model model;
    try {
        const auto header = nlohmann::json::parse(r.bytes(header_len));
        model.level = parse_level(header.at("level").get<std::string>());
        model.params.class_list = header.at("class_list").get<std::vector<std::string>>();
        model.params.dimension = header.at("dimension").get<std::size_t>();
        FeaturizerConfig fc = header.at("featurizer").get<FeaturizerConfig>();
        const bool has_idf = header.at("has_idf").get<bool>();
        const auto fitted_on = header.at("fitted_on").get<std::size_t>();
        model.metadata = header.at("metadata");

        if (fc.dimension != model.params.dimension) throw Error(ErrorKind::CorruptModel, "dimension disagreement");
        const auto k = model.params.class_list.size();
        if (k == 0 || model.params.class_list != class_keys(model.level))
            throw Error(ErrorKind::CorruptModel, "class list does not match level");
        model.params.weights = r.doubles(model.params.dimension * k);
        model.params.bias = r.doubles(k);
        std::optional<std::vector<double>> idf;
        if (has_idf) idf = r.doubles(model.params.dimension);
        if (r.position() != body.size()) throw Error(ErrorKind::CorruptModel, "trailing bytes");
        model.featurizer = Featurizer(std::move(fc), std::move(idf), fitted_on);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::CorruptModel, std::string("header: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::CorruptModel) throw;
        throw Error(ErrorKind::CorruptModel, e.what());
    }
    return model;
}

inline void save_model(const std::filesystem::path& path, const Model& model) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

inline Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace hiertext
