#pragma once

// Text -> sparse hashed n-gram vectors.
//
// Word n-grams are taken over whitespace tokens (edge punctuation trimmed)
// joined by single spaces. Character n-grams are taken inside each token
// padded with one space on both sides, counted in code points. Each n-gram
// is hashed with FNV-1a 64 over a one-byte space tag (0x01 word, 0x02 char)
// followed by its UTF-8 bytes; index = hash mod dimension.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <nlohmann/json.hpp>

#include "hiertext/data.hpp"
#include "hiertext/error.hpp"
#include "hiertext/rng.hpp"

namespace hiertext {

struct NgramRange {
    int min = 1;
    int max = 1;
    friend bool operator==(const NgramRange&, const NgramRange&) = default;
};

struct FeaturizerConfig {
    std::optional<NgramRange> word_ngrams = NgramRange{1, 2};
    std::optional<NgramRange> char_ngrams = NgramRange{3, 5}; // nullopt disables
    std::size_t dimension = std::size_t{1} << 18;
    bool use_idf = true;
    bool lowercase = true;

    friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;

    void validate() const {
        if (dimension < 2 || (dimension & (dimension - 1)) != 0)
            throw Error(ErrorKind::InvalidArgument, "dimension must be a power of two >= 2");
        if (dimension > (std::size_t{1} << 31)) throw Error(ErrorKind::InvalidArgument, "dimension above 2^31");
        for (const auto& r : {word_ngrams, char_ngrams})
            if (r && (r->min < 1 || r->min > r->max))
                throw Error(ErrorKind::InvalidArgument, "n-gram range must satisfy 1 <= min <= max");
        if (!word_ngrams && !char_ngrams) throw Error(ErrorKind::InvalidArgument, "no n-gram space enabled");
    }
};

inline void to_json(nlohmann::json& j, const NgramRange& r) { j = nlohmann::json::array({r.min, r.max}); }
inline void from_json(const nlohmann::json& j, NgramRange& r) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Config, "n-gram range must be [min, max]");
    r.min = j[0].get<int>();
    r.max = j[1].get<int>();
}

inline void to_json(nlohmann::json& j, const FeaturizerConfig& c) {
    j = nlohmann::json{{"dimension", c.dimension}, {"use_idf", c.use_idf}, {"lowercase", c.lowercase}};
    j["word_ngrams"] = c.word_ngrams ? nlohmann::json(*c.word_ngrams) : nlohmann::json(nullptr);
    j["char_ngrams"] = c.char_ngrams ? nlohmann::json(*c.char_ngrams) : nlohmann::json(nullptr);
}

/// Missing keys keep their current values, so a partial object overrides defaults.
inline void from_json(const nlohmann::json& j, FeaturizerConfig& c) {
    if (j.contains("dimension")) c.dimension = j.at("dimension").get<std::size_t>();
    if (j.contains("use_idf")) c.use_idf = j.at("use_idf").get<bool>();
    if (j.contains("lowercase")) c.lowercase = j.at("lowercase").get<bool>();
    for (auto [key, field] : {std::pair{"word_ngrams", &c.word_ngrams}, std::pair{"char_ngrams", &c.char_ngrams}}) {
        if (!j.contains(key)) continue;
        if (j.at(key).is_null())
            field->reset();
        else
            *field = j.at(key).get<NgramRange>();
    }
}

struct FeatureVector {
    std::vector<std::uint32_t> indices; // strictly increasing
    std::vector<double> values;
    std::size_t dimension = 0;

    std::size_t nnz() const noexcept { return indices.size(); }

    double norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

/// NFC, optional lowercasing, whitespace runs collapsed to one space, trimmed.
inline std::string preprocess(std::string_view text, bool lowercase = true) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error(ErrorKind::InvalidArgument, "ICU NFC normalizer unavailable");

    icu::UnicodeString source = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString normalized = nfc->normalize(source, status);
    if (U_FAILURE(status)) throw Error(ErrorKind::InvalidArgument, "NFC normalization failed");
    if (lowercase) normalized.toLower(icu::Locale::getRoot());

    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < normalized.length();) {
        const UChar32 cp = normalized.char32At(i);
        i += U16_LENGTH(cp);
        if (u_isUWhiteSpace(cp)) {
            pending_space = !collapsed.isEmpty();
            continue;
        }
        if (pending_space) {
            collapsed.append(static_cast<UChar>(u' '));
            pending_space = false;
        }
        collapsed.append(cp);
    }
    std::string out;
    collapsed.toUTF8String(out);
    return out;
}

namespace detail {

inline constexpr std::uint8_t word_space_tag = 0x01;
inline constexpr std::uint8_t char_space_tag = 0x02;

inline std::uint64_t hash_ngram(std::uint8_t tag, std::string_view bytes) {
    Fnv1a64 h;
    h.update(tag);
    h.update(bytes);
    return h.digest();
}

inline bool is_edge_punct(UChar32 cp) { return u_ispunct(cp) != 0; }

// Whitespace tokens of an already preprocessed string, edge punctuation trimmed.
inline std::vector<std::string_view> tokenize(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find(' ', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view tok = text.substr(start, end - start);
        start = end + 1;

        // Trim leading punctuation.
        while (!tok.empty()) {
            int32_t i = 0;
            UChar32 cp;
            U8_NEXT(reinterpret_cast<const std::uint8_t*>(tok.data()), i, static_cast<int32_t>(tok.size()), cp);
            if (cp < 0 || !is_edge_punct(cp)) break;
            tok.remove_prefix(static_cast<std::size_t>(i));
        }
        // Trim trailing punctuation.
        while (!tok.empty()) {
            auto i = static_cast<int32_t>(tok.size());
            UChar32 cp;
            U8_PREV(reinterpret_cast<const std::uint8_t*>(tok.data()), 0, i, cp);
            if (cp < 0 || !is_edge_punct(cp)) break;
            tok.remove_suffix(tok.size() - static_cast<std::size_t>(i));
        }
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// Byte offsets of every code point boundary in s (including s.size()).
inline std::vector<std::size_t> code_point_offsets(std::string_view s) {
    std::vector<std::size_t> out;
    int32_t i = 0;
    const auto n = static_cast<int32_t>(s.size());
    while (i < n) {
        out.push_back(static_cast<std::size_t>(i));
        UChar32 cp;
        U8_NEXT(reinterpret_cast<const std::uint8_t*>(s.data()), i, n, cp);
    }
    out.push_back(s.size());
    return out;
}

} // namespace detail

/// Calls sink(index) once per n-gram occurrence in an already preprocessed text.
template <typename Sink>
void for_each_ngram_index(const FeaturizerConfig& cfg, std::string_view text, Sink&& sink) {
    const auto mask = static_cast<std::uint64_t>(cfg.dimension - 1);
    const auto tokens = detail::tokenize(text);

    if (cfg.word_ngrams) {
        std::string gram;
        for (int n = cfg.word_ngrams->min; n <= cfg.word_ngrams->max; ++n) {
            const auto un = static_cast<std::size_t>(n);
            for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
                gram.assign(tokens[i]);
                for (std::size_t j = 1; j < un; ++j) {
                    gram.push_back(' ');
                    gram.append(tokens[i + j]);
                }
                sink(static_cast<std::uint32_t>(detail::hash_ngram(detail::word_space_tag, gram) & mask));
            }
        }
    }
    if (cfg.char_ngrams) {
        std::string padded;
        for (auto tok : tokens) {
            padded.assign(" ");
            padded.append(tok);
            padded.push_back(' ');
            const auto offsets = detail::code_point_offsets(padded);
            const std::size_t len = offsets.size() - 1;
            for (int n = cfg.char_ngrams->min; n <= cfg.char_ngrams->max; ++n) {
                const auto un = static_cast<std::size_t>(n);
                for (std::size_t i = 0; i + un <= len; ++i) {
                    std::string_view gram(padded.data() + offsets[i], offsets[i + un] - offsets[i]);
                    sink(static_cast<std::uint32_t>(detail::hash_ngram(detail::char_space_tag, gram) & mask));
                }
            }
        }
    }
}

class Featurizer {
public:
    /// Unfitted featurizer; only usable directly when use_idf is false.
    explicit Featurizer(FeaturizerConfig config) : config_(std::move(config)) { config_.validate(); }

    Featurizer(FeaturizerConfig config, std::optional<std::vector<double>> idf, std::size_t fitted_on)
        : config_(std::move(config)), idf_(std::move(idf)), fitted_on_(fitted_on) {
        config_.validate();
        if (idf_.has_value() != config_.use_idf)
            throw Error(ErrorKind::InvalidArgument, "idf must be present exactly when use_idf is set");
        if (idf_ && idf_->size() != config_.dimension)
            throw Error(ErrorKind::DimensionMismatch, "idf length differs from dimension");
    }

    const FeaturizerConfig& config() const noexcept { return config_; }
    const std::optional<std::vector<double>>& idf() const noexcept { return idf_; }
    std::size_t fitted_on() const noexcept { return fitted_on_; }
    std::size_t dimension() const noexcept { return config_.dimension; }

    FeatureVector transform(std::string_view text) const {
        if (config_.use_idf && !idf_) throw Error(ErrorKind::InvalidArgument, "featurizer uses idf but was not fitted");
        const std::string clean = preprocess(text, config_.lowercase);

        std::vector<std::uint32_t> hits;
        for_each_ngram_index(config_, clean, [&](std::uint32_t idx) { hits.push_back(idx); });
        std::sort(hits.begin(), hits.end());

        FeatureVector out;
        out.dimension = config_.dimension;
        for (std::size_t i = 0; i < hits.size();) {
            std::size_t j = i;
            while (j < hits.size() && hits[j] == hits[i]) ++j;
            double value = static_cast<double>(j - i);
            if (idf_) value *= (*idf_)[hits[i]];
            out.indices.push_back(hits[i]);
            out.values.push_back(value);
            i = j;
        }
        const double norm = out.norm();
        if (norm > 0.0)
            for (double& v : out.values) v /= norm;
        return out;
    }

private:
    FeaturizerConfig config_;
    std::optional<std::vector<double>> idf_;
    std::size_t fitted_on_ = 0;
};

/// Smoothed idf: ln((1 + N) / (1 + df)) + 1, df counted per hashed dimension.
inline Featurizer fit_featurizer(const FeaturizerConfig& config, std::span<const std::string> corpus) {
    config.validate();
    if (!config.use_idf) return Featurizer(config, std::nullopt, corpus.size());
    if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "cannot fit idf on an empty corpus");

    std::vector<std::uint32_t> df(config.dimension, 0);
    std::vector<std::uint32_t> doc_hits;
    for (const auto& text : corpus) {
        doc_hits.clear();
        for_each_ngram_index(config, preprocess(text, config.lowercase),
                             [&](std::uint32_t idx) { doc_hits.push_back(idx); });
        std::sort(doc_hits.begin(), doc_hits.end());
        doc_hits.erase(std::unique(doc_hits.begin(), doc_hits.end()), doc_hits.end());
        for (auto idx : doc_hits) ++df[idx];
    }
    const double n = static_cast<double>(corpus.size());
    std::vector<double> idf(config.dimension);
    for (std::size_t d = 0; d < idf.size(); ++d) idf[d] = std::log((1.0 + n) / (1.0 + df[d])) + 1.0;
    return Featurizer(config, std::move(idf), corpus.size());
}

inline Featurizer fit_featurizer(const FeaturizerConfig& config, const Dataset& corpus) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& ex : corpus.examples()) texts.push_back(ex.text);
    return fit_featurizer(config, texts);
}

} // namespace hiertext
