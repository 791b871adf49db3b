#pragma once

// Generator for task-format corpora whose classes are separable by marker
// words. Every post mixes shared filler vocabulary with one marker for its
// Task A class, one for its category and one for its vector, so the labels
// are learnable at every level and always taxonomy-consistent.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hiertext/csv.hpp"
#include "hiertext/data.hpp"
#include "hiertext/rng.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext::synthetic {

struct CorpusSpec {
    std::size_t n = 2000;
    double sexist_fraction = 0.25;
    std::size_t filler_min = 6;
    std::size_t filler_max = 14;
    std::uint64_t seed = 7;
};

namespace detail {

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = [] {
        const char* onsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w"};
        const char* nuclei[] = {"a", "e", "i", "o", "u"};
        const char* codas[] = {"", "n", "r", "s", "t"};
        std::vector<std::string> out;
        for (auto o : onsets)
            for (auto n : nuclei)
                for (auto c : codas) out.push_back(std::string(o) + n + c + "o");
        return out;
    }();
    return words;
}

inline std::string marker(std::string_view group, std::size_t index, std::size_t variant) {
    return "q" + std::string(group) + std::to_string(index) + "x" + std::to_string(variant) + "z";
}

} // namespace detail

/// Rows in the task CSV layout; ids are "synth-<n>".
inline std::vector<Example> generate(const CorpusSpec& spec) {
    SplitMix64 rng(derive_seed(spec.seed, "synthetic-corpus"));
    const auto& filler = detail::filler_words();
    const auto n_sexist = static_cast<std::size_t>(std::llround(spec.sexist_fraction * static_cast<double>(spec.n)));

    std::vector<Example> out;
    out.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Example ex;
        ex.id = "synth-" + std::to_string(i);
        const bool sexist = i < n_sexist;
        ex.label_a = sexist ? TaskALabel::sexist : TaskALabel::not_sexist;

        std::vector<std::string> words;
        const auto n_filler = spec.filler_min + rng.bounded(spec.filler_max - spec.filler_min + 1);
        for (std::size_t w = 0; w < n_filler; ++w) words.push_back(filler[rng.bounded(filler.size())]);

        const auto variant = [&] { return static_cast<std::size_t>(rng.bounded(3)); };
        words.push_back(detail::marker("a", sexist ? 1 : 0, variant()));
        if (sexist) {
            const auto vec_index = static_cast<std::size_t>(rng.bounded(class_count(Level::C)));
            const auto vec = std::get<VectorLabel>(label_at(Level::C, vec_index));
            ex.label_c = vec;
            ex.label_b = parent_of(vec);
            words.push_back(detail::marker("b", static_cast<std::size_t>(vec.category), variant()));
            words.push_back(detail::marker("c", vec_index, variant()));
        }
        shuffle(std::span(words), rng);

        for (std::size_t w = 0; w < words.size(); ++w) {
            if (w) ex.text.push_back(' ');
            ex.text += words[w];
        }
        out.push_back(std::move(ex));
    }
    // Interleave classes so file order carries no label signal.
    shuffle(std::span(out), rng);
    return out;
}

inline void write_corpus(std::ostream& out, const std::vector<Example>& rows) {
    csv::write_row(out, {"rewire_id", "text", "label_sexist", "label_category", "label_vector"});
    for (const auto& ex : rows) {
        csv::write_row(out, {ex.id, ex.text, ex.label_a ? render(*ex.label_a) : "",
                             ex.label_b ? render(*ex.label_b) : "none", ex.label_c ? render(*ex.label_c) : "none"});
    }
}

inline void write_corpus(const std::filesystem::path& path, const std::vector<Example>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    write_corpus(out, rows);
}

} // namespace hiertext::synthetic
