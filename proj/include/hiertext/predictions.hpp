#pragma once

// Per-example model outputs and their CSV form:
//
//   rewire_id,label,prob_<key>,...
//
// one probability column per class in class-list order, labels written in
// their canonical display form, probabilities in shortest round-trip form.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hiertext/csv.hpp"
#include "hiertext/error.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext {

struct PredictionSet {
    std::string model_id;
    Level level = Level::A;
    std::vector<std::string> class_list;
    std::vector<std::string> example_ids;
    std::vector<std::vector<double>> probs;
    std::vector<std::size_t> labels;

    PredictionSet() = default;
    PredictionSet(std::string id, Level lvl) : model_id(std::move(id)), level(lvl), class_list(class_keys(lvl)) {}

    std::size_t size() const noexcept { return example_ids.size(); }

    void push_back(std::string example_id, std::vector<double> p, std::size_t label) {
        example_ids.push_back(std::move(example_id));
        probs.push_back(std::move(p));
        labels.push_back(label);
    }

    AnyLabel label(std::size_t i) const { return label_at(level, labels[i]); }

    /// Row of each example id.
    std::unordered_map<std::string, std::size_t> id_index() const {
        std::unordered_map<std::string, std::size_t> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.emplace(example_ids[i], i);
        return out;
    }
};

inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error(ErrorKind::InvalidArgument, "cannot format number");
    return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw Error(ErrorKind::MalformedRow, "not a number: '" + std::string(text) + "'");
    return value;
}

inline void write_predictions(std::ostream& out, const PredictionSet& preds) {
    csv::Row header{"rewire_id", "label"};
    for (const auto& key : preds.class_list) header.push_back("prob_" + key);
    csv::write_row(out, header);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        csv::Row row{preds.example_ids[i], render(preds.label(i))};
        for (double p : preds.probs[i]) row.push_back(format_double(p));
        csv::write_row(out, row);
    }
}

inline void save_predictions(const std::filesystem::path& path, const PredictionSet& preds) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    write_predictions(out, preds);
}

/// The level is inferred from the probability columns, which must be exactly
/// one level's class list in order.
inline PredictionSet read_predictions(std::istream& in, std::string model_id) {
    csv::Reader reader(in);
    auto header_row = reader.next();
    if (!header_row) throw Error(ErrorKind::MalformedRow, "prediction file has no header");
    const csv::Header header(std::move(*header_row));
    const auto id_col = header.require("rewire_id");
    const auto label_col = header.require("label");

    std::vector<std::string> keys;
    std::vector<std::size_t> prob_cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& name = header.names()[i];
        if (name.starts_with("prob_")) {
            keys.push_back(name.substr(5));
            prob_cols.push_back(i);
        }
    }
    std::optional<Level> level;
    for (Level l : {Level::A, Level::B, Level::C})
        if (keys == class_keys(l)) level = l;
    if (!level) throw Error(ErrorKind::MalformedRow, "probability columns do not match any task level");

    PredictionSet out(std::move(model_id), *level);
    while (auto row = reader.next()) {
        if (row->size() == 1 && row->front().empty()) continue;
        if (row->size() != header.size())
            throw Error(ErrorKind::MalformedRow, "line " + std::to_string(reader.line()) + ": wrong column count");
        std::vector<double> probs;
        probs.reserve(prob_cols.size());
        for (auto c : prob_cols) probs.push_back(parse_double((*row)[c]));
        const auto label = class_index(parse_label((*row)[label_col], *level));
        out.push_back((*row)[id_col], std::move(probs), label);
    }
    if (out.id_index().size() != out.size()) throw Error(ErrorKind::DuplicateId, "repeated rewire_id in prediction file");
    return out;
}

inline PredictionSet load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return read_predictions(in, path.stem().string());
}

} // namespace hiertext
