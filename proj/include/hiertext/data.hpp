#pragma once

// Dataset ingestion (task CSV format), class statistics, balanced class
// weights, and seeded stratified holdout / k-fold partitioning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hiertext/csv.hpp"
#include "hiertext/error.hpp"
#include "hiertext/rng.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext {

struct Example {
    std::string id;
    std::string text;
    std::optional<TaskALabel> label_a;
    std::optional<CategoryLabel> label_b;
    std::optional<VectorLabel> label_c;

    std::optional<AnyLabel> label(Level level) const {
        switch (level) {
        case Level::A: if (label_a) return AnyLabel{*label_a}; break;
        case Level::B: if (label_b) return AnyLabel{*label_b}; break;
        case Level::C: if (label_c) return AnyLabel{*label_c}; break;
        }
        return std::nullopt;
    }
};

/// Ordered examples with unique ids. When `level` is set every example
/// carries a label at that level.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<Example> examples, std::optional<Level> level)
        : examples_(std::move(examples)), level_(level) {
        std::unordered_set<std::string> seen;
        seen.reserve(examples_.size());
        for (const auto& ex : examples_) {
            if (!seen.insert(ex.id).second) throw Error(ErrorKind::DuplicateId, ex.id);
            if (level_ && !ex.label(*level_))
                throw Error(ErrorKind::InvalidArgument,
                            "example " + ex.id + " has no level " + std::string(to_string(*level_)) + " label");
        }
    }

    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }
    const Example& operator[](std::size_t i) const { return examples_[i]; }
    const std::vector<Example>& examples() const noexcept { return examples_; }
    std::optional<Level> level() const noexcept { return level_; }

    Level require_level() const {
        if (!level_) throw Error(ErrorKind::InvalidArgument, "dataset carries no labels");
        return *level_;
    }

    /// Class index of example i at the dataset's level.
    std::size_t class_of(std::size_t i) const { return class_index(*examples_[i].label(require_level())); }

    std::vector<std::size_t> class_indices() const {
        std::vector<std::size_t> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = class_of(i);
        return out;
    }

    /// Members at the given positions, in the order given.
    Dataset subset(const std::vector<std::size_t>& positions) const {
        std::vector<Example> out;
        out.reserve(positions.size());
        for (auto p : positions) out.push_back(examples_.at(p));
        return Dataset(std::move(out), level_);
    }

private:
    std::vector<Example> examples_;
    std::optional<Level> level_;
};

namespace detail {

inline bool is_absent_label(std::string_view raw) {
    const auto norm = normalize_label(raw);
    return norm.empty() || norm == "none";
}

} // namespace detail

/// Reads a task-format CSV (rewire_id, text, label_sexist, label_category,
/// label_vector). With a level, rows without a label at that level are
/// dropped and the matching label column is required; without a level only
/// rewire_id and text are required and labels are read where present.
inline Dataset read_dataset(std::istream& in, std::optional<Level> level) {
    csv::Reader reader(in);
    auto header_row = reader.next();
    if (!header_row) throw Error(ErrorKind::MalformedRow, "missing header row");
    const csv::Header header(std::move(*header_row));

    const auto id_col = header.require("rewire_id");
    const auto text_col = header.require("text");
    auto a_col = header.find("label_sexist");
    auto b_col = header.find("label_category");
    auto c_col = header.find("label_vector");
    if (level == Level::A && !a_col) header.require("label_sexist");
    if (level == Level::B && !b_col) header.require("label_category");
    if (level == Level::C && !c_col) header.require("label_vector");

    std::vector<Example> examples;
    while (auto row = reader.next()) {
        if (row->size() == 1 && row->front().empty()) continue; // blank line
        if (row->size() != header.size())
            throw Error(ErrorKind::MalformedRow, "line " + std::to_string(reader.line()) + ": expected " +
                                                     std::to_string(header.size()) + " columns, got " +
                                                     std::to_string(row->size()));
        Example ex;
        ex.id = (*row)[id_col];
        ex.text = (*row)[text_col];
        if (ex.id.empty()) throw Error(ErrorKind::MalformedRow, "line " + std::to_string(reader.line()) + ": empty id");
        if (ex.text.empty())
            throw Error(ErrorKind::MalformedRow, "line " + std::to_string(reader.line()) + ": empty text");
        if (a_col && !detail::is_absent_label((*row)[*a_col]))
            ex.label_a = std::get<TaskALabel>(parse_label((*row)[*a_col], Level::A));
        if (b_col && !detail::is_absent_label((*row)[*b_col]))
            ex.label_b = std::get<CategoryLabel>(parse_label((*row)[*b_col], Level::B));
        if (c_col && !detail::is_absent_label((*row)[*c_col]))
            ex.label_c = std::get<VectorLabel>(parse_label((*row)[*c_col], Level::C));

        ConsistencyVerdict verdict;
        if (ex.label_a) {
            verdict = check_consistency(*ex.label_a, ex.label_b, ex.label_c);
        } else if (ex.label_c && (!ex.label_b || parent_of(*ex.label_c) != *ex.label_b)) {
            verdict.violated = ConsistencyRule::parent_mismatch;
        }
        if (!verdict.consistent())
            throw Error(ErrorKind::InconsistentLabels, "example " + ex.id + ": " + std::string(to_string(verdict.violated)));

        if (level && !ex.label(*level)) continue;
        examples.push_back(std::move(ex));
    }
    return Dataset(std::move(examples), level);
}

inline Dataset load_dataset(const std::filesystem::path& path, std::optional<Level> level) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return read_dataset(in, level);
}

struct DatasetStats {
    std::size_t n_samples = 0;
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts; // indexed by class position at the level
};

/// Counts over the level's full class list.
inline DatasetStats compute_stats(const Dataset& ds) {
    const Level level = ds.require_level();
    DatasetStats stats;
    stats.n_samples = ds.size();
    stats.n_classes = class_count(level);
    stats.counts.assign(stats.n_classes, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) ++stats.counts[ds.class_of(i)];
    return stats;
}

/// Balanced weights: n_samples / (n_classes * count[c]).
inline std::vector<double> class_weights(const DatasetStats& stats) {
    std::vector<double> weights(stats.counts.size());
    for (std::size_t c = 0; c < stats.counts.size(); ++c) {
        if (stats.counts[c] == 0) throw Error(ErrorKind::EmptyClass, "class " + std::to_string(c) + " has no examples");
        weights[c] = static_cast<double>(stats.n_samples) /
                     (static_cast<double>(stats.n_classes) * static_cast<double>(stats.counts[c]));
    }
    return weights;
}

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    bool stratify = true;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

namespace detail {

/// Largest-remainder apportionment of round(total_fraction * sum) across
/// groups; remainder ties go to the lower group index.
inline std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, double fraction) {
    const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::size_t> out(sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        const double quota = fraction * static_cast<double>(sizes[g]);
        out[g] = static_cast<std::size_t>(std::floor(quota));
        assigned += out[g];
        remainders.emplace_back(quota - std::floor(quota), g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t r = 0; assigned < target && r < remainders.size(); ++r) {
        const auto g = remainders[r].second;
        if (out[g] < sizes[g]) {
            ++out[g];
            ++assigned;
        }
    }
    return out;
}

} // namespace detail

/// Positions (into ds) of the train and validation members, each sorted
/// ascending. Per-class train counts follow largest-remainder apportionment
/// and every class keeps at least one member on each side.
inline SplitIndices stratified_split_indices(const Dataset& ds, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error(ErrorKind::InvalidArgument, "train_fraction must lie in (0, 1)");
    SplitMix64 rng(derive_seed(spec.seed, "split"));
    SplitIndices out;

    if (!spec.stratify) {
        std::vector<std::size_t> order(ds.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(std::span(order), rng);
        const auto n_train = detail::apportion({ds.size()}, spec.train_fraction)[0];
        out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    } else {
        const Level level = ds.require_level();
        std::vector<std::vector<std::size_t>> members(class_count(level));
        for (std::size_t i = 0; i < ds.size(); ++i) members[ds.class_of(i)].push_back(i);

        std::vector<std::size_t> sizes;
        std::vector<std::size_t> present;
        for (std::size_t c = 0; c < members.size(); ++c) {
            if (members[c].empty()) continue;
            if (members[c].size() < 2)
                throw Error(ErrorKind::TooFewExamples,
                            "class " + label_key(label_at(level, c)) + " has fewer than 2 examples");
            sizes.push_back(members[c].size());
            present.push_back(c);
        }
        auto quotas = detail::apportion(sizes, spec.train_fraction);
        for (std::size_t g = 0; g < present.size(); ++g) {
            auto& group = members[present[g]];
            const auto n_train = std::clamp<std::size_t>(quotas[g], 1, group.size() - 1);
            shuffle(std::span(group), rng);
            out.train.insert(out.train.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
            out.validation.insert(out.validation.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train),
                                  group.end());
        }
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& ds, const SplitSpec& spec) {
    const auto idx = stratified_split_indices(ds, spec);
    return {ds.subset(idx.train), ds.subset(idx.validation)};
}

struct FoldAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> fold_of; // per example, in dataset order

    /// Positions in fold f (held-out) or outside it (training complement).
    std::vector<std::size_t> members(std::size_t fold, bool held_out = true) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if ((fold_of[i] == fold) == held_out) out.push_back(i);
        return out;
    }
};

/// Each class is shuffled and dealt round-robin into folds, continuing from
/// where the previous class stopped. Per-class fold counts then differ by at
/// most one, and so do fold sizes.
inline FoldAssignment stratified_kfold(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > ds.size())
        throw Error(ErrorKind::InvalidK, "k=" + std::to_string(k) + " for " + std::to_string(ds.size()) + " examples");
    const Level level = ds.require_level();
    std::vector<std::vector<std::size_t>> members(class_count(level));
    for (std::size_t i = 0; i < ds.size(); ++i) members[ds.class_of(i)].push_back(i);

    SplitMix64 rng(derive_seed(seed, "kfold"));
    FoldAssignment out{k, std::vector<std::size_t>(ds.size())};
    std::size_t next = 0;
    for (auto& group : members) {
        shuffle(std::span(group), rng);
        for (auto i : group) {
            out.fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    return out;
}

inline void write_id_list(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& ex : ds.examples()) out << ex.id << '\n';
}

} // namespace hiertext
