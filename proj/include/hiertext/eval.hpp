#pragma once

#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertext/data.hpp"
#include "hiertext/error.hpp"
#include "hiertext/predictions.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext {

/// Rows are truth, columns are predictions.
struct ConfusionMatrix {
    std::vector<std::string> class_list;
    std::vector<std::size_t> counts; // row-major n x n

    std::size_t n_classes() const noexcept { return class_list.size(); }
    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * n_classes() + predicted]; }

    std::size_t total() const {
        std::size_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                                        std::vector<std::string> class_list) {
    if (truth.size() != predicted.size())
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(truth.size()) + " truth labels vs " + std::to_string(predicted.size()) + " predictions");
    ConfusionMatrix cm{std::move(class_list), {}};
    const auto k = cm.n_classes();
    cm.counts.assign(k * k, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= k || predicted[i] >= k)
            throw Error(ErrorKind::UnknownLabel, "label index outside class list at position " + std::to_string(i));
        ++cm.counts[truth[i] * k + predicted[i]];
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::optional<Level> level;
    ConfusionMatrix confusion;
    std::vector<ClassMetrics> per_class;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::size_t total = 0;
    std::optional<std::size_t> hierarchy_violations;
};

namespace detail {
inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }
} // namespace detail

/// 0/0 is taken as 0 everywhere; macro F1 averages over the whole class list,
/// zero-support classes included.
inline MetricsReport metrics(const ConfusionMatrix& cm) {
    MetricsReport r;
    r.confusion = cm;
    const auto k = cm.n_classes();
    r.total = cm.total();
    std::size_t trace = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = cm.at(c, c), row = 0, col = 0;
        for (std::size_t j = 0; j < k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        ClassMetrics m;
        m.support = row;
        m.precision = detail::safe_ratio(static_cast<double>(tp), static_cast<double>(col));
        m.recall = detail::safe_ratio(static_cast<double>(tp), static_cast<double>(row));
        // 2TP / (2TP + FP + FN): equal to the harmonic mean, without its rounding.
        m.f1 = detail::safe_ratio(2.0 * static_cast<double>(tp), static_cast<double>(row + col));
        r.per_class.push_back(m);
        r.macro_f1 += m.f1;
        trace += tp;
    }
    if (k) r.macro_f1 /= static_cast<double>(k);
    r.accuracy = detail::safe_ratio(static_cast<double>(trace), static_cast<double>(r.total));
    return r;
}

inline double macro_f1(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                       const std::vector<std::string>& class_list) {
    return metrics(confusion_matrix(truth, predicted, class_list)).macro_f1;
}

/// Truth labels of `truth` reordered to match pred.example_ids. The id sets
/// must coincide exactly.
inline std::vector<std::size_t> aligned_truth(const PredictionSet& pred, const Dataset& truth) {
    const Level level = truth.require_level();
    if (level != pred.level)
        throw Error(ErrorKind::Misaligned, "prediction level " + std::string(to_string(pred.level)) + " vs truth level " +
                                               std::string(to_string(level)));
    if (pred.size() != truth.size())
        throw Error(ErrorKind::Misaligned,
                    std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " gold examples");
    std::unordered_map<std::string, std::size_t> gold;
    for (std::size_t i = 0; i < truth.size(); ++i) gold.emplace(truth[i].id, truth.class_of(i));
    std::vector<std::size_t> out;
    out.reserve(pred.size());
    for (const auto& id : pred.example_ids) {
        auto it = gold.find(id);
        if (it == gold.end()) throw Error(ErrorKind::Misaligned, "prediction id " + id + " not in gold set");
        out.push_back(it->second);
    }
    return out;
}

inline MetricsReport evaluate_run(const PredictionSet& pred, const Dataset& truth) {
    const auto gold = aligned_truth(pred, truth);
    auto report = metrics(confusion_matrix(gold, pred.labels, pred.class_list));
    report.level = pred.level;
    return report;
}

/// Number of examples whose predictions across levels break the taxonomy.
/// With a Task A set, ids appearing only in B/C count as violations; ids
/// predicted sexist with no B/C prediction are not (gating may stop there).
inline std::size_t hierarchy_violations(const PredictionSet* a, const PredictionSet* b, const PredictionSet* c) {
    for (const auto* p : {a, b, c})
        if (p && p->level != (p == a ? Level::A : p == b ? Level::B : Level::C))
            throw Error(ErrorKind::Misaligned, "prediction set supplied at the wrong level");

    std::unordered_map<std::string, std::size_t> a_idx, b_idx, c_idx;
    if (a) a_idx = a->id_index();
    if (b) b_idx = b->id_index();
    if (c) c_idx = c->id_index();

    std::vector<std::string> ids;
    for (const auto* p : {a, b, c})
        if (p) ids.insert(ids.end(), p->example_ids.begin(), p->example_ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::size_t violations = 0;
    for (const auto& id : ids) {
        std::optional<CategoryLabel> cat;
        std::optional<VectorLabel> vec;
        if (auto it = b_idx.find(id); it != b_idx.end()) cat = std::get<CategoryLabel>(b->label(it->second));
        if (auto it = c_idx.find(id); it != c_idx.end()) vec = std::get<VectorLabel>(c->label(it->second));

        bool ok = true;
        if (a) {
            auto it = a_idx.find(id);
            if (it == a_idx.end()) {
                ok = false;
            } else {
                const auto task_a = std::get<TaskALabel>(a->label(it->second));
                // Without a B prediction, a C prediction is checked against A only.
                const auto effective_cat = b ? cat : (vec ? std::optional(parent_of(*vec)) : std::nullopt);
                ok = check_consistency(task_a, effective_cat, vec).consistent();
            }
        } else if (b && vec) {
            ok = cat && parent_of(*vec) == *cat;
        }
        if (!ok) ++violations;
    }
    return violations;
}

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        per_class[r.confusion.class_list[c]] = {
            {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
    }
    nlohmann::json matrix = nlohmann::json::array();
    const auto k = r.confusion.n_classes();
    for (std::size_t i = 0; i < k; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < k; ++j) row.push_back(r.confusion.at(i, j));
        matrix.push_back(row);
    }
    nlohmann::json out{
        {"class_list", r.confusion.class_list},
        {"per_class", per_class},
        {"macro_f1", r.macro_f1},
        {"accuracy", r.accuracy},
        {"total", r.total},
        {"confusion_matrix", matrix},
    };
    if (r.level) out["level"] = std::string(to_string(*r.level));
    if (r.hierarchy_violations) out["hierarchy_violations"] = *r.hierarchy_violations;
    return out;
}

/// Fixed-width table: one row per class, then macro F1 and accuracy.
inline std::string render_table(const MetricsReport& r) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s\n", "class", "precision", "recall", "f1", "support");
    out << line;
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        std::snprintf(line, sizeof line, "%-12s %9.4f %9.4f %9.4f %9zu\n", r.confusion.class_list[c].c_str(),
                      m.precision, m.recall, m.f1, m.support);
        out << line;
    }
    std::snprintf(line, sizeof line, "%-12s %29.4f %9zu\n", "macro_f1", r.macro_f1, r.total);
    out << line;
    std::snprintf(line, sizeof line, "%-12s %29.4f\n", "accuracy", r.accuracy);
    out << line;
    if (r.hierarchy_violations) out << "hierarchy violations: " << *r.hierarchy_violations << '\n';
    return out.str();
}

} // namespace hiertext
