#pragma once

// Fusion of aligned prediction sets: hard majority voting and weighted
// probability averaging with weights grid-searched on a validation set.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiertext/data.hpp"
#include "hiertext/error.hpp"
#include "hiertext/eval.hpp"
#include "hiertext/model.hpp"
#include "hiertext/predictions.hpp"

namespace hiertext {

/// Throws Misaligned unless all members share level, class list and the
/// exact example-id sequence.
inline void check_aligned(std::span<const PredictionSet> preds) {
    if (preds.empty()) throw Error(ErrorKind::Misaligned, "no prediction sets");
    const auto& first = preds.front();
    for (const auto& p : preds.subspan(1)) {
        if (p.level != first.level || p.class_list != first.class_list)
            throw Error(ErrorKind::Misaligned, p.model_id + " has a different class list than " + first.model_id);
        if (p.example_ids != first.example_ids)
            throw Error(ErrorKind::Misaligned, p.model_id + " covers different example ids than " + first.model_id);
    }
    for (const auto& p : preds)
        for (const auto& row : p.probs)
            if (row.size() != p.class_list.size())
                throw Error(ErrorKind::Misaligned, p.model_id + " has a probability row of the wrong width");
}

/// Per example, the label most members predict. Ties among the top-voted
/// labels go to the one with the larger summed probability, then to the
/// earlier class. The output probabilities are the unweighted member mean.
inline PredictionSet majority_vote(std::span<const PredictionSet> preds, std::string model_id = "majority_vote") {
    if (preds.size() < 2) throw Error(ErrorKind::InvalidArgument, "majority vote needs at least two members");
    check_aligned(preds);
    const auto& first = preds.front();
    const std::size_t k = first.class_list.size();
    const double inv_m = 1.0 / static_cast<double>(preds.size());

    PredictionSet out(std::move(model_id), first.level);
    std::vector<std::size_t> votes(k);
    std::vector<double> summed(k);
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        std::fill(summed.begin(), summed.end(), 0.0);
        for (const auto& p : preds) {
            ++votes.at(p.labels[i]);
            for (std::size_t c = 0; c < k; ++c) summed[c] += p.probs[i][c];
        }
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c)
            if (votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] > summed[best])) best = c;

        std::vector<double> mean(summed);
        for (double& v : mean) v *= inv_m;
        out.push_back(first.example_ids[i], std::move(mean), best);
    }
    return out;
}

inline PredictionSet weighted_average(std::span<const PredictionSet> preds, std::span<const double> weights,
                                      std::string model_id = "weighted_average") {
    check_aligned(preds);
    if (weights.size() != preds.size())
        throw Error(ErrorKind::WeightLengthMismatch,
                    std::to_string(weights.size()) + " weights for " + std::to_string(preds.size()) + " members");
    const auto& first = preds.front();
    const std::size_t k = first.class_list.size();

    PredictionSet out(std::move(model_id), first.level);
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> probs(k, 0.0);
        for (std::size_t m = 0; m < preds.size(); ++m)
            for (std::size_t c = 0; c < k; ++c) probs[c] += weights[m] * preds[m].probs[i][c];
        const auto label = argmax(probs);
        out.push_back(first.example_ids[i], std::move(probs), label);
    }
    return out;
}

/// All vectors of `members` non-negative integers summing to `total`, in
/// lexicographic order.
inline std::vector<std::vector<std::size_t>> simplex_lattice(std::size_t members, std::size_t total) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current(members, 0);
    auto recurse = [&](auto& self, std::size_t pos, std::size_t remaining) -> void {
        if (pos + 1 == members) {
            current[pos] = remaining;
            out.push_back(current);
            return;
        }
        for (std::size_t v = 0; v <= remaining; ++v) {
            current[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    if (members > 0) recurse(recurse, 0, total);
    return out;
}

struct GridSearchResult {
    std::vector<double> weights;
    double macro_f1 = 0.0;
    std::size_t candidates = 0;
};

/// Exhaustive search over simplex weights in multiples of `step`, scored by
/// macro F1 of the weighted average against `truth`. The first best vector in
/// lexicographic order wins.
inline GridSearchResult grid_search_weights(std::span<const PredictionSet> preds, const Dataset& truth,
                                            double step = 0.1) {
    check_aligned(preds);
    if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorKind::InvalidStep, "step must lie in (0, 1]");
    const double divisions = 1.0 / step;
    const auto total = static_cast<std::size_t>(std::llround(divisions));
    if (std::abs(divisions - static_cast<double>(total)) > 1e-9 * divisions)
        throw Error(ErrorKind::InvalidStep, "step must divide 1 evenly");
    if (preds.size() > 8) throw Error(ErrorKind::InvalidArgument, "too many members for an exhaustive grid");

    const auto gold = aligned_truth(preds.front(), truth);
    GridSearchResult best;
    best.macro_f1 = -1.0;
    const auto lattice = simplex_lattice(preds.size(), total);
    best.candidates = lattice.size();
    std::vector<double> w(preds.size());
    for (const auto& point : lattice) {
        for (std::size_t m = 0; m < point.size(); ++m) w[m] = static_cast<double>(point[m]) / static_cast<double>(total);
        const auto fused = weighted_average(preds, w);
        const double f1 = macro_f1(gold, fused.labels, fused.class_list);
        if (f1 > best.macro_f1) {
            best.macro_f1 = f1;
            best.weights = w;
        }
    }
    return best;
}

} // namespace hiertext
