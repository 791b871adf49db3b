#pragma once

// Multinomial softmax classifier over hashed feature vectors, trained with
// mini-batch Adam on cross-entropy or focal loss with optional class weights.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hiertext/data.hpp"
#include "hiertext/error.hpp"
#include "hiertext/features.hpp"
#include "hiertext/rng.hpp"

namespace hiertext {

inline constexpr double probability_clamp = 1e-12;

/// Focal loss -alpha_t * (1 - p_t)^gamma * ln(p_t). `alpha` holds either one
/// scalar or one entry per class.
struct FocalLossConfig {
    std::vector<double> alpha{1.0};
    double gamma = 2.0;

    double alpha_for(std::size_t true_class) const {
        if (alpha.size() == 1) return alpha[0];
        if (true_class >= alpha.size()) throw Error(ErrorKind::DimensionMismatch, "alpha vector shorter than class count");
        return alpha[true_class];
    }

    void validate() const {
        if (!(gamma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be >= 0");
        if (alpha.empty()) throw Error(ErrorKind::InvalidArgument, "alpha must not be empty");
        for (double a : alpha)
            if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha entries must be > 0");
    }
};

enum class LossKind { cross_entropy, focal };

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    double learning_rate = 2e-5;
    std::size_t epochs = 6;
    std::size_t batch_size = 6;
    LossKind loss = LossKind::cross_entropy;
    FocalLossConfig focal;
    std::optional<std::vector<double>> class_weights;
    AdamConfig adam;
    std::uint64_t seed = 42;

    void validate() const {
        if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
        if (batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
        if (loss == LossKind::focal) focal.validate();
        if (class_weights)
            for (double w : *class_weights)
                if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "class weights must be finite and > 0");
    }
};

/// Transformer fine-tuning hyperparameters kept verbatim: lr 2e-5, 6 epochs, batch 6.
inline TrainConfig paper_profile() {
    TrainConfig cfg;
    cfg.learning_rate = 2e-5;
    cfg.epochs = 6;
    cfg.batch_size = 6;
    return cfg;
}

/// Same schedule with a step size a freshly initialised linear model can use.
inline TrainConfig desk_profile() {
    TrainConfig cfg = paper_profile();
    cfg.learning_rate = 0.05;
    return cfg;
}

/// Weights are stored feature-major: weights[d * n_classes + k] is the
/// weight of feature d for class k, so a sparse input touches contiguous rows.
struct ModelParams {
    std::vector<std::string> class_list;
    std::size_t dimension = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    ModelParams() = default;
    ModelParams(std::vector<std::string> classes, std::size_t dim)
        : class_list(std::move(classes)), dimension(dim), weights(class_list.size() * dim, 0.0),
          bias(class_list.size(), 0.0) {}

    std::size_t n_classes() const noexcept { return class_list.size(); }
    double& weight(std::size_t k, std::size_t d) { return weights[d * n_classes() + k]; }
    double weight(std::size_t k, std::size_t d) const { return weights[d * n_classes() + k]; }
};

/// Index of the first maximum, so ties go to the earlier class.
inline std::size_t argmax(std::span<const double> values) {
    return static_cast<std::size_t>(std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

inline std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.begin(), logits.end());
    if (out.empty()) return out;
    const double top = *std::max_element(out.begin(), out.end());
    double sum = 0.0;
    for (double& v : out) {
        v = std::exp(v - top);
        sum += v;
    }
    for (double& v : out) v /= sum;
    return out;
}

inline std::vector<double> forward_logits(const ModelParams& params, const FeatureVector& x) {
    if (x.dimension != params.dimension)
        throw Error(ErrorKind::DimensionMismatch, "feature dimension " + std::to_string(x.dimension) + " vs model " +
                                                      std::to_string(params.dimension));
    const std::size_t k = params.n_classes();
    std::vector<double> logits(params.bias);
    for (std::size_t i = 0; i < x.nnz(); ++i) {
        const double* row = params.weights.data() + static_cast<std::size_t>(x.indices[i]) * k;
        for (std::size_t c = 0; c < k; ++c) logits[c] += row[c] * x.values[i];
    }
    return logits;
}

inline std::vector<double> forward_probs(const ModelParams& params, const FeatureVector& x) {
    return softmax(forward_logits(params, x));
}

inline double clamp_probability(double p) { return std::clamp(p, probability_clamp, 1.0 - probability_clamp); }

/// -alpha_t * w_t * (1 - p_t)^gamma * ln(p_t), with p_t clamped away from 0 and 1.
inline double focal_loss(std::span<const double> probs, std::size_t true_class, const FocalLossConfig& cfg,
                         std::optional<double> class_weight = std::nullopt) {
    if (true_class >= probs.size()) throw Error(ErrorKind::InvalidArgument, "true class out of range");
    const double pt = clamp_probability(probs[true_class]);
    const double scale = cfg.alpha_for(true_class) * class_weight.value_or(1.0);
    return -scale * std::pow(1.0 - pt, cfg.gamma) * std::log(pt);
}

struct LabeledFeature {
    FeatureVector x;
    std::size_t label = 0;
};

/// Sparse gradient: only columns present in the batch carry weight entries.
struct Gradient {
    std::vector<std::uint32_t> columns;   // sorted
    std::vector<double> weight_values;    // columns.size() * n_classes, feature-major like ModelParams
    std::vector<double> bias;

    double weight(std::size_t k, std::size_t d) const {
        const auto it = std::lower_bound(columns.begin(), columns.end(), static_cast<std::uint32_t>(d));
        if (it == columns.end() || *it != d) return 0.0;
        return weight_values[static_cast<std::size_t>(it - columns.begin()) * bias.size() + k];
    }
};

struct LossAndGradient {
    double loss = 0.0;
    Gradient gradient;
};

namespace detail {

// Loss, and d(loss)/d(logit_t) factor for one example. For focal loss with
// p = p_t: dL/dz_j = -scale * g(p) * (delta_tj - p_j),
// g(p) = (1-p)^gamma - gamma * p * (1-p)^(gamma-1) * ln p.
struct ExampleTerms {
    double loss;
    double factor; // -scale * g(p)
};

inline ExampleTerms example_terms(std::span<const double> probs, std::size_t label, const TrainConfig& cfg) {
    const double w = cfg.class_weights ? cfg.class_weights->at(label) : 1.0;
    const double pt = clamp_probability(probs[label]);
    const double log_pt = std::log(pt);
    if (cfg.loss == LossKind::cross_entropy) return {-w * log_pt, -w};

    const double gamma = cfg.focal.gamma;
    const double scale = cfg.focal.alpha_for(label) * w;
    const double q = 1.0 - pt;
    const double modulating = std::pow(q, gamma);
    const double g = gamma == 0.0 ? 1.0 : modulating - gamma * pt * std::pow(q, gamma - 1.0) * log_pt;
    return {-scale * modulating * log_pt, -scale * g};
}

// Shared core for the public loss_and_gradient and the training loop:
// `fetch(i)` returns the i-th LabeledFeature of a batch of size n.
template <typename Fetch>
LossAndGradient batch_loss_and_gradient(const ModelParams& params, std::size_t n, Fetch&& fetch,
                                        const TrainConfig& cfg) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty batch");
    const std::size_t k = params.n_classes();
    if (cfg.class_weights && cfg.class_weights->size() != k)
        throw Error(ErrorKind::DimensionMismatch, "class weight vector length differs from class count");

    LossAndGradient out;
    Gradient& grad = out.gradient;
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector& x = fetch(i).x;
        grad.columns.insert(grad.columns.end(), x.indices.begin(), x.indices.end());
    }
    std::sort(grad.columns.begin(), grad.columns.end());
    grad.columns.erase(std::unique(grad.columns.begin(), grad.columns.end()), grad.columns.end());
    grad.weight_values.assign(grad.columns.size() * k, 0.0);
    grad.bias.assign(k, 0.0);

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> dz(k);
    for (std::size_t i = 0; i < n; ++i) {
        const LabeledFeature& item = fetch(i);
        if (item.label >= k) throw Error(ErrorKind::InvalidArgument, "label out of range");
        const auto probs = forward_probs(params, item.x);
        const auto terms = example_terms(probs, item.label, cfg);
        out.loss += terms.loss * inv_n;
        for (std::size_t c = 0; c < k; ++c) {
            const double delta = c == item.label ? 1.0 : 0.0;
            dz[c] = terms.factor * (delta - probs[c]) * inv_n;
            grad.bias[c] += dz[c];
        }
        for (std::size_t j = 0; j < item.x.nnz(); ++j) {
            const auto slot = static_cast<std::size_t>(
                std::lower_bound(grad.columns.begin(), grad.columns.end(), item.x.indices[j]) - grad.columns.begin());
            double* row = grad.weight_values.data() + slot * k;
            for (std::size_t c = 0; c < k; ++c) row[c] += dz[c] * item.x.values[j];
        }
    }
    return out;
}

} // namespace detail

/// Mean (weighted) loss over the batch and its exact gradient.
inline LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const LabeledFeature> batch,
                                         const TrainConfig& cfg) {
    return detail::batch_loss_and_gradient(
        params, batch.size(), [&](std::size_t i) -> const LabeledFeature& { return batch[i]; }, cfg);
}

/// Moment estimates for every parameter. Columns that have never received a
/// gradient have zero moments and are skipped; their Adam update is exactly 0.
struct AdamState {
    std::vector<double> m_weights, v_weights, m_bias, v_bias;
    std::vector<std::uint8_t> active;
    std::vector<std::uint32_t> active_columns; // sorted
    std::uint64_t step = 0;

    explicit AdamState(const ModelParams& params)
        : m_weights(params.weights.size(), 0.0), v_weights(params.weights.size(), 0.0),
          m_bias(params.bias.size(), 0.0), v_bias(params.bias.size(), 0.0), active(params.dimension, 0) {}
};

inline void adam_step(AdamState& state, ModelParams& params, const Gradient& grad, double lr,
                      const AdamConfig& adam = {}) {
    const std::size_t k = params.n_classes();
    if (state.m_weights.size() != params.weights.size() || grad.bias.size() != k)
        throw Error(ErrorKind::DimensionMismatch, "optimizer state does not match parameters");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(adam.beta1, t);
    const double correction2 = 1.0 - std::pow(adam.beta2, t);

    auto update = [&](double& param, double& m, double& v, double g) {
        m = adam.beta1 * m + (1.0 - adam.beta1) * g;
        v = adam.beta2 * v + (1.0 - adam.beta2) * g * g;
        param -= lr * (m / correction1) / (std::sqrt(v / correction2) + adam.epsilon);
    };

    const auto old_size = state.active_columns.size();
    for (std::size_t j = 0; j < grad.columns.size(); ++j) {
        const auto d = grad.columns[j];
        if (d >= params.dimension) throw Error(ErrorKind::DimensionMismatch, "gradient column out of range");
        if (state.active[d]) continue;
        bool nonzero = false;
        for (std::size_t c = 0; c < k; ++c) nonzero |= grad.weight_values[j * k + c] != 0.0;
        if (nonzero) {
            state.active[d] = 1;
            state.active_columns.push_back(d);
        }
    }
    std::inplace_merge(state.active_columns.begin(),
                       state.active_columns.begin() + static_cast<std::ptrdiff_t>(old_size),
                       state.active_columns.end());

    // active_columns is sorted; walk it alongside the sorted gradient columns.
    std::size_t g = 0;
    for (auto d : state.active_columns) {
        while (g < grad.columns.size() && grad.columns[g] < d) ++g;
        const bool has = g < grad.columns.size() && grad.columns[g] == d;
        for (std::size_t c = 0; c < k; ++c) {
            const std::size_t at = static_cast<std::size_t>(d) * k + c;
            update(params.weights[at], state.m_weights[at], state.v_weights[at],
                   has ? grad.weight_values[g * k + c] : 0.0);
        }
    }
    for (std::size_t c = 0; c < k; ++c) update(params.bias[c], state.m_bias[c], state.v_bias[c], grad.bias[c]);
}

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_trace; // mean training loss per epoch
};

inline std::vector<LabeledFeature> featurize(const Dataset& ds, const Featurizer& featurizer) {
    std::vector<LabeledFeature> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back({featurizer.transform(ds[i].text), ds.class_of(i)});
    return out;
}

/// Zero-initialised parameters; each epoch shuffles the examples with a
/// generator seeded from cfg.seed and takes consecutive mini-batches.
inline TrainResult train(const Dataset& ds, const Featurizer& featurizer, const TrainConfig& cfg) {
    cfg.validate();
    const Level level = ds.require_level();
    TrainResult result{ModelParams(class_keys(level), featurizer.dimension()), {}};
    if (cfg.epochs == 0) return result;
    if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "no training examples");

    const auto examples = featurize(ds, featurizer);
    AdamState state(result.params);
    SplitMix64 rng(derive_seed(cfg.seed, "train-shuffle"));
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(std::span(order), rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t n = std::min(cfg.batch_size, order.size() - start);
            auto step = detail::batch_loss_and_gradient(
                result.params, n, [&](std::size_t i) -> const LabeledFeature& { return examples[order[start + i]]; },
                cfg);
            epoch_loss += step.loss * static_cast<double>(n);
            adam_step(state, result.params, step.gradient, cfg.learning_rate, cfg.adam);
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(examples.size()));
    }
    return result;
}

struct Prediction {
    std::vector<double> probs;
    std::size_t label = 0;
};

inline Prediction predict_one(const ModelParams& params, const Featurizer& featurizer, std::string_view text) {
    if (featurizer.dimension() != params.dimension)
        throw Error(ErrorKind::DimensionMismatch, "featurizer and model dimensions differ");
    Prediction p{forward_probs(params, featurizer.transform(text)), 0};
    p.label = argmax(p.probs);
    return p;
}

inline std::vector<Prediction> predict(const ModelParams& params, const Featurizer& featurizer,
                                       std::span<const std::string> texts) {
    std::vector<Prediction> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(predict_one(params, featurizer, t));
    return out;
}

} // namespace hiertext
