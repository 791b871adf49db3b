#pragma once

// Pipeline commands behind the `hiertext` executable. Each is a pure function
// of its input files, configuration and seed: repeated runs write
// byte-identical outputs.

#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hiertext/config.hpp"
#include "hiertext/data.hpp"
#include "hiertext/ensemble.hpp"
#include "hiertext/eval.hpp"
#include "hiertext/features.hpp"
#include "hiertext/model.hpp"
#include "hiertext/model_io.hpp"
#include "hiertext/predictions.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext::cli {

namespace fs = std::filesystem;

inline void write_json(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

inline nlohmann::json training_metadata(const RunConfig& cfg, const TrainConfig& train,
                                        const std::vector<double>& loss_trace) {
    nlohmann::json meta{
        {"model_id", cfg.model_id},
        {"profile", cfg.profile},
        {"learning_rate", train.learning_rate},
        {"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"loss", std::string(to_string(train.loss))},
        {"seed", train.seed},
        {"loss_trace", loss_trace},
    };
    if (train.loss == LossKind::focal) {
        meta["alpha"] = train.focal.alpha;
        meta["gamma"] = train.focal.gamma;
    }
    meta["class_weights"] = train.class_weights ? nlohmann::json(*train.class_weights) : nlohmann::json(nullptr);
    return meta;
}

/// Fits the featurizer on `train_set`, trains, and bundles the result.
inline Model fit_model(const RunConfig& cfg, const Dataset& train_set, std::uint64_t seed) {
    TrainConfig train = cfg.train;
    train.seed = seed;
    if (cfg.use_class_weights) train.class_weights = class_weights(compute_stats(train_set));

    Model model;
    model.level = cfg.level;
    model.featurizer = fit_featurizer(cfg.featurizer, train_set);
    auto result = hiertext::train(train_set, model.featurizer, train);
    model.params = std::move(result.params);
    model.metadata = training_metadata(cfg, train, result.loss_trace);
    return model;
}

inline PredictionSet predict_dataset(const Model& model, const Dataset& ds, std::string model_id) {
    PredictionSet out(std::move(model_id), model.level);
    for (const auto& ex : ds.examples()) {
        auto p = model.predict(ex.text);
        out.push_back(ex.id, std::move(p.probs), p.label);
    }
    return out;
}

inline Dataset load_training_data(const RunConfig& cfg) {
    if (cfg.data.empty()) throw Error(ErrorKind::Config, "no data path configured");
    auto ds = load_dataset(cfg.data, cfg.level);
    if (ds.empty())
        throw Error(ErrorKind::EmptyDataset,
                    cfg.data.string() + " has no examples labelled at level " + std::string(to_string(cfg.level)));
    return ds;
}

struct TrainOutcome {
    MetricsReport holdout;
    fs::path model_path;
    fs::path predictions_path;
    fs::path report_path;
};

/// Stratified holdout split, training on the train part, evaluation on the rest.
inline TrainOutcome cmd_train(const RunConfig& cfg) {
    const auto ds = load_training_data(cfg);
    auto [train_set, validation] = stratified_split(ds, cfg.split);
    spdlog::info("train: {} examples at level {} ({} train / {} validation)", ds.size(), to_string(cfg.level),
                 train_set.size(), validation.size());

    const auto model = fit_model(cfg, train_set, derive_seed(cfg.seed, "train"));
    const auto preds = predict_dataset(model, validation, cfg.model_id);
    auto report = evaluate_run(preds, validation);

    fs::create_directories(cfg.output_dir);
    TrainOutcome out{report, cfg.output_dir / (cfg.model_id + ".htxm"),
                     cfg.output_dir / (cfg.model_id + ".predictions.csv"),
                     cfg.output_dir / (cfg.model_id + ".metrics.json")};
    save_model(out.model_path, model);
    save_predictions(out.predictions_path, preds);
    write_id_list(cfg.output_dir / (cfg.model_id + ".train_ids.txt"), train_set);
    write_id_list(cfg.output_dir / (cfg.model_id + ".validation_ids.txt"), validation);
    write_json(out.report_path, to_json(report));
    spdlog::info("holdout macro F1 {:.4f}", report.macro_f1);
    return out;
}

struct CvOutcome {
    MetricsReport pooled;
    std::vector<double> fold_macro_f1;
    fs::path oof_path;
    fs::path manifest_path;
    std::vector<fs::path> model_paths;
};

/// One model per fold trained on the complement; out-of-fold predictions
/// cover every example exactly once, in dataset order. With cfg.jobs > 1
/// folds train concurrently; results are merged by fold index.
inline CvOutcome cmd_cv(const RunConfig& cfg) {
    const auto ds = load_training_data(cfg);
    const auto folds = stratified_kfold(ds, cfg.k, cfg.seed);
    fs::create_directories(cfg.output_dir);

    struct FoldResult {
        PredictionSet preds;
        fs::path model_path;
    };
    auto run_fold = [&](std::size_t f) {
        const auto train_set = ds.subset(folds.members(f, false));
        const auto held_out = ds.subset(folds.members(f, true));
        spdlog::info("cv fold {}/{}: {} train / {} held out", f + 1, cfg.k, train_set.size(), held_out.size());
        const auto model = fit_model(cfg, train_set, derive_seed(cfg.seed, "fold-" + std::to_string(f)));
        FoldResult r{predict_dataset(model, held_out, cfg.model_id),
                     cfg.output_dir / (cfg.model_id + ".fold" + std::to_string(f) + ".htxm")};
        save_model(r.model_path, model);
        return r;
    };

    std::vector<FoldResult> results(cfg.k);
    if (cfg.jobs <= 1) {
        for (std::size_t f = 0; f < cfg.k; ++f) results[f] = run_fold(f);
    } else {
        for (std::size_t start = 0; start < cfg.k; start += cfg.jobs) {
            std::vector<std::future<FoldResult>> pending;
            for (std::size_t f = start; f < std::min(cfg.k, start + cfg.jobs); ++f)
                pending.push_back(std::async(std::launch::async, run_fold, f));
            for (std::size_t j = 0; j < pending.size(); ++j) results[start + j] = pending[j].get();
        }
    }

    CvOutcome out;
    std::unordered_map<std::string, std::pair<std::vector<double>, std::size_t>> by_id;
    nlohmann::json manifest{{"k", cfg.k}, {"seed", cfg.seed}, {"class_list", class_keys(cfg.level)}};
    nlohmann::json fold_docs = nlohmann::json::array();
    for (std::size_t f = 0; f < cfg.k; ++f) {
        const auto held_out = ds.subset(folds.members(f, true));
        const auto report = evaluate_run(results[f].preds, held_out);
        out.fold_macro_f1.push_back(report.macro_f1);
        out.model_paths.push_back(results[f].model_path);

        std::vector<std::size_t> class_counts(class_count(cfg.level), 0);
        for (std::size_t i = 0; i < held_out.size(); ++i) ++class_counts[held_out.class_of(i)];
        std::vector<std::string> ids;
        for (const auto& ex : held_out.examples()) ids.push_back(ex.id);
        fold_docs.push_back({{"fold", f},
                             {"size", held_out.size()},
                             {"class_counts", class_counts},
                             {"macro_f1", report.macro_f1},
                             {"ids", ids}});

        const auto& p = results[f].preds;
        for (std::size_t i = 0; i < p.size(); ++i) by_id.emplace(p.example_ids[i], std::pair{p.probs[i], p.labels[i]});
    }
    manifest["folds"] = fold_docs;

    PredictionSet oof(cfg.model_id, cfg.level);
    for (const auto& ex : ds.examples()) {
        auto& [probs, label] = by_id.at(ex.id);
        oof.push_back(ex.id, probs, label);
    }
    out.pooled = evaluate_run(oof, ds);

    out.oof_path = cfg.output_dir / (cfg.model_id + ".oof.csv");
    out.manifest_path = cfg.output_dir / (cfg.model_id + ".folds.json");
    save_predictions(out.oof_path, oof);
    write_json(out.manifest_path, manifest);
    auto report = to_json(out.pooled);
    report["fold_macro_f1"] = out.fold_macro_f1;
    write_json(cfg.output_dir / (cfg.model_id + ".cv_metrics.json"), report);
    spdlog::info("cv pooled macro F1 {:.4f}", out.pooled.macro_f1);
    return out;
}

/// A gate restricts which rows a B/C model predicts on, or which labels it
/// may choose. "gold" keeps rows whose gold label_sexist is sexist; a Task A
/// prediction file keeps rows predicted sexist; a Task B prediction file
/// (for a Task C model) keeps rows it covers and confines each row to the
/// vectors under its predicted category.
struct Gate {
    std::optional<std::unordered_set<std::string>> allowed_ids;
    std::unordered_map<std::string, CategoryLabel> category_of;
    bool has_category_gate = false;
};

inline Gate build_gate(const std::vector<std::string>& sources, const Dataset& input, Level model_level) {
    Gate gate;
    auto restrict = [&](std::unordered_set<std::string> ids) {
        if (!gate.allowed_ids) {
            gate.allowed_ids = std::move(ids);
            return;
        }
        std::erase_if(*gate.allowed_ids, [&](const std::string& id) { return !ids.contains(id); });
    };
    for (const auto& source : sources) {
        if (model_level == Level::A) throw Error(ErrorKind::InvalidArgument, "Task A predictions cannot be gated");
        if (source == "gold") {
            std::unordered_set<std::string> ids;
            for (const auto& ex : input.examples()) {
                if (!ex.label_a) throw Error(ErrorKind::MissingColumn, "gold gating needs label_sexist on every row");
                if (*ex.label_a == TaskALabel::sexist) ids.insert(ex.id);
            }
            restrict(std::move(ids));
            continue;
        }
        const auto gate_preds = load_predictions(source);
        std::unordered_set<std::string> ids;
        if (gate_preds.level == Level::A) {
            for (std::size_t i = 0; i < gate_preds.size(); ++i)
                if (std::get<TaskALabel>(gate_preds.label(i)) == TaskALabel::sexist) ids.insert(gate_preds.example_ids[i]);
        } else if (gate_preds.level == Level::B && model_level == Level::C) {
            gate.has_category_gate = true;
            for (std::size_t i = 0; i < gate_preds.size(); ++i) {
                ids.insert(gate_preds.example_ids[i]);
                gate.category_of.emplace(gate_preds.example_ids[i], std::get<CategoryLabel>(gate_preds.label(i)));
            }
        } else {
            throw Error(ErrorKind::InvalidArgument, "gate file " + source + " is at level " +
                                                        std::string(to_string(gate_preds.level)) +
                                                        ", which cannot gate a level " +
                                                        std::string(to_string(model_level)) + " model");
        }
        restrict(std::move(ids));
    }
    return gate;
}

inline PredictionSet cmd_predict(const fs::path& model_path, const fs::path& input, const fs::path& output,
                                 const std::vector<std::string>& gates = {}) {
    const auto model = load_model(model_path);
    const auto ds = load_dataset(input, std::nullopt);
    const auto gate = build_gate(gates, ds, model.level);

    PredictionSet out(model.metadata.value("model_id", model_path.stem().string()), model.level);
    for (const auto& ex : ds.examples()) {
        if (gate.allowed_ids && !gate.allowed_ids->contains(ex.id)) continue;
        auto p = model.predict(ex.text);
        if (gate.has_category_gate) {
            const auto cat = gate.category_of.at(ex.id);
            double mass = 0.0;
            for (std::size_t c = 0; c < p.probs.size(); ++c) {
                if (std::get<VectorLabel>(label_at(Level::C, c)).category != cat.id) p.probs[c] = 0.0;
                mass += p.probs[c];
            }
            if (mass > 0.0) {
                for (double& v : p.probs) v /= mass;
            } else {
                const auto children = children_of(cat);
                for (const auto& child : children) p.probs[class_index(child)] = 1.0 / static_cast<double>(children.size());
            }
            p.label = argmax(p.probs);
        }
        out.push_back(ex.id, std::move(p.probs), p.label);
    }
    if (!output.empty()) {
        if (output.has_parent_path()) fs::create_directories(output.parent_path());
        save_predictions(output, out);
    }
    return out;
}

enum class EnsembleMethod { vote, weighted };

inline EnsembleMethod parse_method(std::string_view name) {
    if (name == "vote") return EnsembleMethod::vote;
    if (name == "weighted") return EnsembleMethod::weighted;
    throw Error(ErrorKind::Config, "unknown ensemble method '" + std::string(name) + "'");
}

struct EnsembleOutcome {
    PredictionSet fused;
    std::optional<MetricsReport> report;
    std::optional<GridSearchResult> grid;
};

inline EnsembleOutcome cmd_ensemble(const std::vector<fs::path>& files, EnsembleMethod method,
                                    const std::optional<fs::path>& truth, double grid_step, const fs::path& output,
                                    const std::optional<fs::path>& report_path = std::nullopt) {
    if (files.size() < 2) throw Error(ErrorKind::InvalidArgument, "ensembling needs at least two prediction files");
    std::vector<PredictionSet> members;
    for (const auto& f : files) members.push_back(load_predictions(f));
    check_aligned(members);
    const Level level = members.front().level;

    std::optional<Dataset> gold;
    if (truth) gold = load_dataset(*truth, level);

    EnsembleOutcome out;
    if (method == EnsembleMethod::vote) {
        out.fused = majority_vote(members, "majority_vote");
    } else {
        if (!gold) throw Error(ErrorKind::Config, "--truth is required for the weighted method");
        // Grid-search on the gold rows the members cover.
        std::unordered_set<std::string> covered(members.front().example_ids.begin(), members.front().example_ids.end());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < gold->size(); ++i)
            if (covered.contains((*gold)[i].id)) keep.push_back(i);
        out.grid = grid_search_weights(members, gold->subset(keep), grid_step);
        out.fused = weighted_average(members, out.grid->weights, "weighted_average");
        spdlog::info("grid search over {} candidates: validation macro F1 {:.4f}", out.grid->candidates,
                     out.grid->macro_f1);
    }
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    save_predictions(output, out.fused);

    if (gold) {
        std::unordered_set<std::string> covered(out.fused.example_ids.begin(), out.fused.example_ids.end());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < gold->size(); ++i)
            if (covered.contains((*gold)[i].id)) keep.push_back(i);
        out.report = evaluate_run(out.fused, gold->subset(keep));
        if (report_path) {
            auto doc = to_json(*out.report);
            doc["method"] = method == EnsembleMethod::vote ? "vote" : "weighted";
            std::vector<std::string> ids;
            for (const auto& m : members) ids.push_back(m.model_id);
            doc["members"] = ids;
            if (out.grid) doc["weights"] = out.grid->weights;
            write_json(*report_path, doc);
        }
    }
    return out;
}

struct EvaluateOutcome {
    std::vector<MetricsReport> reports; // one per prediction file, in order
    std::optional<std::size_t> hierarchy_violations;
};

/// Scores each prediction file against gold at the file's level. Without
/// `allow_partial` the prediction ids must equal the gold ids at that level;
/// with it, scoring uses the gold rows the predictions cover (pipeline-gated
/// B/C files cover predicted-sexist rows, not gold-sexist ones).
inline EvaluateOutcome cmd_evaluate(const std::vector<fs::path>& files, const fs::path& gold_path,
                                    std::optional<Level> level, bool check_hierarchy, bool allow_partial = false,
                                    const std::optional<fs::path>& report_path = std::nullopt) {
    std::vector<PredictionSet> sets;
    for (const auto& f : files) sets.push_back(load_predictions(f));

    EvaluateOutcome out;
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& p : sets) {
        if (level && p.level != *level) throw Error(ErrorKind::Misaligned, p.model_id + " is not at the requested level");
        auto gold = load_dataset(gold_path, p.level);
        if (allow_partial) {
            const auto ids = p.id_index();
            std::vector<std::size_t> keep;
            for (std::size_t i = 0; i < gold.size(); ++i)
                if (ids.contains(gold[i].id)) keep.push_back(i);
            PredictionSet covered(p.model_id, p.level);
            std::unordered_set<std::string> gold_ids;
            for (auto i : keep) gold_ids.insert(gold[i].id);
            for (std::size_t i = 0; i < p.size(); ++i)
                if (gold_ids.contains(p.example_ids[i])) covered.push_back(p.example_ids[i], p.probs[i], p.labels[i]);
            out.reports.push_back(evaluate_run(covered, gold.subset(keep)));
        } else {
            out.reports.push_back(evaluate_run(p, gold));
        }
        doc[std::string(to_string(p.level))] = to_json(out.reports.back());
    }

    if (check_hierarchy) {
        const PredictionSet *a = nullptr, *b = nullptr, *c = nullptr;
        for (const auto& p : sets) {
            const PredictionSet*& slot = p.level == Level::A ? a : p.level == Level::B ? b : c;
            if (slot) throw Error(ErrorKind::InvalidArgument, "two prediction files at the same level");
            slot = &p;
        }
        out.hierarchy_violations = hierarchy_violations(a, b, c);
        doc["hierarchy_violations"] = *out.hierarchy_violations;
        for (auto& r : out.reports) r.hierarchy_violations = out.hierarchy_violations;
    }
    if (report_path) write_json(*report_path, doc);
    return out;
}

/// The compiled-in taxonomy as JSON.
inline nlohmann::json taxonomy_json() {
    nlohmann::json categories = nlohmann::json::array();
    for (std::size_t i = 0; i < class_count(Level::B); ++i) {
        const auto cat = std::get<CategoryLabel>(label_at(Level::B, i));
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& v : children_of(cat)) vectors.push_back({{"key", label_key(v)}, {"label", render(v)}});
        categories.push_back({{"key", label_key(cat)}, {"label", render(cat)}, {"parent", "sexist"}, {"vectors", vectors}});
    }
    return {
        {"levels",
         {{"A", class_keys(Level::A)}, {"B", class_keys(Level::B)}, {"C", class_keys(Level::C)}}},
        {"task_a", {{{"key", "not_sexist"}, {"label", "not sexist"}}, {{"key", "sexist"}, {"label", "sexist"}}}},
        {"categories", categories},
    };
}

} // namespace hiertext::cli
