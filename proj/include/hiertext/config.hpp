#pragma once

// Run configuration: a JSON document, optionally patched by `key.path=value`
// overrides, resolved into typed settings. Training hyperparameters start
// from a named profile ("paper" or "desk") and explicit keys win.
//
//   {
//     "data": "train.csv",
//     "level": "A",
//     "seed": 42,
//     "output_dir": "runs/a",
//     "model_id": "model",
//     "jobs": 1,
//     "featurizer": {"word_ngrams": [1, 2], "char_ngrams": [3, 5],
//                    "dimension": 262144, "use_idf": true, "lowercase": true},
//     "train": {"profile": "desk", "learning_rate": 0.05, "epochs": 6,
//               "batch_size": 6, "loss": "focal", "alpha": 1.0, "gamma": 2.0,
//               "class_weights": false},
//     "split": {"train_fraction": 0.8, "stratify": true},
//     "cv": {"k": 5}
//   }

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hiertext/data.hpp"
#include "hiertext/error.hpp"
#include "hiertext/features.hpp"
#include "hiertext/model.hpp"
#include "hiertext/taxonomy.hpp"

namespace hiertext {

struct RunConfig {
    std::filesystem::path data;
    Level level = Level::A;
    std::uint64_t seed = 42;
    std::filesystem::path output_dir = "out";
    std::string model_id = "model";
    std::size_t jobs = 1;
    FeaturizerConfig featurizer;
    std::string profile = "desk";
    TrainConfig train = desk_profile();
    bool use_class_weights = false;
    SplitSpec split;
    std::size_t k = 5;
};

inline TrainConfig profile_by_name(std::string_view name) {
    if (name == "paper") return paper_profile();
    if (name == "desk") return desk_profile();
    throw Error(ErrorKind::Config, "unknown profile '" + std::string(name) + "' (expected paper or desk)");
}

inline std::string_view to_string(LossKind loss) { return loss == LossKind::focal ? "focal" : "cross_entropy"; }

inline LossKind parse_loss(std::string_view name) {
    if (name == "focal") return LossKind::focal;
    if (name == "cross_entropy" || name == "ce" || name == "none") return LossKind::cross_entropy;
    throw Error(ErrorKind::Config, "unknown loss '" + std::string(name) + "'");
}

/// Sets `a.b.c` inside `doc`, creating objects along the way. The value is
/// parsed as JSON when possible and taken as a string otherwise.
inline void apply_override(nlohmann::json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw Error(ErrorKind::Config, "override must look like key=value: '" + std::string(assignment) + "'");
    const std::string_view key = assignment.substr(0, eq);
    const std::string raw(assignment.substr(eq + 1));

    nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;

    nlohmann::json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (part.empty()) throw Error(ErrorKind::Config, "empty key segment in '" + std::string(key) + "'");
        if (!node->is_object()) *node = nlohmann::json::object();
        if (dot == std::string_view::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

inline RunConfig resolve_config(const nlohmann::json& doc) {
    RunConfig cfg;
    try {
        if (!doc.is_object()) throw Error(ErrorKind::Config, "config root must be an object");
        if (doc.contains("data")) cfg.data = doc.at("data").get<std::string>();
        if (doc.contains("level")) cfg.level = parse_level(doc.at("level").get<std::string>());
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("model_id")) cfg.model_id = doc.at("model_id").get<std::string>();
        if (doc.contains("jobs")) cfg.jobs = std::max<std::size_t>(1, doc.at("jobs").get<std::size_t>());
        if (doc.contains("featurizer")) from_json(doc.at("featurizer"), cfg.featurizer);
        cfg.featurizer.validate();

        const auto train = doc.value("train", nlohmann::json::object());
        cfg.profile = train.value("profile", std::string("desk"));
        cfg.train = profile_by_name(cfg.profile);
        if (train.contains("learning_rate")) cfg.train.learning_rate = train.at("learning_rate").get<double>();
        if (train.contains("epochs")) cfg.train.epochs = train.at("epochs").get<std::size_t>();
        if (train.contains("batch_size")) cfg.train.batch_size = train.at("batch_size").get<std::size_t>();
        if (train.contains("loss")) cfg.train.loss = parse_loss(train.at("loss").get<std::string>());
        if (train.contains("alpha")) {
            const auto& a = train.at("alpha");
            cfg.train.focal.alpha = a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
            if (cfg.train.focal.alpha.size() != 1 && cfg.train.focal.alpha.size() != class_count(cfg.level))
                throw Error(ErrorKind::Config, "alpha vector length must equal the level's class count");
        }
        if (train.contains("gamma")) cfg.train.focal.gamma = train.at("gamma").get<double>();
        if (train.contains("class_weights")) cfg.use_class_weights = train.at("class_weights").get<bool>();
        cfg.train.seed = cfg.seed;
        cfg.train.validate();

        const auto split = doc.value("split", nlohmann::json::object());
        cfg.split.train_fraction = split.value("train_fraction", cfg.split.train_fraction);
        cfg.split.stratify = split.value("stratify", cfg.split.stratify);
        cfg.split.seed = cfg.seed;
        if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction < 1.0))
            throw Error(ErrorKind::Config, "split.train_fraction must lie in (0, 1)");

        const auto cv = doc.value("cv", nlohmann::json::object());
        cfg.k = cv.value("k", cfg.k);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        throw Error(ErrorKind::Config, e.what());
    }
    return cfg;
}

inline nlohmann::json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorKind::Config, "config " + path.string() + " is not valid JSON");
    return doc;
}

} // namespace hiertext
