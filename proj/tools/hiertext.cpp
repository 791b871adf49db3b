// hiertext: train, cross-validate, predict, ensemble and evaluate
// hierarchical text classifiers on task-format CSV data.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage or config error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "hiertext/cli/commands.hpp"

namespace {

using namespace hiertext;

struct RunFlags {
    std::string config;
    std::vector<std::string> sets;
    std::optional<std::string> data, level, profile, loss, alpha, out, model_id;
    std::optional<double> gamma;
    std::optional<std::uint64_t> seed;
    bool class_weights = false;
    std::optional<std::size_t> k, jobs;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--set", f.sets, "Override a config key, e.g. --set train.epochs=4");
    cmd->add_option("--data", f.data, "Task-format CSV to train on");
    cmd->add_option("--level", f.level, "Task level A, B or C");
    cmd->add_option("--profile", f.profile, "Hyperparameter profile: paper or desk");
    cmd->add_option("--loss", f.loss, "cross_entropy or focal");
    cmd->add_option("--alpha", f.alpha, "Focal alpha: one value or a comma-separated per-class list");
    cmd->add_option("--gamma", f.gamma, "Focal gamma");
    cmd->add_flag("--class-weights", f.class_weights, "Weight the loss by balanced class weights");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--model-id", f.model_id, "Name used for output files");
    cmd->add_option("--seed", f.seed, "Run seed");
}

RunConfig resolve(const RunFlags& f) {
    nlohmann::json doc = f.config.empty() ? nlohmann::json::object() : read_config_file(f.config);
    for (const auto& s : f.sets) apply_override(doc, s);
    auto set = [&](const std::string& key, nlohmann::json value) { doc[nlohmann::json::json_pointer(key)] = std::move(value); };
    if (f.data) set("/data", *f.data);
    if (f.level) set("/level", *f.level);
    if (f.profile) set("/train/profile", *f.profile);
    if (f.loss) set("/train/loss", *f.loss);
    if (f.alpha) {
        std::vector<double> values;
        std::stringstream ss(*f.alpha);
        for (std::string part; std::getline(ss, part, ',');) {
            try {
                values.push_back(std::stod(part));
            } catch (const std::exception&) {
                throw Error(ErrorKind::Config, "bad --alpha value '" + part + "'");
            }
        }
        set("/train/alpha", values.size() == 1 ? nlohmann::json(values[0]) : nlohmann::json(values));
    }
    if (f.gamma) set("/train/gamma", *f.gamma);
    if (f.class_weights) set("/train/class_weights", true);
    if (f.out) set("/output_dir", *f.out);
    if (f.model_id) set("/model_id", *f.model_id);
    if (f.seed) set("/seed", *f.seed);
    if (f.k) set("/cv/k", *f.k);
    if (f.jobs) set("/jobs", *f.jobs);
    return resolve_config(doc);
}

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("hiertext");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("HIERTEXT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

} // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"Hierarchical text classification pipeline"};
    app.require_subcommand(1);

    RunFlags train_flags;
    auto* train = app.add_subcommand("train", "Train on a stratified split and score the holdout");
    add_run_flags(train, train_flags);

    RunFlags cv_flags;
    auto* cv = app.add_subcommand("cv", "Stratified k-fold training with out-of-fold predictions");
    add_run_flags(cv, cv_flags);
    cv->add_option("--k", cv_flags.k, "Number of folds");
    cv->add_option("--jobs", cv_flags.jobs, "Folds trained in parallel");

    std::string model_path, input_path, output_path;
    std::vector<std::string> gates;
    auto* predict = app.add_subcommand("predict", "Write a prediction file for a CSV of posts");
    predict->add_option("--model", model_path, "Model file")->required();
    predict->add_option("--input", input_path, "CSV with rewire_id and text columns")->required();
    predict->add_option("--output", output_path, "Prediction CSV to write")->required();
    predict->add_option("--gate-on", gates,
                        "Restrict to sexist rows: 'gold', a Task A prediction file, or (for Task C) a Task B file");

    std::vector<std::string> ensemble_files;
    std::string method = "vote", ensemble_output;
    std::optional<std::string> truth, ensemble_report;
    double grid_step = 0.1;
    auto* ensemble = app.add_subcommand("ensemble", "Fuse aligned prediction files");
    ensemble->add_option("files", ensemble_files, "Prediction files")->required()->expected(2, -1);
    ensemble->add_option("--method", method, "vote or weighted")->check(CLI::IsMember({"vote", "weighted"}));
    ensemble->add_option("--truth", truth, "Gold CSV (required for weighted)");
    ensemble->add_option("--grid-step", grid_step, "Weight grid resolution");
    ensemble->add_option("--output", ensemble_output, "Fused prediction CSV")->required();
    ensemble->add_option("--report", ensemble_report, "Metrics JSON to write when --truth is given");

    std::vector<std::string> eval_files;
    std::string gold_path;
    std::optional<std::string> eval_level, eval_report;
    bool check_hierarchy = false, allow_partial = false;
    auto* evaluate = app.add_subcommand("evaluate", "Score prediction files against gold labels");
    evaluate->add_option("files", eval_files, "Prediction files (one per level)")->required()->expected(1, 3);
    evaluate->add_option("--gold", gold_path, "Gold task-format CSV")->required();
    evaluate->add_option("--level", eval_level, "Require every file to be at this level");
    evaluate->add_flag("--check-hierarchy", check_hierarchy, "Count cross-level consistency violations");
    evaluate->add_flag("--allow-partial", allow_partial, "Score only the gold rows a file covers");
    evaluate->add_option("--report", eval_report, "Metrics JSON to write");

    auto* taxonomy = app.add_subcommand("taxonomy", "Inspect the label taxonomy");
    taxonomy->require_subcommand(1);
    auto* dump = taxonomy->add_subcommand("dump", "Print the taxonomy as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train) {
            const auto out = cli::cmd_train(resolve(train_flags));
            std::cout << render_table(out.holdout);
            std::cout << "model: " << out.model_path.string() << "\npredictions: " << out.predictions_path.string()
                      << "\nreport: " << out.report_path.string() << '\n';
        } else if (*cv) {
            const auto out = cli::cmd_cv(resolve(cv_flags));
            std::cout << render_table(out.pooled);
            for (std::size_t f = 0; f < out.fold_macro_f1.size(); ++f)
                std::cout << "fold " << f << " macro_f1 " << out.fold_macro_f1[f] << '\n';
            std::cout << "out-of-fold predictions: " << out.oof_path.string() << '\n';
        } else if (*predict) {
            const auto out = cli::cmd_predict(model_path, input_path, output_path, gates);
            std::cout << out.size() << " predictions written to " << output_path << '\n';
        } else if (*ensemble) {
            std::vector<std::filesystem::path> files(ensemble_files.begin(), ensemble_files.end());
            std::optional<std::filesystem::path> truth_path, report_path;
            if (truth) truth_path = *truth;
            if (ensemble_report) report_path = *ensemble_report;
            const auto out = cli::cmd_ensemble(files, cli::parse_method(method), truth_path, grid_step,
                                               ensemble_output, report_path);
            if (out.grid) {
                std::cout << "weights:";
                for (double w : out.grid->weights) std::cout << ' ' << w;
                std::cout << '\n';
            }
            if (out.report) std::cout << render_table(*out.report);
            std::cout << out.fused.size() << " fused predictions written to " << ensemble_output << '\n';
        } else if (*evaluate) {
            std::vector<std::filesystem::path> files(eval_files.begin(), eval_files.end());
            std::optional<Level> level;
            if (eval_level) level = parse_level(*eval_level);
            std::optional<std::filesystem::path> report_path;
            if (eval_report) report_path = *eval_report;
            const auto out = cli::cmd_evaluate(files, gold_path, level, check_hierarchy, allow_partial, report_path);
            for (const auto& r : out.reports) {
                std::cout << "level " << to_string(*r.level) << '\n' << render_table(r);
            }
            if (out.hierarchy_violations && out.reports.empty())
                std::cout << "hierarchy violations: " << *out.hierarchy_violations << '\n';
        } else if (*dump) {
            std::cout << cli::taxonomy_json().dump(2) << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "hiertext: " << e.what() << '\n';
        return e.kind() == ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "hiertext: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
