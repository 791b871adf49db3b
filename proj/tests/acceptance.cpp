// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Pass criterion numbers as arguments to run a subset.
//
// Criterion 10 always runs the gated pipeline on a synthetic corpus; set
// EDOS_CSV to a task-format CSV to also run it on real data.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <tuple>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hiertext/cli/commands.hpp"
#include "hiertext/synthetic.hpp"
#include "support/oracles.hpp"

using namespace hiertext;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit_s; // <= 0: no limit
    std::function<Outcome()> run;
};

std::string printf_str(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(k);
    double s = 0.0;
    for (double& x : v) s += (x = e(gen));
    for (double& x : v) x /= s;
    return v;
}

PredictionSet random_member(std::mt19937_64& gen, Level level, std::size_t n, std::string id) {
    PredictionSet p(std::move(id), level);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = random_simplex(gen, class_count(level));
        const auto label = argmax(row);
        p.push_back("e" + std::to_string(i), std::move(row), label);
    }
    return p;
}

Dataset random_dataset(std::mt19937_64& gen, Level level, std::size_t n, std::size_t min_per_class) {
    const auto k = class_count(level);
    std::vector<Example> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Example ex;
        ex.id = "e" + std::to_string(i);
        ex.text = "t";
        const std::size_t c = i < k * min_per_class ? i % k : gen() % k;
        const auto label = label_at(level, c);
        if (level == Level::A) {
            ex.label_a = std::get<TaskALabel>(label);
        } else {
            ex.label_a = TaskALabel::sexist;
            ex.label_b = std::get<CategoryLabel>(label);
        }
        rows.push_back(std::move(ex));
    }
    std::shuffle(rows.begin(), rows.end(), gen);
    return Dataset(std::move(rows), level);
}

// 1
Outcome focal_identity() {
    std::mt19937_64 gen(101);
    const FocalLossConfig plain{{1.0}, 0.0};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t k = 2 + gen() % 10;
        const auto p = random_simplex(gen, k);
        const std::size_t c = gen() % k;
        worst = std::max(worst, std::abs(focal_loss(p, c, plain) - (-std::log(p[c]))));
    }
    return {worst < 1e-12, printf_str("max |FL - CE| = %.3g over 1000 draws", worst)};
}

// 2
Outcome gradient_oracle() {
    std::mt19937_64 gen(202);
    const double h = 1e-5;
    double worst = 0.0;
    std::size_t probes = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + gen() % 10, dim = 64;
        std::vector<std::string> classes;
        for (std::size_t c = 0; c < k; ++c) classes.push_back(std::to_string(c));
        ModelParams params(classes, dim);
        std::normal_distribution<double> nd(0.0, 0.6);
        for (double& w : params.weights) w = nd(gen);
        for (double& b : params.bias) b = nd(gen);

        std::vector<LabeledFeature> batch;
        const std::size_t n = 1 + gen() % 8;
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back({hiertext::testing::random_feature(gen, dim, 1 + gen() % 8), gen() % k});

        TrainConfig cfg;
        cfg.loss = trial % 2 ? LossKind::focal : LossKind::cross_entropy;
        cfg.focal.gamma = std::uniform_real_distribution<double>(0.5, 4.0)(gen);
        if (trial % 4 >= 2) {
            cfg.class_weights = std::vector<double>(k);
            for (double& w : *cfg.class_weights) w = std::uniform_real_distribution<double>(0.2, 4.0)(gen);
        }
        const auto lg = loss_and_gradient(params, batch, cfg);
        for (int probe = 0; probe < 20; ++probe, ++probes) {
            double* slot;
            double analytic;
            if (probe % 5 == 0) {
                const auto c = gen() % k;
                slot = &params.bias[c];
                analytic = lg.gradient.bias[c];
            } else {
                const auto& item = batch[gen() % n];
                const auto d = item.x.indices[gen() % item.x.nnz()];
                const auto c = gen() % k;
                slot = &params.weights[d * k + c];
                analytic = lg.gradient.weight(c, d);
            }
            const double saved = *slot;
            *slot = saved + h;
            const double up = hiertext::testing::reference_loss(params, batch, cfg);
            *slot = saved - h;
            const double down = hiertext::testing::reference_loss(params, batch, cfg);
            *slot = saved;
            const double numeric = (up - down) / (2 * h);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(analytic - numeric) / scale);
        }
    }
    return {worst < 1e-5, printf_str("max relative error %.3g over 50 configurations, %zu probes", worst, probes)};
}

// 3
Outcome class_weight_values() {
    DatasetStats stats;
    stats.n_samples = 14000;
    stats.n_classes = 2;
    stats.counts = {10602, 3398};
    const auto w = class_weights(stats);
    const double weighted = w[0] * 10602 + w[1] * 3398;
    const bool ok = std::abs(w[0] - 0.660253) < 1e-5 && std::abs(w[1] - 2.060035) < 1e-5 && std::abs(weighted - 14000) < 1e-6;
    return {ok, printf_str("w = {%.6f, %.6f}, sum w*count = %.9f", w[0], w[1], weighted)};
}

// 4
Outcome metric_oracle() {
    std::size_t cases = 0;
    for (std::size_t k = 1; k <= 3; ++k) {
        std::vector<std::string> keys;
        for (std::size_t c = 0; c < k; ++c) keys.push_back(std::to_string(c));
        for (std::size_t n = 0; n <= 6; ++n) {
            std::size_t combos = 1;
            for (std::size_t i = 0; i < 2 * n; ++i) combos *= k;
            std::vector<std::size_t> truth(n), pred(n);
            for (std::size_t code = 0; code < combos; ++code, ++cases) {
                std::size_t rest = code;
                for (std::size_t i = 0; i < n; ++i) {
                    truth[i] = rest % k;
                    rest /= k;
                    pred[i] = rest % k;
                    rest /= k;
                }
                const auto r = metrics(confusion_matrix(truth, pred, keys));
                const auto o = hiertext::testing::direct_f1(truth, pred, k);
                if (r.macro_f1 != o.macro) return {false, printf_str("macro mismatch at k=%zu n=%zu case %zu", k, n, code)};
                for (std::size_t c = 0; c < k; ++c)
                    if (r.per_class[c].f1 != o.f1[c]) return {false, printf_str("class %zu mismatch at k=%zu n=%zu", c, k, n)};
            }
        }
    }
    return {true, printf_str("%zu assignments identical", cases)};
}

// 5
Outcome majority_baseline() {
    std::vector<std::size_t> truth(10602, 0);
    truth.resize(14000, 1);
    const std::vector<std::size_t> pred(14000, 0);
    const double f1 = macro_f1(truth, pred, class_keys(Level::A));
    return {std::abs(f1 - 0.4318) <= 1e-4, printf_str("macro F1 = %.6f, expected 0.4318 +/- 0.0001", f1)};
}

// 6
Outcome ensemble_guarantees() {
    std::mt19937_64 gen(606);
    for (int trial = 0; trial < 20; ++trial) {
        const Level level = trial % 2 ? Level::B : Level::A;
        const std::size_t n = 30 + gen() % 50, m = 2 + gen() % 3;
        const auto truth = random_dataset(gen, level, n, 0);
        std::vector<PredictionSet> members;
        for (std::size_t j = 0; j < m; ++j) {
            auto p = random_member(gen, level, n, "m" + std::to_string(j));
            p.example_ids.clear();
            for (const auto& ex : truth.examples()) p.example_ids.push_back(ex.id);
            members.push_back(std::move(p));
        }
        const auto gold = aligned_truth(members[0], truth);
        const auto best = grid_search_weights(members, truth, 0.1);
        for (const auto& p : members)
            if (best.macro_f1 < macro_f1(gold, p.labels, p.class_list))
                return {false, printf_str("grid search below a member on set %d", trial)};
    }
    for (int trial = 0; trial < 100; ++trial) {
        const Level level = trial % 3 == 0 ? Level::C : trial % 3 == 1 ? Level::B : Level::A;
        const std::size_t n = 1 + gen() % 30, m = 2 + gen() % 6;
        std::vector<PredictionSet> members;
        for (std::size_t j = 0; j < m; ++j) members.push_back(random_member(gen, level, n, "m" + std::to_string(j)));
        // Force some vote ties.
        if (m % 2 == 0) members[1].labels = members[0].labels;
        const auto base = majority_vote(members).labels;
        std::shuffle(members.begin(), members.end(), gen);
        if (majority_vote(members).labels != base) return {false, printf_str("vote changed under permutation, case %d", trial)};
    }
    return {true, "20 grid searches >= best member; 100 vote permutations stable"};
}

// 7
Outcome stratification() {
    std::mt19937_64 gen(707);
    for (int trial = 0; trial < 100; ++trial) {
        const Level level = trial % 2 ? Level::B : Level::A;
        const std::size_t k = 2 + gen() % 9;
        const auto ds = random_dataset(gen, level, 4 * k + gen() % 300, k);
        const auto kc = class_count(level);
        std::vector<std::size_t> n_c(kc, 0);
        for (std::size_t i = 0; i < ds.size(); ++i) ++n_c[ds.class_of(i)];

        const auto folds = stratified_kfold(ds, k, gen());
        std::vector<std::size_t> covered(ds.size(), 0);
        for (std::size_t f = 0; f < k; ++f)
            for (auto i : folds.members(f, true)) ++covered[i];
        if (std::any_of(covered.begin(), covered.end(), [](auto c) { return c != 1; }))
            return {false, printf_str("k-fold is not a partition (dataset %d)", trial)};
        for (std::size_t c = 0; c < kc; ++c) {
            std::size_t lo = SIZE_MAX, hi = 0;
            for (std::size_t f = 0; f < k; ++f) {
                std::size_t cnt = 0;
                for (auto i : folds.members(f, true)) cnt += ds.class_of(i) == c;
                lo = std::min(lo, cnt);
                hi = std::max(hi, cnt);
            }
            if (hi - lo > 1) return {false, printf_str("class %zu spread %zu..%zu across folds (dataset %d)", c, lo, hi, trial)};
        }

        SplitSpec spec;
        spec.train_fraction = std::uniform_real_distribution<double>(0.5, 0.9)(gen);
        spec.seed = gen();
        const auto split = stratified_split_indices(ds, spec);
        std::vector<std::size_t> seen(ds.size(), 0), train_c(kc, 0);
        for (auto i : split.train) {
            ++seen[i];
            ++train_c[ds.class_of(i)];
        }
        for (auto i : split.validation) ++seen[i];
        if (std::any_of(seen.begin(), seen.end(), [](auto c) { return c != 1; }))
            return {false, printf_str("split is not a disjoint cover (dataset %d)", trial)};
        for (std::size_t c = 0; c < kc; ++c) {
            if (!n_c[c]) continue;
            const double ideal = spec.train_fraction * static_cast<double>(n_c[c]);
            if (std::abs(static_cast<double>(train_c[c]) - ideal) >= 1.0 || train_c[c] < 1 || train_c[c] >= n_c[c])
                return {false, printf_str("class %zu got %zu train of %zu (ideal %.2f)", c, train_c[c], n_c[c], ideal)};
        }
    }
    return {true, "100 datasets: k-fold partition with per-class spread <= 1; split disjoint and apportioned"};
}

struct DeskRun {
    double holdout_f1 = 0.0;
    double cv_f1 = 0.0;
    double train_seconds = 0.0;
    cli::TrainOutcome train;
};

DeskRun desk_run(const fs::path& dir, Level level, double sexist_fraction) {
    synthetic::CorpusSpec spec;
    spec.n = 2000;
    spec.sexist_fraction = sexist_fraction;
    const auto data = dir / "corpus.csv";
    fs::create_directories(dir);
    synthetic::write_corpus(data, synthetic::generate(spec));

    nlohmann::json doc{{"data", data.string()}, {"level", std::string(to_string(level))},
                       {"output_dir", (dir / "out").string()}, {"jobs", 1}};
    const auto cfg = resolve_config(doc);
    DeskRun r;
    const auto start = std::chrono::steady_clock::now();
    r.train = cli::cmd_train(cfg);
    r.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.holdout_f1 = r.train.holdout.macro_f1;
    return r;
}

// 8
Outcome desk_scale(const fs::path& root) {
    std::string detail;
    bool ok = true;
    for (const auto& [level, fraction, floor] : {std::tuple{Level::A, 0.25, 0.95}, std::tuple{Level::B, 1.0, 0.90}}) {
        const auto dir = root / ("c8-" + std::string(to_string(level)));
        auto r = desk_run(dir, level, fraction);
        nlohmann::json doc{{"data", (dir / "corpus.csv").string()}, {"level", std::string(to_string(level))},
                           {"output_dir", (dir / "cv").string()}, {"cv", {{"k", 5}}}};
        r.cv_f1 = cli::cmd_cv(resolve_config(doc)).pooled.macro_f1;
        const bool this_ok = r.holdout_f1 >= floor && r.train_seconds < 60.0 && std::abs(r.cv_f1 - r.holdout_f1) <= 0.05;
        ok = ok && this_ok;
        detail += printf_str("%s%s: holdout F1 %.4f (>= %.2f), train %.2f s, cv F1 %.4f", detail.empty() ? "" : "; ",
                      level == Level::A ? "binary" : "4-class", r.holdout_f1, floor, r.train_seconds, r.cv_f1);
    }
    return {ok, detail};
}

// 9
Outcome determinism(const fs::path& root) {
    bool ok = true;
    std::string detail;
    for (const auto& [level, fraction] : {std::pair{Level::A, 0.25}, std::pair{Level::B, 1.0}}) {
        const auto tag = std::string(to_string(level));
        const auto a = desk_run(root / ("c9a-" + tag), level, fraction).train;
        const auto b = desk_run(root / ("c9b-" + tag), level, fraction).train;
        const bool same_model = slurp(a.model_path) == slurp(b.model_path);
        const bool same_preds = slurp(a.predictions_path) == slurp(b.predictions_path);
        ok = ok && same_model && same_preds;
        detail += printf_str("%slevel %s: model %s, predictions %s", detail.empty() ? "" : "; ", tag.c_str(),
                      same_model ? "identical" : "DIFFER", same_preds ? "identical" : "DIFFER");
    }
    return {ok, detail};
}

std::size_t gated_pipeline(const fs::path& data, const fs::path& dir) {
    std::map<Level, fs::path> models;
    for (const Level level : {Level::A, Level::B, Level::C}) {
        nlohmann::json doc{{"data", data.string()},
                           {"level", std::string(to_string(level))},
                           {"output_dir", dir.string()},
                           {"model_id", "level_" + std::string(to_string(level))}};
        models[level] = cli::cmd_train(resolve_config(doc)).model_path;
    }
    const auto pa = dir / "pred_a.csv", pb = dir / "pred_b.csv", pc = dir / "pred_c.csv";
    cli::cmd_predict(models[Level::A], data, pa);
    cli::cmd_predict(models[Level::B], data, pb, {pa.string()});
    cli::cmd_predict(models[Level::C], data, pc, {pa.string(), pb.string()});
    const auto out = cli::cmd_evaluate({pa, pb, pc}, data, std::nullopt, true, true);
    return *out.hierarchy_violations;
}

// 10
Outcome real_data_pipeline(const fs::path& root) {
    synthetic::CorpusSpec spec;
    spec.n = 2000;
    const auto dir = root / "c10";
    fs::create_directories(dir);
    synthetic::write_corpus(dir / "corpus.csv", synthetic::generate(spec));
    const auto synthetic_violations = gated_pipeline(dir / "corpus.csv", dir);
    std::string detail = printf_str("synthetic gated A->B->C: %zu violations", synthetic_violations);
    bool ok = synthetic_violations == 0;

    if (const char* edos = std::getenv("EDOS_CSV"); edos && *edos) {
        const auto real_dir = root / "c10-edos";
        fs::create_directories(real_dir);
        const auto v = gated_pipeline(edos, real_dir);
        ok = ok && v == 0;
        detail += printf_str("; EDOS gated A->B->C: %zu violations", v);
    } else {
        detail += "; real-data run SKIPPED (set EDOS_CSV to enable)";
    }
    return {ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::warn);
    hiertext::testing::TempDir scratch("hiertext-acceptance");
    const auto root = scratch.path;

    const std::vector<Criterion> all{
        {1, "focal-loss identity", 1.0, focal_identity},
        {2, "gradient oracle", 10.0, gradient_oracle},
        {3, "class-weight values", 0.0, class_weight_values},
        {4, "metric oracle", 30.0, metric_oracle},
        {5, "majority baseline", 0.0, majority_baseline},
        {6, "ensemble guarantees", 0.0, ensemble_guarantees},
        {7, "stratification", 0.0, stratification},
        {8, "desk-scale end-to-end", 0.0, [&] { return desk_scale(root); }},
        {9, "determinism", 0.0, [&] { return determinism(root); }},
        {10, "hierarchical pipeline", 0.0, [&] { return real_data_pipeline(root); }},
    };

    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.contains(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = c.run();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            r.pass = false;
            r.detail += printf_str(" [over %.0f s limit]", c.time_limit_s);
        }
        std::printf("%s criterion %d (%s): %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", c.id, c.name, r.detail.c_str(), secs);
        failures += !r.pass;
    }
    std::fflush(stdout);
    return failures ? 1 : 0;
}
