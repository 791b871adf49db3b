#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hiertext/data.hpp"
#include "support/datasets.hpp"

using namespace hiertext;
using hiertext::testing::edos_csv;
using hiertext::testing::task_a_dataset;
using hiertext::testing::task_b_dataset;

namespace {

Dataset read(const std::string& text, std::optional<Level> level) {
    std::istringstream in(text);
    return read_dataset(in, level);
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::Io;
}

} // namespace

TEST(LoadDataset, FullSizedTaskAFile) {
    const auto csv = edos_csv(10602, 3398);
    const auto a = read(csv, Level::A);
    ASSERT_EQ(a.size(), 14000u);
    const auto stats = compute_stats(a);
    EXPECT_EQ(stats.counts, (std::vector<std::size_t>{10602, 3398}));
    EXPECT_EQ(stats.n_classes, 2u);

    const auto b = read(csv, Level::B);
    EXPECT_EQ(b.size(), 3398u);
    EXPECT_EQ(b[0].text, "text, with comma 0");
    EXPECT_EQ(*b[0].label_c, (VectorLabel{2, 1}));
}

TEST(LoadDataset, HeaderOnly) {
    EXPECT_EQ(read("rewire_id,text,label_sexist,label_category,label_vector\n", Level::A).size(), 0u);
}

TEST(LoadDataset, QuotedFieldsAndCrLf) {
    const auto ds = read("rewire_id,text,label_sexist,label_category,label_vector\r\n"
                         "x1,\"line one\nline \"\"two\"\"\",sexist,3. animosity,3.3 backhanded gendered compliments\r\n",
                         Level::C);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].text, "line one\nline \"two\"");
    EXPECT_EQ(*ds[0].label_c, (VectorLabel{3, 3}));
}

TEST(LoadDataset, Errors) {
    const std::string header = "rewire_id,text,label_sexist,label_category,label_vector\n";
    EXPECT_EQ(kind_of([&] { read(header + "a,b,sexist\n", Level::A); }), ErrorKind::MalformedRow);
    EXPECT_EQ(kind_of([&] { read(header + "a,t,sexist,2. derogation,none\na,u,not sexist,none,none\n", Level::A); }),
              ErrorKind::DuplicateId);
    EXPECT_EQ(kind_of([&] { read(header + "a,t,sexist,5. nonsense,none\n", Level::A); }), ErrorKind::UnknownLabel);
    EXPECT_EQ(kind_of([&] { read(header + "a,t,not sexist,2. derogation,none\n", Level::A); }),
              ErrorKind::InconsistentLabels);
    EXPECT_EQ(kind_of([&] { read(header + "a,t,sexist,2. derogation,3.1 casual use\n", Level::A); }),
              ErrorKind::InconsistentLabels);
    EXPECT_EQ(kind_of([&] { read("rewire_id,text,label_sexist\na,t,sexist\n", Level::B); }), ErrorKind::MissingColumn);
    EXPECT_EQ(kind_of([&] { read("id,text\n", std::nullopt); }), ErrorKind::MissingColumn);
    EXPECT_EQ(kind_of([&] { read("", Level::A); }), ErrorKind::MalformedRow);
}

TEST(LoadDataset, UnlabelledInput) {
    const auto ds = read("rewire_id,text\nq1,hello there\nq2,second\n", std::nullopt);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_FALSE(ds[0].label_a);
}

TEST(ClassWeights, TaskACounts) {
    const auto w = class_weights({14000, 2, {10602, 3398}});
    EXPECT_NEAR(w[0], 0.6602527824938691, 1e-12);
    EXPECT_NEAR(w[1], 2.0600353148911124, 1e-12);
}

TEST(ClassWeights, SmallAndBalanced) {
    const auto w = class_weights({4, 2, {3, 1}});
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(w[1], 2.0);
    for (double v : class_weights({12, 4, {3, 3, 3, 3}})) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_EQ(kind_of([] { class_weights({3, 2, {3, 0}}); }), ErrorKind::EmptyClass);
}

TEST(ClassWeights, NormalisationIdentity) {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + gen() % 10;
        DatasetStats stats{0, k, {}};
        for (std::size_t c = 0; c < k; ++c) {
            stats.counts.push_back(1 + gen() % 5000);
            stats.n_samples += stats.counts.back();
        }
        const auto w = class_weights(stats);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += w[c] * static_cast<double>(stats.counts[c]);
        EXPECT_NEAR(sum / static_cast<double>(stats.n_samples), 1.0, 1e-9);
    }
}

TEST(StratifiedSplit, ExactApportionment) {
    const auto ds = task_a_dataset(75, 25);
    auto [train, validation] = stratified_split(ds, {0.8, 42, true});
    EXPECT_EQ(compute_stats(train).counts, (std::vector<std::size_t>{60, 20}));
    EXPECT_EQ(compute_stats(validation).counts, (std::vector<std::size_t>{15, 5}));
}

TEST(StratifiedSplit, FullSizedTaskASet) {
    const auto ds = task_a_dataset(10602, 3398);
    auto [train, validation] = stratified_split(ds, {0.8, 42, true});
    EXPECT_NEAR(static_cast<double>(train.size()), 11200.0, 2.0);
    EXPECT_EQ(train.size() + validation.size(), 14000u);
}

TEST(StratifiedSplit, SeedDeterminesMembership) {
    const auto ds = task_a_dataset(60, 40);
    auto ids = [](const Dataset& d) {
        std::vector<std::string> out;
        for (const auto& ex : d.examples()) out.push_back(ex.id);
        return out;
    };
    const auto first = stratified_split(ds, {0.8, 42, true});
    const auto again = stratified_split(ds, {0.8, 42, true});
    const auto other = stratified_split(ds, {0.8, 43, true});
    EXPECT_EQ(ids(first.first), ids(again.first));
    EXPECT_NE(ids(first.first), ids(other.first));
}

TEST(StratifiedSplit, DisjointCoverOnRandomDatasets) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> counts;
        for (int c = 0; c < 4; ++c) counts.push_back(2 + gen() % 40);
        const auto ds = task_b_dataset(counts, gen);
        const double fraction = 0.05 + 0.9 * std::uniform_real_distribution<double>()(gen);
        const auto idx = stratified_split_indices(ds, {fraction, gen(), true});
        std::set<std::size_t> all(idx.train.begin(), idx.train.end());
        for (auto v : idx.validation) EXPECT_TRUE(all.insert(v).second);
        EXPECT_EQ(all.size(), ds.size());
    }
}

TEST(StratifiedSplit, Errors) {
    EXPECT_EQ(kind_of([] { stratified_split(task_a_dataset(10, 1), {0.8, 1, true}); }), ErrorKind::TooFewExamples);
    EXPECT_EQ(kind_of([] { stratified_split(task_a_dataset(10, 10), {1.0, 1, true}); }), ErrorKind::InvalidArgument);
    // Unstratified splitting has no per-class requirement.
    auto [train, validation] = stratified_split(task_a_dataset(10, 1), {0.8, 1, false});
    EXPECT_EQ(train.size(), 9u);
    EXPECT_EQ(validation.size(), 2u);
}

TEST(StratifiedKFold, SmallExample) {
    const auto ds = task_a_dataset(6, 4);
    const auto folds = stratified_kfold(ds, 5, 42);
    std::vector<std::size_t> sizes(5), a(5), b(5);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        ++sizes[folds.fold_of[i]];
        ++(ds.class_of(i) == 0 ? a : b)[folds.fold_of[i]];
    }
    EXPECT_EQ(sizes, (std::vector<std::size_t>(5, 2)));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, (std::vector<std::size_t>{1, 1, 1, 1, 2}));
    EXPECT_EQ(b, (std::vector<std::size_t>{0, 1, 1, 1, 1}));
}

TEST(StratifiedKFold, LeaveOneOut) {
    const auto ds = task_a_dataset(4, 3);
    const auto folds = stratified_kfold(ds, ds.size(), 9);
    for (std::size_t f = 0; f < ds.size(); ++f) EXPECT_EQ(folds.members(f).size(), 1u);
}

TEST(StratifiedKFold, SexistSubsetOf3398) {
    std::mt19937_64 gen(3);
    const auto ds = task_b_dataset({400, 1500, 900, 598}, gen);
    ASSERT_EQ(ds.size(), 3398u);
    const auto folds = stratified_kfold(ds, 5, 42);
    for (std::size_t f = 0; f < 5; ++f) {
        const auto n = folds.members(f).size();
        EXPECT_TRUE(n == 679 || n == 680) << n;
    }
}

TEST(StratifiedKFold, InvalidK) {
    const auto ds = task_a_dataset(3, 2);
    EXPECT_EQ(kind_of([&] { stratified_kfold(ds, 1, 0); }), ErrorKind::InvalidK);
    EXPECT_EQ(kind_of([&] { stratified_kfold(ds, 6, 0); }), ErrorKind::InvalidK);
}

TEST(StratifiedKFold, BalancedOnRandomDatasets) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::size_t> counts;
        for (int c = 0; c < 4; ++c) counts.push_back(gen() % 30);
        if (counts[0] + counts[1] + counts[2] + counts[3] < 10) counts[0] += 10;
        const auto ds = task_b_dataset(counts, gen);
        const std::size_t k = 2 + gen() % 8;
        const auto folds = stratified_kfold(ds, k, gen());
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> per;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            ASSERT_LT(folds.fold_of[i], k);
            ++per[{ds.class_of(i), folds.fold_of[i]}];
        }
        for (std::size_t c = 0; c < 4; ++c) {
            std::size_t lo = SIZE_MAX, hi = 0;
            for (std::size_t f = 0; f < k; ++f) {
                lo = std::min(lo, per[{c, f}]);
                hi = std::max(hi, per[{c, f}]);
            }
            EXPECT_LE(hi - lo, 1u);
        }
    }
}
