#include <gtest/gtest.h>

#include "hiertext/taxonomy.hpp"

using namespace hiertext;

TEST(Taxonomy, LevelSizes) {
    EXPECT_EQ(class_count(Level::A), 2u);
    EXPECT_EQ(class_count(Level::B), 4u);
    EXPECT_EQ(class_count(Level::C), 11u);

    std::vector<std::size_t> per_category;
    std::size_t total = 0;
    for (int id = 1; id <= 4; ++id) {
        per_category.push_back(children_of(CategoryLabel{id}).size());
        total += per_category.back();
    }
    EXPECT_EQ(per_category, (std::vector<std::size_t>{2, 3, 4, 2}));
    EXPECT_EQ(total, 11u);
}

TEST(Taxonomy, ParsesTableFormats) {
    EXPECT_EQ(std::get<TaskALabel>(parse_label("not sexist", Level::A)), TaskALabel::not_sexist);
    EXPECT_EQ(std::get<TaskALabel>(parse_label("Sexist", Level::A)), TaskALabel::sexist);
    EXPECT_EQ(std::get<CategoryLabel>(parse_label("2. derogation", Level::B)), CategoryLabel{2});
    EXPECT_EQ(std::get<CategoryLabel>(parse_label("2.derogation", Level::B)), CategoryLabel{2});
    EXPECT_EQ(std::get<CategoryLabel>(parse_label("1.threats,plans to harm and incitement", Level::B)),
              CategoryLabel{1});
    EXPECT_EQ(std::get<CategoryLabel>(parse_label("  ANIMOSITY ", Level::B)), CategoryLabel{3});
    EXPECT_EQ(std::get<CategoryLabel>(parse_label("threats", Level::B)), CategoryLabel{1});
    EXPECT_EQ(std::get<VectorLabel>(parse_label("3.2 immutable gender differences and gender stereotypes", Level::C)),
              (VectorLabel{3, 2}));
    EXPECT_EQ(std::get<VectorLabel>(parse_label("dehumanising attacks & overt sexual objectification", Level::C)),
              (VectorLabel{2, 3}));
    EXPECT_EQ(std::get<VectorLabel>(parse_label("4.2", Level::C)), (VectorLabel{4, 2}));
}

TEST(Taxonomy, RejectsUnknownLabels) {
    for (auto [raw, level] : std::vector<std::pair<std::string, Level>>{
             {"5. nonsense", Level::B}, {"maybe", Level::A}, {"2.1 descriptive attacks", Level::B},
             {"2. derogation", Level::C}, {"3.7 something", Level::C}, {"", Level::A}, {"derogatory", Level::B}}) {
        try {
            parse_label(raw, level);
            FAIL() << "accepted '" << raw << "'";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::UnknownLabel);
        }
    }
}

TEST(Taxonomy, RenderRoundTripsEveryLabel) {
    for (Level level : {Level::A, Level::B, Level::C}) {
        for (std::size_t i = 0; i < class_count(level); ++i) {
            const auto label = label_at(level, i);
            EXPECT_EQ(parse_label(render(label), level), label) << render(label);
            EXPECT_EQ(parse_label(label_key(label), level), label) << label_key(label);
            EXPECT_EQ(class_index(label), i);
        }
    }
}

TEST(Taxonomy, ParentOf) {
    EXPECT_EQ(parent_of(VectorLabel{2, 1}), CategoryLabel{2});
    EXPECT_EQ(parent_of(VectorLabel{4, 2}), CategoryLabel{4});
    EXPECT_EQ(parent_of(CategoryLabel{3}), TaskALabel::sexist);
    for (std::size_t i = 0; i < class_count(Level::C); ++i) {
        const auto v = std::get<VectorLabel>(label_at(Level::C, i));
        EXPECT_EQ(parent_of(parent_of(v)), TaskALabel::sexist);
    }
}

TEST(Taxonomy, ConsistencyVerdicts) {
    EXPECT_TRUE(check_consistency(TaskALabel::sexist, CategoryLabel{2}, VectorLabel{2, 1}).consistent());
    EXPECT_TRUE(check_consistency(TaskALabel::not_sexist, std::nullopt, std::nullopt).consistent());
    EXPECT_TRUE(check_consistency(TaskALabel::sexist, std::nullopt, std::nullopt).consistent());
    EXPECT_EQ(check_consistency(TaskALabel::sexist, CategoryLabel{2}, VectorLabel{3, 1}).violated,
              ConsistencyRule::parent_mismatch);
    EXPECT_EQ(check_consistency(TaskALabel::not_sexist, CategoryLabel{1}, std::nullopt).violated,
              ConsistencyRule::not_sexist_has_category);
    EXPECT_EQ(check_consistency(TaskALabel::not_sexist, std::nullopt, VectorLabel{1, 1}).violated,
              ConsistencyRule::not_sexist_has_vector);
    EXPECT_EQ(check_consistency(TaskALabel::sexist, std::nullopt, VectorLabel{1, 1}).violated,
              ConsistencyRule::parent_mismatch);
}
