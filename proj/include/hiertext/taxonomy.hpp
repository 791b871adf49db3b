#pragma once

// The fixed three-level label space: Task A (sexist / not sexist), four
// Task B categories and eleven Task C vectors, each vector owned by exactly
// one category.

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hiertext/error.hpp"

namespace hiertext {

enum class Level { A, B, C };

inline std::string_view to_string(Level level) {
    switch (level) {
    case Level::A: return "A";
    case Level::B: return "B";
    case Level::C: return "C";
    }
    return "?";
}

inline Level parse_level(std::string_view raw) {
    if (raw == "A" || raw == "a") return Level::A;
    if (raw == "B" || raw == "b") return Level::B;
    if (raw == "C" || raw == "c") return Level::C;
    throw Error(ErrorKind::InvalidArgument, "task level must be A, B or C, got '" + std::string(raw) + "'");
}

enum class TaskALabel { not_sexist, sexist };

struct CategoryLabel {
    int id; // 1..4
    friend bool operator==(CategoryLabel, CategoryLabel) = default;
};

struct VectorLabel {
    int category; // 1..4
    int sub;      // 1-based within the category
    friend bool operator==(VectorLabel, VectorLabel) = default;
};

using AnyLabel = std::variant<TaskALabel, CategoryLabel, VectorLabel>;

namespace detail {

struct CategoryInfo {
    int id;
    std::string_view key;
    std::string_view name;
};

struct VectorInfo {
    VectorLabel code;
    std::string_view key;
    std::string_view name;
};

inline constexpr std::array<CategoryInfo, 4> categories{{
    {1, "1", "threats, plans to harm and incitement"},
    {2, "2", "derogation"},
    {3, "3", "animosity"},
    {4, "4", "prejudiced discussions"},
}};

inline constexpr std::array<VectorInfo, 11> vectors{{
    {{1, 1}, "1.1", "threats of harm"},
    {{1, 2}, "1.2", "incitement and encouragement of harm"},
    {{2, 1}, "2.1", "descriptive attacks"},
    {{2, 2}, "2.2", "aggressive and emotive attacks"},
    {{2, 3}, "2.3", "dehumanising attacks and overt sexual objectification"},
    {{3, 1}, "3.1", "casual use of gendered slurs, profanities and insults"},
    {{3, 2}, "3.2", "immutable gender differences and gender stereotypes"},
    {{3, 3}, "3.3", "backhanded gendered compliments"},
    {{3, 4}, "3.4", "condescending explanations or unwelcome advice"},
    {{4, 1}, "4.1", "supporting mistreatment of individual women"},
    {{4, 2}, "4.2", "supporting systemic discrimination against women as a group"},
}};

// Trim, lowercase, '_' -> ' ', collapse whitespace.
inline std::string normalize_label(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char ch : raw) {
        auto c = static_cast<unsigned char>(ch);
        if (c == '_') c = ' ';
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

// Name comparison key: letters and digits only, '&' spelled out.
inline std::string name_key(std::string_view normalized) {
    std::string out;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        auto c = static_cast<unsigned char>(normalized[i]);
        if (c == '&') {
            out += "and";
        } else if (std::isalnum(c) || c >= 0x80) {
            out.push_back(static_cast<char>(c));
        }
    }
    return out;
}

struct NumericPrefix {
    std::vector<int> parts;
    std::string_view rest;
};

// "2. derogation" -> {2}, "derogation"; "3.2 immutable ..." -> {3,2}, "immutable ...".
inline std::optional<NumericPrefix> split_numeric_prefix(std::string_view s) {
    NumericPrefix out;
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        int value = 0;
        std::size_t digits = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            if (++digits > 3) return std::nullopt;
            value = value * 10 + (s[i] - '0');
            ++i;
        }
        out.parts.push_back(value);
        if (i < s.size() && s[i] == '.') {
            ++i;
            continue;
        }
        break;
    }
    if (out.parts.empty()) return std::nullopt;
    // The prefix must be followed by a separator or end of string.
    if (i < s.size() && s[i] != ' ' && !std::isalpha(static_cast<unsigned char>(s[i]))) return std::nullopt;
    while (i < s.size() && s[i] == ' ') ++i;
    out.rest = s.substr(i);
    return out;
}

[[noreturn]] inline void unknown_label(std::string_view raw, Level level) {
    throw Error(ErrorKind::UnknownLabel,
                "'" + std::string(raw) + "' is not a level " + std::string(to_string(level)) + " label");
}

} // namespace detail

inline std::size_t class_count(Level level) {
    switch (level) {
    case Level::A: return 2;
    case Level::B: return detail::categories.size();
    case Level::C: return detail::vectors.size();
    }
    return 0;
}

inline Level level_of(const AnyLabel& label) {
    if (std::holds_alternative<TaskALabel>(label)) return Level::A;
    if (std::holds_alternative<CategoryLabel>(label)) return Level::B;
    return Level::C;
}

inline bool is_valid(CategoryLabel c) { return c.id >= 1 && c.id <= 4; }

inline bool is_valid(VectorLabel v) {
    for (const auto& info : detail::vectors)
        if (info.code == v) return true;
    return false;
}

/// Position of a label within its level's class list.
inline std::size_t class_index(const AnyLabel& label) {
    if (auto a = std::get_if<TaskALabel>(&label)) return *a == TaskALabel::sexist ? 1 : 0;
    if (auto b = std::get_if<CategoryLabel>(&label)) {
        if (!is_valid(*b)) throw Error(ErrorKind::UnknownLabel, "category id " + std::to_string(b->id));
        return static_cast<std::size_t>(b->id - 1);
    }
    const auto v = std::get<VectorLabel>(label);
    for (std::size_t i = 0; i < detail::vectors.size(); ++i)
        if (detail::vectors[i].code == v) return i;
    throw Error(ErrorKind::UnknownLabel, "vector " + std::to_string(v.category) + "." + std::to_string(v.sub));
}

inline AnyLabel label_at(Level level, std::size_t index) {
    if (index >= class_count(level))
        throw Error(ErrorKind::UnknownLabel, "class index " + std::to_string(index) + " out of range for level " +
                                                 std::string(to_string(level)));
    switch (level) {
    case Level::A: return index == 0 ? TaskALabel::not_sexist : TaskALabel::sexist;
    case Level::B: return CategoryLabel{static_cast<int>(index) + 1};
    case Level::C: return detail::vectors[index].code;
    }
    return TaskALabel::not_sexist;
}

/// Short stable key: "not_sexist", "sexist", "2", "3.2". Used in
/// prediction-file column names.
inline std::string label_key(const AnyLabel& label) {
    if (auto a = std::get_if<TaskALabel>(&label)) return *a == TaskALabel::sexist ? "sexist" : "not_sexist";
    if (auto b = std::get_if<CategoryLabel>(&label)) return std::string(detail::categories.at(class_index(*b)).key);
    return std::string(detail::vectors.at(class_index(label)).key);
}

/// Canonical display string in the task's data format, e.g. "2. derogation".
inline std::string render(const AnyLabel& label) {
    if (auto a = std::get_if<TaskALabel>(&label)) return *a == TaskALabel::sexist ? "sexist" : "not sexist";
    if (std::holds_alternative<CategoryLabel>(label)) {
        const auto& info = detail::categories.at(class_index(label));
        return std::string(info.key) + ". " + std::string(info.name);
    }
    const auto& info = detail::vectors.at(class_index(label));
    return std::string(info.key) + " " + std::string(info.name);
}

/// Ordered class keys for a level; row order of every model and prediction
/// file at that level.
inline std::vector<std::string> class_keys(Level level) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < class_count(level); ++i) out.push_back(label_key(label_at(level, i)));
    return out;
}

/// Case-insensitive. Accepts the numeric prefix ("2. derogation",
/// "2.derogation", "3.2 immutable ...", bare "3.2"), the bare name, or the
/// short key. When a prefix is present it alone decides the label.
inline AnyLabel parse_label(std::string_view raw, Level level) {
    const std::string norm = detail::normalize_label(raw);
    if (norm.empty()) detail::unknown_label(raw, level);

    if (level == Level::A) {
        const auto key = detail::name_key(norm);
        if (key == "sexist") return TaskALabel::sexist;
        if (key == "notsexist" || key == "nonsexist") return TaskALabel::not_sexist;
        detail::unknown_label(raw, level);
    }

    if (auto prefix = detail::split_numeric_prefix(norm)) {
        if (level == Level::B && prefix->parts.size() == 1) {
            CategoryLabel c{prefix->parts[0]};
            if (is_valid(c)) return c;
        } else if (level == Level::C && prefix->parts.size() == 2) {
            VectorLabel v{prefix->parts[0], prefix->parts[1]};
            if (is_valid(v)) return v;
        }
        detail::unknown_label(raw, level);
    }

    const auto key = detail::name_key(norm);
    if (level == Level::B) {
        for (const auto& info : detail::categories)
            if (detail::name_key(info.name) == key) return CategoryLabel{info.id};
        if (key == "threats") return CategoryLabel{1};
    } else {
        for (const auto& info : detail::vectors)
            if (detail::name_key(info.name) == key) return info.code;
        // Common misspelling in circulation.
        if (key == detail::name_key("causal use of gendered slurs, profanities and insults")) return VectorLabel{3, 1};
    }
    detail::unknown_label(raw, level);
}

inline CategoryLabel parent_of(VectorLabel v) {
    if (!is_valid(v)) throw Error(ErrorKind::UnknownLabel, "not a taxonomy vector");
    return CategoryLabel{v.category};
}

inline TaskALabel parent_of(CategoryLabel c) {
    if (!is_valid(c)) throw Error(ErrorKind::UnknownLabel, "not a taxonomy category");
    return TaskALabel::sexist;
}

/// Vectors belonging to a category, in class-list order.
inline std::vector<VectorLabel> children_of(CategoryLabel c) {
    std::vector<VectorLabel> out;
    for (const auto& info : detail::vectors)
        if (info.code.category == c.id) out.push_back(info.code);
    return out;
}

enum class ConsistencyRule {
    none,
    not_sexist_has_category, // a = not_sexist but b present
    not_sexist_has_vector,   // a = not_sexist but c present
    parent_mismatch,         // c present and b != parent_of(c)
};

struct ConsistencyVerdict {
    ConsistencyRule violated = ConsistencyRule::none;
    bool consistent() const noexcept { return violated == ConsistencyRule::none; }
};

inline std::string_view to_string(ConsistencyRule rule) {
    switch (rule) {
    case ConsistencyRule::none: return "consistent";
    case ConsistencyRule::not_sexist_has_category: return "not_sexist post carries a category";
    case ConsistencyRule::not_sexist_has_vector: return "not_sexist post carries a vector";
    case ConsistencyRule::parent_mismatch: return "vector's parent differs from category";
    }
    return "?";
}

inline ConsistencyVerdict check_consistency(TaskALabel a, std::optional<CategoryLabel> b,
                                            std::optional<VectorLabel> c) {
    if (a == TaskALabel::not_sexist) {
        if (b) return {ConsistencyRule::not_sexist_has_category};
        if (c) return {ConsistencyRule::not_sexist_has_vector};
    }
    if (c && (!b || parent_of(*c) != *b)) return {ConsistencyRule::parent_mismatch};
    return {};
}

} // namespace hiertext
