#pragma once

// Minimal RFC 4180 reader/writer: comma delimiter, double-quote quoting,
// doubled quotes as escapes, CRLF or LF record terminators, quoted fields
// may span lines.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "hiertext/error.hpp"

namespace hiertext::csv {

using Row = std::vector<std::string>;

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. `line()` afterwards is the
    /// 1-based physical line where the record started.
    std::optional<Row> next() {
        Row row;
        std::string field;
        bool in_quotes = false;
        bool any = false;
        bool was_quoted = false;
        record_line_ = line_ + 1;

        int ch;
        while ((ch = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char c = static_cast<char>(ch);
            if (in_quotes) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                }
                continue;
            }
            if (c == '"') {
                if (!field.empty() || was_quoted)
                    throw Error(ErrorKind::MalformedRow, "line " + std::to_string(record_line_) + ": stray quote");
                in_quotes = true;
                was_quoted = true;
            } else if (c == ',') {
                row.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (c == '\r' && in_.peek() == '\n') {
                // swallowed; the '\n' terminates the record
            } else if (c == '\n') {
                ++line_;
                row.push_back(std::move(field));
                return row;
            } else {
                if (was_quoted)
                    throw Error(ErrorKind::MalformedRow,
                                "line " + std::to_string(record_line_) + ": text after closing quote");
                field.push_back(c);
            }
        }
        if (in_quotes) throw Error(ErrorKind::MalformedRow, "line " + std::to_string(record_line_) + ": unterminated quote");
        if (!any) return std::nullopt;
        ++line_;
        row.push_back(std::move(field));
        return row;
    }

    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

inline void write_field(std::ostream& out, std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

inline void write_row(std::ostream& out, const Row& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        write_field(out, row[i]);
    }
    out << '\n';
}

/// Column positions by header name.
class Header {
public:
    Header() = default;
    explicit Header(Row names) : names_(std::move(names)) {
        // Tolerate a UTF-8 byte-order mark on the first column.
        if (!names_.empty() && names_[0].starts_with("\xEF\xBB\xBF")) names_[0].erase(0, 3);
    }

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return i;
        return std::nullopt;
    }

    std::size_t require(std::string_view name) const {
        if (auto i = find(name)) return *i;
        throw Error(ErrorKind::MissingColumn, "required column '" + std::string(name) + "' not in header");
    }

    std::size_t size() const noexcept { return names_.size(); }
    const Row& names() const noexcept { return names_; }

private:
    Row names_;
};

} // namespace hiertext::csv
