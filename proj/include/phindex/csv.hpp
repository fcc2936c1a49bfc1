#pragma once

// Minimal RFC-4180 style CSV support: quoted fields, embedded commas, quotes
// and newlines, LF or CRLF endings. The reader tracks physical line numbers
// so loaders can say where a bad row came from.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace phindex::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0;  // physical line the row starts on, 1-based
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Next record, or nullopt at end of input. Quoted fields may span lines.
    std::optional<Row> next() {
        if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
        Row row;
        row.line = line_ + 1;
        std::string field;
        bool quoted = false;
        while (true) {
            const int ch = in_.get();
            if (ch == std::char_traits<char>::eof()) {
                if (quoted)
                    throw DataError("unterminated quoted field starting at line " +
                                    std::to_string(row.line));
                ++line_;
                break;
            }
            if (quoted) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        field.push_back('"');
                        in_.get();
                    } else {
                        quoted = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(char(ch));
                }
                continue;
            }
            if (ch == ',') {
                row.fields.push_back(std::move(field));
                field.clear();
            } else if (ch == '"' && field.empty()) {
                quoted = true;
            } else if (ch == '\r' && in_.peek() == '\n') {
                in_.get();
                ++line_;
                break;
            } else if (ch == '\n') {
                ++line_;
                break;
            } else {
                field.push_back(char(ch));
            }
        }
        row.fields.push_back(std::move(field));
        if (first_) {
            first_ = false;
            auto& head = row.fields.front();
            if (head.size() >= 3 && head[0] == '\xEF' && head[1] == '\xBB' && head[2] == '\xBF')
                head.erase(0, 3);  // UTF-8 BOM
        }
        return row;
    }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    bool first_ = true;
};

inline bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline void write_field(std::ostream& out, std::string_view s) {
    if (!needs_quotes(s)) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

inline void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        write_field(out, fields[i]);
    }
    out << '\n';
}

inline void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
    bool sep = false;
    for (auto f : fields) {
        if (sep) out << ',';
        write_field(out, f);
        sep = true;
    }
    out << '\n';
}

}  // namespace phindex::csv
