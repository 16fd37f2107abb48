#pragma once

// Minimal RFC 4180 reader/writer. Quoted fields may contain separators,
// doubled quotes and line breaks.

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace polarnet::csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0;  // line on which the record starts
};

class Reader {
public:
    Reader(std::istream& in, std::string source_name, char delimiter = ',')
        : in_(in), source_(std::move(source_name)), delim_(delimiter) {}

    /// Reads the next record. Blank lines are skipped.
    bool next(Row& row) {
        row.fields.clear();
        std::string field;
        bool in_quotes = false;
        bool field_was_quoted = false;
        bool any = false;
        int c;
        row.line = line_;
        while ((c = in_.get()) != std::char_traits<char>::eof()) {
            any = true;
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    if (ch == '\n') ++line_;
                    field.push_back(ch);
                }
                continue;
            }
            if (ch == '"') {
                if (!field.empty() || field_was_quoted)
                    throw ParseError(source_, line_, "unexpected quote inside field");
                in_quotes = true;
                field_was_quoted = true;
            } else if (ch == delim_) {
                row.fields.push_back(std::move(field));
                field.clear();
                field_was_quoted = false;
            } else if (ch == '\r') {
                // tolerated before \n
            } else if (ch == '\n') {
                ++line_;
                if (row.fields.empty() && field.empty() && !field_was_quoted) {
                    row.line = line_;
                    continue;  // blank line
                }
                row.fields.push_back(std::move(field));
                return true;
            } else {
                if (field_was_quoted)
                    throw ParseError(source_, line_, "characters after closing quote");
                field.push_back(ch);
            }
        }
        if (in_quotes) throw ParseError(source_, row.line, "unterminated quoted field");
        if (!any || (row.fields.empty() && field.empty() && !field_was_quoted)) return false;
        row.fields.push_back(std::move(field));
        ++line_;
        return true;
    }

    const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    char delim_;
    std::size_t line_ = 1;
};

inline std::string quote(std::string_view field, char delimiter = ',') {
    const bool needs = field.find_first_of(std::string{delimiter} + "\"\n\r") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace polarnet::csv
