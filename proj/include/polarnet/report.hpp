#pragma once

// Tabular report output as CSV or JSON, written atomically.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"

namespace polarnet::report {

/// Empty cells (monostate) mark undefined values.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

inline Cell cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }
inline Cell cell(double v) { return Cell{v}; }
inline Cell cell(std::size_t v) { return Cell{static_cast<std::int64_t>(v)}; }
inline Cell cell(std::int64_t v) { return Cell{v}; }
inline Cell cell(std::string v) { return Cell{std::move(v)}; }
inline Cell cell(const char* v) { return Cell{std::string(v)}; }
inline Cell cell(bool v) { return Cell{v}; }

struct Table {
    std::string name;  ///< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size())
            throw ConsistencyError("row width " + std::to_string(row.size()) + " does not match table '" + name + "'");
        rows.push_back(std::move(row));
    }
};

enum class Format { Csv, Json };

inline Format parse_format(std::string_view s) {
    if (s == "csv") return Format::Csv;
    if (s == "json") return Format::Json;
    throw ValidationError("unknown output format '" + std::string(s) + "' (expected csv or json)");
}

inline const char* extension(Format f) { return f == Format::Csv ? ".csv" : ".json"; }

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v) {
    if (!std::isfinite(v)) throw ConsistencyError("non-finite value in report");
    if (v == 0.0) v = 0.0;  // no negative zero
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string to_text(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double d) const { return format_number(d); }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
    };
    return std::visit(Visitor{}, c);
}

inline void write_csv(std::ostream& out, const Table& t) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << csv::quote(t.columns[c]);
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv::quote(to_text(row[c]));
        out << '\n';
    }
}

/// An array of objects; keys keep column order.
inline void write_json(std::ostream& out, const Table& t) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t c = 0; c < row.size(); ++c) {
            const auto& v = row[c];
            if (std::holds_alternative<std::monostate>(v)) obj[t.columns[c]] = nullptr;
            else if (auto* s = std::get_if<std::string>(&v)) obj[t.columns[c]] = *s;
            else if (auto* d = std::get_if<double>(&v)) {
                if (!std::isfinite(*d)) throw ConsistencyError("non-finite value in report");
                obj[t.columns[c]] = *d == 0.0 ? 0.0 : *d;
            } else if (auto* i = std::get_if<std::int64_t>(&v)) obj[t.columns[c]] = *i;
            else obj[t.columns[c]] = std::get<bool>(v);
        }
        arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << '\n';
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ValidationError("cannot move report into place at '" + path.string() + "'");
    }
}

/// Writes the table as <dir>/<name>.<ext> and returns the path.
inline std::filesystem::path write_table(const std::filesystem::path& dir, const Table& t, Format f) {
    std::ostringstream buf;
    if (f == Format::Csv) write_csv(buf, t);
    else write_json(buf, t);
    const auto path = dir / (t.name + extension(f));
    write_atomic(path, buf.str());
    return path;
}

}  // namespace polarnet::report
