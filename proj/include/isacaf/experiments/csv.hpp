// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Column-oriented CSV tables with locale-independent number formatting.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "isacaf/core.hpp"

namespace isacaf::experiments {

/// "%.10g", with nan/inf spelled out the same way on every platform.
inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

class CsvTable {
public:
    using Cell = std::variant<double, std::string>;

    explicit CsvTable(std::vector<std::string> header = {}) : header_(std::move(header)) {}

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    std::size_t columns() const { return header_.size(); }

    void add_row(std::vector<Cell> row)
    {
        if (row.size() != header_.size())
            throw DimensionError("csv: row has " + std::to_string(row.size()) + " cells, header has " +
                                 std::to_string(header_.size()));
        rows_.push_back(std::move(row));
    }

    /// Index of a named column, or throws.
    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return i;
        throw ConfigError("csv: no column '" + name + "'");
    }

    /// Numeric column values (string cells become nan).
    RVec numbers(std::size_t col) const
    {
        RVec v;
        v.reserve(rows_.size());
        for (const auto& r : rows_) v.push_back(std::holds_alternative<double>(r[col]) ? std::get<double>(r[col]) : NAN);
        return v;
    }

    std::string str() const
    {
        std::string out;
        append_line(out, header_);
        std::vector<std::string> cells;
        for (const auto& r : rows_) {
            cells.clear();
            for (const auto& c : r)
                cells.push_back(std::holds_alternative<double>(c) ? format_number(std::get<double>(c)) : std::get<std::string>(c));
            append_line(out, cells);
        }
        return out;
    }

    void write(const std::string& path) const
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("csv: cannot write '" + path + "'");
        f << str();
    }

private:
    static std::string quote(const std::string& s)
    {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }
    static void append_line(std::string& out, const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += quote(cells[i]);
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

} // namespace isacaf::experiments
