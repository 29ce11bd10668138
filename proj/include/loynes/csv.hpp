#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "loynes/errors.hpp"

namespace loynes {

// Locale-free rendering of a double with 17 significant digits, enough to
// round-trip the value exactly through text. +infinity serializes as the
// literal `inf`.
inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// Strict locale-free parse of a full token. Returns false on any trailing
// garbage or empty input.
inline bool parse_real(std::string_view token, double &out) {
    if (token.empty()) return false;
    if (token == "inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (token == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    const char *first = token.data();
    const char *last = token.data() + token.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

using CsvValue = std::variant<double, std::int64_t, std::uint64_t, std::string>;

// A column-typed table plus `#` metadata comments, the one output shape every
// subcommand emits. Rows are rendered with LF endings and no locale
// formatting so identical runs produce identical bytes.
struct CsvTable {
    std::vector<std::string> comments; // rendered as "# <line>"
    std::vector<std::string> header;
    std::vector<std::vector<CsvValue>> rows;
};

inline void write_csv(const CsvTable &table, std::ostream &os) {
    for (const auto &c : table.comments) os << "# " << c << "\n";
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) os << ",";
        os << table.header[i];
    }
    os << "\n";
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            std::visit(
                [&os](const auto &v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        os << format_real(v);
                    } else {
                        os << v;
                    }
                },
                row[i]);
        }
        os << "\n";
    }
}

inline std::string to_csv_string(const CsvTable &table) {
    std::ostringstream ss;
    write_csv(table, ss);
    return ss.str();
}

inline void write_csv(const CsvTable &table, const std::filesystem::path &path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open for writing: " + path.string());
    write_csv(table, f);
    f.flush();
    if (!f) throw io_error("write failed: " + path.string());
}

} // namespace loynes
