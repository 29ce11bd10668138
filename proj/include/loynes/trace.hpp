#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "loynes/csv.hpp"
#include "loynes/errors.hpp"

namespace loynes {

enum class TraceKind { increments, waits };

inline const char *to_string(TraceKind k) {
    return k == TraceKind::increments ? "increments" : "waits";
}

// A finite observed sequence: either raw increments X(1..n) or nonnegative
// waiting times W(1..n). `origin` records where it came from (a process spec
// echo or an external path); `seed` survives CSV round trips via a
// `# seed=<u64>` comment.
struct Trace {
    std::vector<double> values;
    TraceKind kind = TraceKind::increments;
    std::string origin;
    std::optional<std::uint64_t> seed;

    std::size_t size() const { return values.size(); }
};

// Trace CSV: optional `#` comments, optional `value` header, one real per
// line. Parse failures report the 1-based line number.
inline Trace load_trace(const std::filesystem::path &path,
                        TraceKind kind = TraceKind::increments) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open trace file: " + path.string());

    Trace trace;
    trace.kind = kind;
    trace.origin = "external:" + path.string();

    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string_view body(line);
            body.remove_prefix(1);
            while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
            if (body.rfind("seed=", 0) == 0) {
                std::uint64_t s = 0;
                auto tok = body.substr(5);
                auto res = std::from_chars(tok.data(), tok.data() + tok.size(), s);
                if (res.ec == std::errc{} && res.ptr == tok.data() + tok.size())
                    trace.seed = s;
            }
            continue;
        }
        if (header_allowed && line == "value") {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        double v = 0.0;
        if (!parse_real(line, v))
            throw format_error(path.string() + ":" + std::to_string(lineno) +
                               ": cannot parse value '" + line + "'");
        if (!std::isfinite(v))
            throw format_error(path.string() + ":" + std::to_string(lineno) +
                               ": trace values must be finite");
        trace.values.push_back(v);
    }
    if (trace.values.empty())
        throw empty_input_error("trace file has no values: " + path.string());
    if (kind == TraceKind::waits) {
        for (std::size_t i = 0; i < trace.values.size(); ++i)
            if (trace.values[i] < 0.0)
                throw format_error(path.string() + ": waiting-time trace has negative value at index " +
                                   std::to_string(i + 1));
    }
    return trace;
}

inline CsvTable trace_csv_table(const Trace &trace) {
    CsvTable table;
    if (trace.seed) table.comments.push_back("seed=" + std::to_string(*trace.seed));
    table.header = {"value"};
    table.rows.reserve(trace.values.size());
    for (double v : trace.values) table.rows.push_back({v});
    return table;
}

inline void save_trace(const Trace &trace, const std::filesystem::path &path) {
    write_csv(trace_csv_table(trace), path);
}

} // namespace loynes
