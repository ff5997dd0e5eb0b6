/// @file trace.hpp
/// @brief One recorded sample of a coupled run and its CSV serialization.
///
/// The CSV has a mandatory header row, one row per sample, LF line endings, and every
/// value written with 17 significant digits so that parsing reproduces the doubles exactly.

#pragma once

#include "ivobs/errors.hpp"
#include "ivobs/model.hpp"
#include "ivobs/observer.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace ivobs {

struct TraceRow {
    double t_days = 0.0;
    double S_h = 0.0, I_h = 0.0, I_v = 0.0;
    double S_h_lo = 0.0, S_h_hi = 0.0, I_h_lo = 0.0, I_h_hi = 0.0, I_v_lo = 0.0, I_v_hi = 0.0;
    double y = 0.0;
    double k_S_lo = 0.0, k_S_hi = 0.0, k_v_lo = 0.0, k_v_hi = 0.0;
    double xi1 = 0.0, xi2 = 0.0;
    double delta1 = 0.0, delta2 = 0.0;
    double F1 = 0.0, F2 = 0.0;
    double V1 = 0.0, V2 = 0.0;
    double bound1 = 0.0, bound2 = 0.0;

    bool operator==(const TraceRow&) const = default;

    HostVectorState truth() const noexcept { return {S_h, I_h, I_v}; }
    ObserverPairState observers() const noexcept { return {{S_h_lo, I_h_hi, I_v_hi}, {S_h_hi, I_h_lo, I_v_lo}}; }
    GainValues gains() const noexcept { return {k_S_lo, k_v_hi, k_S_hi, k_v_lo}; }
};

inline constexpr std::array<std::pair<std::string_view, double TraceRow::*>, 25> kTraceColumns{{
    {"t_days", &TraceRow::t_days}, {"S_h", &TraceRow::S_h},       {"I_h", &TraceRow::I_h},
    {"I_v", &TraceRow::I_v},       {"S_h_lo", &TraceRow::S_h_lo}, {"S_h_hi", &TraceRow::S_h_hi},
    {"I_h_lo", &TraceRow::I_h_lo}, {"I_h_hi", &TraceRow::I_h_hi}, {"I_v_lo", &TraceRow::I_v_lo},
    {"I_v_hi", &TraceRow::I_v_hi}, {"y", &TraceRow::y},           {"k_S_lo", &TraceRow::k_S_lo},
    {"k_S_hi", &TraceRow::k_S_hi}, {"k_v_lo", &TraceRow::k_v_lo}, {"k_v_hi", &TraceRow::k_v_hi},
    {"xi1", &TraceRow::xi1},       {"xi2", &TraceRow::xi2},       {"delta1", &TraceRow::delta1},
    {"delta2", &TraceRow::delta2}, {"F1", &TraceRow::F1},         {"F2", &TraceRow::F2},
    {"V1", &TraceRow::V1},         {"V2", &TraceRow::V2},         {"bound1", &TraceRow::bound1},
    {"bound2", &TraceRow::bound2},
}};

inline std::string trace_csv_header()
{
    std::string header;
    for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
        if (i > 0) {
            header += ',';
        }
        header += kTraceColumns[i].first;
    }
    return header;
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows)
{
    out << trace_csv_header() << '\n';
    std::array<char, 64> buf{};
    std::string line;
    for (const auto& row : rows) {
        line.clear();
        for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
            if (i > 0) {
                line += ',';
            }
            const auto [end, ec] =
                std::to_chars(buf.data(), buf.data() + buf.size(), row.*kTraceColumns[i].second,
                              std::chars_format::general, 17);
            if (ec != std::errc{}) {
                throw Error("write_trace_csv: failed to format a value");
            }
            line.append(buf.data(), end);
        }
        out << line << '\n';
    }
}

inline std::vector<TraceRow> read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInput("read_trace_csv: missing header row");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != trace_csv_header()) {
        throw InvalidInput("read_trace_csv: unexpected header '" + line + "'");
    }
    std::vector<TraceRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        TraceRow row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
            if (i > 0) {
                if (p == end || *p != ',') {
                    throw InvalidInput("read_trace_csv: line " + std::to_string(line_no) + " has too few columns");
                }
                ++p;
            }
            double value = 0.0;
            const auto [next, ec] = std::from_chars(p, end, value);
            if (ec != std::errc{}) {
                throw InvalidInput("read_trace_csv: line " + std::to_string(line_no) + ", column '"
                                   + std::string(kTraceColumns[i].first) + "' is not a number");
            }
            row.*kTraceColumns[i].second = value;
            p = next;
        }
        if (p != end) {
            throw InvalidInput("read_trace_csv: line " + std::to_string(line_no) + " has too many columns");
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace ivobs
