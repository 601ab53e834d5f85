#pragma once

// Plot-ready CSV reports: one row per parameter point.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ksumforge {

inline constexpr const char* kReportVersionLine = "# ksum-forge-report v1";
inline constexpr const char* kReportColumns =
    "experiment,k,size_param,m_or_p,q,t,r,trials,successes,estimate,ci_lo,ci_hi,paper_bound,oracle_calls,wall_ms,seed";

/// Unset fields print as empty cells.
struct ReportRow {
    std::string experiment;
    std::optional<std::uint64_t> k;
    std::optional<std::uint64_t> size_param;  // n, N or L
    std::optional<std::uint64_t> m_or_p;
    std::optional<std::uint64_t> q;
    std::optional<std::uint64_t> t;
    std::optional<std::uint64_t> r;
    std::optional<std::uint64_t> trials;
    std::optional<std::uint64_t> successes;
    std::optional<double> estimate;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::optional<double> paper_bound;
    std::optional<std::uint64_t> oracle_calls;
    std::optional<double> wall_ms;
    std::uint64_t seed = 0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Shortest round-tripping decimal ("%.17g" trimmed), locale independent.
std::string format_number(double v);

std::string csv_line(const ReportRow& row);
void write_report(std::ostream& out, const std::vector<ReportRow>& rows);
std::string report_string(const std::vector<ReportRow>& rows);

/// Inverse of report_string; throws std::runtime_error on malformed input.
std::vector<ReportRow> parse_report(const std::string& text);

}  // namespace ksumforge
