#include "ksumforge/report.hpp"

#include <charconv>
#include <sstream>
#include <stdexcept>

namespace ksumforge {

namespace {

void put(std::string& out, const std::optional<std::uint64_t>& v) {
    out += ',';
    if (v) out += std::to_string(*v);
}

void put(std::string& out, const std::optional<double>& v) {
    out += ',';
    if (v) out += format_number(*v);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::optional<std::uint64_t> read_uint(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("report: bad integer '" + s + "'");
    return v;
}

std::optional<double> read_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("report: bad number '" + s + "'");
    return v;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("report: number formatting failed");
    return std::string(buf, ptr);
}

std::string csv_line(const ReportRow& row) {
    if (row.experiment.find_first_of(",\n\"") != std::string::npos)
        throw std::invalid_argument("report: experiment id must not contain commas, quotes or newlines");
    std::string out = row.experiment;
    put(out, row.k);
    put(out, row.size_param);
    put(out, row.m_or_p);
    put(out, row.q);
    put(out, row.t);
    put(out, row.r);
    put(out, row.trials);
    put(out, row.successes);
    put(out, row.estimate);
    put(out, row.ci_lo);
    put(out, row.ci_hi);
    put(out, row.paper_bound);
    put(out, row.oracle_calls);
    put(out, row.wall_ms);
    out += ',';
    out += std::to_string(row.seed);
    return out;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << kReportVersionLine << '\n' << kReportColumns << '\n';
    for (const auto& row : rows) out << csv_line(row) << '\n';
}

std::string report_string(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    write_report(out, rows);
    return out.str();
}

std::vector<ReportRow> parse_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kReportVersionLine) throw std::runtime_error("report: missing version line");
    if (!std::getline(in, line) || line != kReportColumns) throw std::runtime_error("report: unexpected column header");
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        const auto f = split_fields(line);
        if (f.size() != 16) throw std::runtime_error("report: expected 16 fields");
        ReportRow row;
        row.experiment = f[0];
        row.k = read_uint(f[1]);
        row.size_param = read_uint(f[2]);
        row.m_or_p = read_uint(f[3]);
        row.q = read_uint(f[4]);
        row.t = read_uint(f[5]);
        row.r = read_uint(f[6]);
        row.trials = read_uint(f[7]);
        row.successes = read_uint(f[8]);
        row.estimate = read_double(f[9]);
        row.ci_lo = read_double(f[10]);
        row.ci_hi = read_double(f[11]);
        row.paper_bound = read_double(f[12]);
        row.oracle_calls = read_uint(f[13]);
        row.wall_ms = read_double(f[14]);
        const auto seed = read_uint(f[15]);
        if (!seed) throw std::runtime_error("report: seed is mandatory");
        row.seed = *seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ksumforge
