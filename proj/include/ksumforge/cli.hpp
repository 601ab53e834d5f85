#pragma once

// Experiment orchestration behind the ksumforge executable.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ksumforge/report.hpp"

namespace ksumforge {

struct ExperimentConfig {
    std::string subcommand = "solve";  // gen|solve|reduce|collide|fourier|count-quadruples

    std::string problem = "kxor";  // kxor|ksum|kmsum
    std::uint64_t k = 3;
    std::uint64_t n = 16;           // XOR width
    std::uint64_t bound = 65536;    // SUM magnitude N
    std::uint64_t modulus = 65521;  // MSUM modulus L
    std::uint64_t r = 64;
    std::uint64_t m = 10;      // XOR target width (reduce, collide)
    std::uint64_t p = 0;       // arithmetic primes (reduce msum, collide pqr, fourier)
    std::uint64_t q = 0;
    std::uint64_t target_modulus = 0;  // M for sum-to-msum and sum-pipeline

    std::string algorithm = "ktree";  // solver for solve, and oracle for reduce
    std::string oracle = "lexmin";    // collide adversary: lexmin or an algorithm name
    std::string reduction = "xor";    // xor|xor-pipeline|msum|sum-to-msum|sum-pipeline|pad
    std::string pqr_mode = "definition";
    std::string quad_mode = "product";
    std::uint64_t q_min = 16;
    std::uint64_t q_max = 1024;
    std::uint64_t quad_n = 0;  // zero: q times the least prime above q

    std::uint64_t iterations = 0;  // zero: the reduction's default
    double beta = 0;               // zero: pilot estimate
    std::uint64_t call_cap = 0;
    std::uint64_t max_attempts = 0;
    bool run_all = false;
    std::uint64_t pad_factor = 0;
    double c = 0.25;
    bool prescreen = false;
    std::uint64_t enumeration_cap = 100'000'000;
    std::uint64_t table_cap = 1ULL << 26;
    std::uint64_t list_cap = 1ULL << 24;

    std::uint64_t seed = 1;
    std::uint64_t trials = 1;
    unsigned threads = 0;  // zero: KSUMFORGE_THREADS, then the hardware
    bool timing = false;   // fill wall_ms (breaks byte-identical reports)

    std::string in;
    std::string out;
    std::string json;

    double slack_magnitude = 32;
    double slack_quadruple = 4;
    double slack_collision = 1;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

std::string config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are a usage error.
ExperimentConfig config_from_json(std::string_view text);

struct RunResult {
    int exit_code = 0;
    std::vector<ReportRow> rows;
    std::vector<std::string> log;  // one line per point, plus failures
};

/// Computes the report without writing anything.
RunResult execute(const ExperimentConfig& cfg);

/// execute() plus output: CSV to cfg.out (stdout when empty; gen writes the
/// instance there instead), JSON summary to cfg.json, log lines to err.
int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ksumforge
