#include "ksumforge/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ksumforge/algebra.hpp"
#include "ksumforge/analysis.hpp"
#include "ksumforge/io.hpp"
#include "ksumforge/parallel.hpp"
#include "ksumforge/reductions.hpp"
#include "ksumforge/solvers.hpp"
#include "ksumforge/stats.hpp"

namespace ksumforge {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Single table driving both JSON directions so the two can never drift apart.
template <class Visitor>
void visit_fields(ExperimentConfig& c, Visitor&& v) {
    v("subcommand", c.subcommand);
    v("problem", c.problem);
    v("k", c.k);
    v("n", c.n);
    v("bound", c.bound);
    v("modulus", c.modulus);
    v("r", c.r);
    v("m", c.m);
    v("p", c.p);
    v("q", c.q);
    v("target_modulus", c.target_modulus);
    v("algorithm", c.algorithm);
    v("oracle", c.oracle);
    v("reduction", c.reduction);
    v("pqr_mode", c.pqr_mode);
    v("quad_mode", c.quad_mode);
    v("q_min", c.q_min);
    v("q_max", c.q_max);
    v("quad_n", c.quad_n);
    v("iterations", c.iterations);
    v("beta", c.beta);
    v("call_cap", c.call_cap);
    v("max_attempts", c.max_attempts);
    v("run_all", c.run_all);
    v("pad_factor", c.pad_factor);
    v("c", c.c);
    v("prescreen", c.prescreen);
    v("enumeration_cap", c.enumeration_cap);
    v("table_cap", c.table_cap);
    v("list_cap", c.list_cap);
    v("seed", c.seed);
    v("trials", c.trials);
    v("threads", c.threads);
    v("timing", c.timing);
    v("in", c.in);
    v("out", c.out);
    v("json", c.json);
    v("slack_magnitude", c.slack_magnitude);
    v("slack_quadruple", c.slack_quadruple);
    v("slack_collision", c.slack_collision);
}

json config_json(const ExperimentConfig& cfg) {
    json j = json::object();
    ExperimentConfig copy = cfg;
    visit_fields(copy, [&](const char* key, const auto& field) { j[key] = field; });
    return j;
}

json row_json(const ReportRow& row) {
    json j = json::object();
    j["experiment"] = row.experiment;
    auto opt = [&](const char* key, const auto& v) { j[key] = v ? json(*v) : json(nullptr); };
    opt("k", row.k);
    opt("size_param", row.size_param);
    opt("m_or_p", row.m_or_p);
    opt("q", row.q);
    opt("t", row.t);
    opt("r", row.r);
    opt("trials", row.trials);
    opt("successes", row.successes);
    opt("estimate", row.estimate);
    opt("ci_lo", row.ci_lo);
    opt("ci_hi", row.ci_hi);
    opt("paper_bound", row.paper_bound);
    opt("oracle_calls", row.oracle_calls);
    opt("wall_ms", row.wall_ms);
    j["seed"] = row.seed;
    return j;
}

Family family_of_problem(const std::string& problem) {
    if (problem == "kxor") return Family::kXor;
    if (problem == "ksum") return Family::kSum;
    if (problem == "kmsum") return Family::kMSum;
    throw UsageError("unknown problem '" + problem + "' (kxor, ksum, kmsum)");
}

std::uint64_t size_param(const ExperimentConfig& cfg, Family f) {
    switch (f) {
        case Family::kXor: return cfg.n;
        case Family::kSum: return cfg.bound;
        case Family::kMSum: return cfg.modulus;
    }
    return 0;
}

std::uint64_t instance_size_param(const Instance& inst) {
    return std::visit(
        [](const auto& in) -> std::uint64_t {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, XorInstance>) return in.n();
            else if constexpr (std::is_same_v<T, SumInstance>) return static_cast<std::uint64_t>(in.bound());
            else return in.modulus();
        },
        inst);
}

SolverLimits limits_of(const ExperimentConfig& cfg) {
    SolverLimits l;
    l.enumeration_cap = cfg.enumeration_cap;
    l.table_cap = cfg.table_cap;
    l.list_cap = cfg.list_cap;
    return l;
}

Oracle make_oracle(const std::string& name, Family family, const ExperimentConfig& cfg) {
    if (name == "lexmin") return lexmin_oracle(family, limits_of(cfg));
    SolverConfig sc;
    try {
        sc.algorithm = parse_algorithm(name);
    } catch (const std::exception&) {
        throw UsageError("unknown algorithm '" + name + "'");
    }
    sc.limits = limits_of(cfg);
    return solver_oracle(sc, family);
}

Instance generate(const ExperimentConfig& cfg, Family f, std::uint64_t modulus_override, SeededRng& rng) {
    switch (f) {
        case Family::kXor: return gen_xor_instance(cfg.k, static_cast<unsigned>(cfg.n), cfg.r, rng);
        case Family::kSum: return gen_sum_instance(cfg.k, static_cast<std::int64_t>(cfg.bound), cfg.r, rng);
        case Family::kMSum:
            return gen_msum_instance(cfg.k, modulus_override ? modulus_override : cfg.modulus, cfg.r, rng);
    }
    throw UsageError("unreachable family");
}

/// Fresh instance from rng; with prescreen, redrawn until brute force finds a solution.
Instance draw_instance(const ExperimentConfig& cfg, Family f, std::uint64_t modulus_override, SeededRng& rng) {
    constexpr int kMaxDraws = 10'000;
    for (int d = 0; d < kMaxDraws; ++d) {
        Instance inst = generate(cfg, f, modulus_override, rng);
        if (!cfg.prescreen || brute_force(inst, limits_of(cfg))) return inst;
    }
    throw UsageError("prescreen: no instance with a solution after 10000 draws");
}

void fill_rate(ReportRow& row, std::uint64_t successes, std::uint64_t trials) {
    row.trials = trials;
    row.successes = successes;
    if (trials > 0) {
        row.estimate = static_cast<double>(successes) / static_cast<double>(trials);
        const Interval ci = wilson_interval(successes, trials);
        row.ci_lo = ci.lo;
        row.ci_hi = ci.hi;
    }
}

std::string join_indices(const std::vector<std::uint64_t>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

struct TrialOutcome {
    OracleOutcome outcome;
    bool valid = true;
    std::uint64_t calls = 0;
};

void solve_cmd(const ExperimentConfig& cfg, RunResult& res, unsigned threads) {
    SeededRng rng(cfg.seed);
    std::optional<Instance> fixed;
    if (!cfg.in.empty()) fixed = parse_instance(cfg.in);
    const Family f = fixed ? family_of(*fixed) : family_of_problem(cfg.problem);
    const Oracle oracle = make_oracle(cfg.algorithm, f, cfg);

    std::vector<TrialOutcome> out(cfg.trials);
    parallel_for(cfg.trials, threads, [&](std::size_t i) {
        SeededRng trial = rng.child(i);
        SeededRng gen = trial.child(0), solve = trial.child(1);
        const Instance inst = fixed ? *fixed : draw_instance(cfg, f, 0, gen);
        out[i].outcome = oracle(inst, solve);
        out[i].calls = 1;
        if (out[i].outcome) {
            try {
                out[i].valid = validate(inst, *out[i].outcome);
            } catch (const InvalidTuple&) {
                out[i].valid = false;
            }
        }
    });

    ReportRow row;
    row.experiment = "solve-" + cfg.algorithm;
    row.k = fixed ? tuple_size(*fixed) : cfg.k;
    row.r = fixed ? list_size(*fixed) : cfg.r;
    row.size_param = fixed ? instance_size_param(*fixed) : size_param(cfg, f);
    std::uint64_t successes = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out[i].outcome) continue;
        if (!out[i].valid) {
            res.exit_code = 1;
            res.log.push_back("trial " + std::to_string(i) + ": invalid tuple " + to_string(*out[i].outcome));
            continue;
        }
        ++successes;
    }
    fill_rate(row, successes, cfg.trials);
    row.oracle_calls = cfg.trials;
    row.seed = cfg.seed;
    res.rows.push_back(row);
    if (!out.empty())
        res.log.push_back(out[0].outcome ? "trial 0: solution " + to_string(*out[0].outcome) : "trial 0: no solution");
}

void reduce_cmd(const ExperimentConfig& cfg, RunResult& res, unsigned threads) {
    SeededRng rng(cfg.seed);
    std::optional<Instance> fixed;
    if (!cfg.in.empty()) fixed = parse_instance(cfg.in);

    ReductionBudget budget;
    budget.iterations = cfg.iterations;
    if (cfg.beta > 0) budget.beta_hint = cfg.beta;
    budget.call_cap = cfg.call_cap;
    budget.run_all = cfg.run_all;

    const std::string& red = cfg.reduction;
    Family input_family;
    Family oracle_family;
    std::uint64_t input_modulus = 0;
    if (red == "xor" || red == "xor-pipeline") {
        input_family = oracle_family = Family::kXor;
        if (cfg.m == 0 || cfg.m > cfg.n) throw UsageError("reduce xor: need 1 <= m <= n");
    } else if (red == "msum") {
        input_family = oracle_family = Family::kMSum;
        if (cfg.p == 0 || cfg.q == 0) throw UsageError("reduce msum: --p and --q are required");
        input_modulus = cfg.p * cfg.q;
    } else if (red == "sum-to-msum") {
        input_family = Family::kSum;
        oracle_family = Family::kMSum;
        if (cfg.target_modulus == 0) throw UsageError("reduce sum-to-msum: --M is required");
    } else if (red == "sum-pipeline") {
        input_family = oracle_family = Family::kSum;
        if (cfg.target_modulus == 0) throw UsageError("reduce sum-pipeline: --M is required");
    } else if (red == "pad") {
        input_family = oracle_family = family_of_problem(cfg.problem);
    } else {
        throw UsageError("unknown reduction '" + red + "'");
    }
    if (fixed && family_of(*fixed) != input_family) throw UsageError("reduce: input file has the wrong family");
    const Oracle oracle = make_oracle(cfg.algorithm, oracle_family, cfg);

    std::vector<ReductionReport> reports(cfg.trials);
    std::vector<char> valid(cfg.trials, 1);
    parallel_for(cfg.trials, threads, [&](std::size_t i) {
        SeededRng trial = rng.child(i);
        SeededRng gen = trial.child(0), work = trial.child(1);
        const Instance z = fixed ? *fixed : draw_instance(cfg, input_family, input_modulus, gen);
        ReductionReport rep;
        if (red == "xor") {
            rep = xor_reduce(std::get<XorInstance>(z), static_cast<unsigned>(cfg.m), oracle, budget, work);
        } else if (red == "xor-pipeline") {
            rep = xor_theorem_pipeline(std::get<XorInstance>(z), static_cast<unsigned>(cfg.m), oracle, budget, work,
                                       cfg.pad_factor);
        } else if (red == "msum") {
            rep = msum_reduce(std::get<MSumInstance>(z), cfg.p, cfg.q, oracle, budget, work, cfg.c);
        } else if (red == "sum-to-msum") {
            rep = sum_to_msum(std::get<SumInstance>(z), cfg.target_modulus, oracle, work);
        } else if (red == "sum-pipeline") {
            SumPipelineOptions opt;
            opt.c = cfg.c;
            opt.max_attempts = cfg.max_attempts;
            rep = sum_theorem_pipeline(std::get<SumInstance>(z), cfg.target_modulus, oracle, budget, work, opt);
        } else {
            rep = pad_reduce(z, std::max<std::uint64_t>(cfg.pad_factor, 1) * list_size(z), oracle, work);
        }
        if (rep.outcome) {
            try {
                valid[i] = validate(z, *rep.outcome);
            } catch (const InvalidTuple&) {
                valid[i] = 0;
            }
        }
        reports[i] = std::move(rep);
    });

    ReportRow row;
    row.experiment = "reduce-" + red;
    row.k = cfg.k;
    row.r = cfg.r;
    if (fixed) {
        row.k = tuple_size(*fixed);
        row.r = list_size(*fixed);
    }
    if (input_family == Family::kXor) {
        row.size_param = fixed ? std::get<XorInstance>(*fixed).n() : cfg.n;
        row.m_or_p = cfg.m;
        row.t = *row.size_param - cfg.m;
    } else if (red == "msum") {
        row.size_param = input_modulus;
        row.m_or_p = cfg.p;
        row.q = cfg.q;
    } else if (input_family == Family::kSum) {
        row.size_param = fixed ? instance_size_param(*fixed) : cfg.bound;
        row.m_or_p = cfg.target_modulus;
    } else {
        row.size_param = size_param(cfg, input_family);
    }
    std::uint64_t successes = 0, calls = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        calls += reports[i].calls;
        if (!reports[i].outcome) continue;
        if (!valid[i]) {
            res.exit_code = 1;
            res.log.push_back("trial " + std::to_string(i) + ": invalid tuple " + to_string(*reports[i].outcome));
            continue;
        }
        ++successes;
    }
    fill_rate(row, successes, cfg.trials);
    row.oracle_calls = calls;
    row.seed = cfg.seed;
    res.rows.push_back(row);
}

void collide_cmd(const ExperimentConfig& cfg, RunResult& res, unsigned threads) {
    SeededRng rng(cfg.seed);
    PairSpec spec;
    Family f;
    ReportRow row;
    if (cfg.problem == "kxor") {
        if (cfg.m == 0 || cfg.n <= cfg.m) throw UsageError("collide: need n > m >= 1");
        spec = XorPairSpec{cfg.k, static_cast<unsigned>(cfg.m), cfg.r, static_cast<unsigned>(cfg.n - cfg.m)};
        f = Family::kXor;
        row.experiment = "collide-xor-" + cfg.oracle;
        row.size_param = cfg.n;
        row.m_or_p = cfg.m;
        row.t = cfg.n - cfg.m;
    } else if (cfg.problem == "kmsum") {
        if (cfg.p == 0 || cfg.q == 0) throw UsageError("collide: --p and --q are required for kmsum");
        PqrMode mode;
        if (cfg.pqr_mode == "definition") mode = PqrMode::kDefinition;
        else if (cfg.pqr_mode == "claim") mode = PqrMode::kClaim;
        else throw UsageError("unknown pqr mode '" + cfg.pqr_mode + "'");
        spec = ArithPairSpec{cfg.k, cfg.p, cfg.q, cfg.r, mode};
        f = Family::kMSum;
        row.experiment = "collide-pqr-" + cfg.pqr_mode + "-" + cfg.oracle;
        row.size_param = cfg.p * cfg.q;
        row.m_or_p = cfg.p;
        row.q = cfg.q;
    } else {
        throw UsageError("collide: problem must be kxor or kmsum");
    }
    const Oracle oracle = make_oracle(cfg.oracle, f, cfg);
    const CollisionEstimate est = estimate_collision(oracle, spec, cfg.trials, rng, threads, cfg.slack_collision);
    row.k = cfg.k;
    row.r = cfg.r;
    row.trials = est.trials;
    row.successes = est.collisions;
    row.estimate = est.estimate;
    row.ci_lo = est.ci.lo;
    row.ci_hi = est.ci.hi;
    row.paper_bound = est.paper_bound;
    row.oracle_calls = 2 * est.trials;
    row.seed = cfg.seed;
    res.rows.push_back(row);
    res.log.push_back("oracle successes: x " + std::to_string(est.x_successes) + ", both " +
                      std::to_string(est.both_successes));
    if (est.ci.hi > est.paper_bound) {
        res.exit_code = 1;
        res.log.push_back("collision upper confidence bound exceeds the bound");
    }
}

void fourier_cmd(const ExperimentConfig& cfg, RunResult& res) {
    if (cfg.p == 0 || cfg.q == 0) throw UsageError("fourier: --p and --q are required");
    if (!is_prime(cfg.p)) throw UsageError("fourier: p must be prime");
    const MagnitudeScan scan = magnitude_bound_scan(cfg.p, cfg.q, cfg.r, cfg.slack_magnitude);
    const double pq = static_cast<double>(cfg.p * cfg.q);
    for (const auto& m : scan.rows) {
        ReportRow row;
        row.experiment = "fourier:" + join_indices(m.S.S, '-');
        row.m_or_p = cfg.p;
        row.q = cfg.q;
        row.r = cfg.r;
        row.estimate = m.value;
        row.paper_bound = cfg.slack_magnitude / pq;
        row.seed = cfg.seed;
        res.rows.push_back(row);
        if (std::abs(m.imag) >= 1e-9) {
            res.exit_code = 1;
            res.log.push_back(row.experiment + ": imaginary part " + format_number(m.imag));
        }
        const double simp = magnitude_from_probability(m.S, cfg.q);
        if (std::abs(simp - m.value) >= 1e-12) {
            res.exit_code = 1;
            res.log.push_back(row.experiment + ": probability identity off by " + format_number(simp - m.value));
        }
    }
    ReportRow summary;
    summary.experiment = "fourier-max";
    summary.m_or_p = cfg.p;
    summary.q = cfg.q;
    summary.r = cfg.r;
    summary.estimate = scan.max_scaled;
    summary.paper_bound = cfg.slack_magnitude;
    summary.seed = cfg.seed;
    res.rows.push_back(summary);
    if (!scan.within()) {
        res.exit_code = 1;
        res.log.push_back("max |M| pq exceeds the slack constant");
    }
}

void quadruples_cmd(const ExperimentConfig& cfg, RunResult& res) {
    QuadMode mode;
    if (cfg.quad_mode == "product") mode = QuadMode::kProduct;
    else if (cfg.quad_mode == "sum") mode = QuadMode::kSum;
    else throw UsageError("unknown quadruple mode '" + cfg.quad_mode + "'");
    if (cfg.q_min < 2 || cfg.q_min > cfg.q_max) throw UsageError("count-quadruples: need 2 <= q-min <= q-max");
    for (std::uint64_t q = cfg.q_min; q <= cfg.q_max; q *= 2) {
        ReportRow row;
        row.experiment = "quadruples-" + cfg.quad_mode;
        row.q = q;
        std::uint64_t N = 0;
        if (mode == QuadMode::kSum) {
            const std::uint64_t p = next_prime(q);
            N = cfg.quad_n ? cfg.quad_n : p * q;
            row.m_or_p = p;
            row.size_param = N;
        }
        const auto start = Clock::now();
        const std::uint64_t count = count_quadruples(q, mode, N);
        const double qd = static_cast<double>(q);
        row.successes = count;
        row.estimate = static_cast<double>(count);
        row.paper_bound = cfg.slack_quadruple * qd * qd * std::log(qd);
        if (cfg.timing)
            row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        row.seed = cfg.seed;
        res.rows.push_back(row);
        res.log.push_back("q=" + std::to_string(q) + " count=" + std::to_string(count));
        if (static_cast<double>(count) > *row.paper_bound) {
            res.exit_code = 1;
            res.log.push_back("q=" + std::to_string(q) + ": count exceeds the bound");
        }
    }
}

std::string gen_path(const std::string& base, std::uint64_t index) {
    return index == 0 ? base : base + "." + std::to_string(index);
}

void require_sane(const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw UsageError("--trials must be positive");
    static const char* kCommands[] = {"gen", "solve", "reduce", "collide", "fourier", "count-quadruples"};
    bool known = false;
    for (const char* c : kCommands) known = known || cfg.subcommand == c;
    if (!known) throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
}

RunResult execute_inner(const ExperimentConfig& cfg, std::vector<Instance>* generated) {
    require_sane(cfg);
    RunResult res;
    const unsigned threads = resolve_threads(cfg.threads);
    const auto start = Clock::now();
    if (cfg.subcommand == "gen") {
        const Family f = family_of_problem(cfg.problem);
        SeededRng rng(cfg.seed);
        std::vector<Instance> made;
        for (std::uint64_t i = 0; i < cfg.trials; ++i) {
            SeededRng gen = rng.child(i).child(0);
            made.push_back(draw_instance(cfg, f, 0, gen));
        }
        ReportRow row;
        row.experiment = "gen-" + cfg.problem;
        row.k = cfg.k;
        row.size_param = size_param(cfg, f);
        row.r = cfg.r;
        row.trials = cfg.trials;
        row.seed = cfg.seed;
        res.rows.push_back(row);
        if (generated) *generated = std::move(made);
    } else if (cfg.subcommand == "solve") {
        solve_cmd(cfg, res, threads);
    } else if (cfg.subcommand == "reduce") {
        reduce_cmd(cfg, res, threads);
    } else if (cfg.subcommand == "collide") {
        collide_cmd(cfg, res, threads);
    } else if (cfg.subcommand == "fourier") {
        fourier_cmd(cfg, res);
    } else {
        quadruples_cmd(cfg, res);
    }
    if (cfg.timing && cfg.subcommand != "count-quadruples") {
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        for (auto& row : res.rows) row.wall_ms = ms;
    }
    return res;
}

bool is_usage_error(const std::exception& e) {
    return dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
           dynamic_cast<const FormatError*>(&e) || dynamic_cast<const CapacityError*>(&e) ||
           dynamic_cast<const json::exception*>(&e);
}

void add_options(CLI::App& sub, ExperimentConfig& cfg, std::string& config_in, std::string& config_out,
                 std::uint64_t& t_opt) {
    sub.add_option("--config", config_in, "JSON config file (command-line flags override it)");
    sub.add_option("--dump-config", config_out, "Write the effective config as JSON");
    sub.add_option("--problem", cfg.problem, "kxor, ksum or kmsum");
    sub.add_option("--k", cfg.k, "Tuple size");
    sub.add_option("--n", cfg.n, "XOR width");
    sub.add_option("--N,--bound", cfg.bound, "SUM magnitude bound");
    sub.add_option("--L,--modulus", cfg.modulus, "MSUM modulus");
    sub.add_option("--r", cfg.r, "List size");
    sub.add_option("--m", cfg.m, "Target XOR width");
    sub.add_option("--t", t_opt, "Shrinkage n - m; sets n = m + t");
    sub.add_option("--p", cfg.p, "Prime p");
    sub.add_option("--q", cfg.q, "Second modulus q");
    sub.add_option("--M,--target-modulus", cfg.target_modulus, "Target modulus for SUM reductions");
    sub.add_option("--algo,--algorithm", cfg.algorithm, "Solver or reduction oracle");
    sub.add_option("--oracle", cfg.oracle, "Collision adversary: lexmin or an algorithm");
    sub.add_option("--reduction", cfg.reduction, "xor, xor-pipeline, msum, sum-to-msum, sum-pipeline, pad");
    sub.add_option("--pqr-mode", cfg.pqr_mode, "definition or claim");
    sub.add_option("--mode", cfg.quad_mode, "Quadruple mode: product or sum");
    sub.add_option("--q-min", cfg.q_min);
    sub.add_option("--q-max", cfg.q_max);
    sub.add_option("--quad-n", cfg.quad_n, "Target of the sum mode (default q times the next prime)");
    sub.add_option("--iterations", cfg.iterations, "Reduction rounds L (0: default formula)");
    sub.add_option("--beta", cfg.beta, "Assumed oracle success rate (0: pilot estimate)");
    sub.add_option("--call-cap", cfg.call_cap, "Oracle call budget per run (0: unlimited)");
    sub.add_option("--max-attempts", cfg.max_attempts, "SUM pipeline attempts (0: unlimited)");
    sub.add_flag("--run-all", cfg.run_all, "Do not stop at the first success");
    sub.add_option("--pad-factor", cfg.pad_factor, "Padding factor (0: default)");
    sub.add_option("--c", cfg.c, "Iteration constant of the MSUM reduction");
    sub.add_flag("--prescreen", cfg.prescreen, "Only keep generated instances that have a solution");
    sub.add_option("--enumeration-cap", cfg.enumeration_cap);
    sub.add_option("--table-cap", cfg.table_cap);
    sub.add_option("--list-cap", cfg.list_cap);
    sub.add_option("--seed", cfg.seed, "Master seed");
    sub.add_option("--trials", cfg.trials, "Number of independent trials");
    sub.add_option("--threads", cfg.threads, "Worker threads (0: KSUMFORGE_THREADS or all cores)");
    sub.add_flag("--timing", cfg.timing, "Fill the wall_ms column");
    sub.add_option("--in", cfg.in, "Instance file");
    sub.add_option("--out", cfg.out, "CSV report path (gen: instance path)");
    sub.add_option("--json", cfg.json, "JSON summary path");
    sub.add_option("--slack-magnitude", cfg.slack_magnitude);
    sub.add_option("--slack-quadruple", cfg.slack_quadruple);
    sub.add_option("--slack-collision", cfg.slack_collision);
}

std::string find_config_arg(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return {};
}

}  // namespace

std::string config_to_json(const ExperimentConfig& cfg) { return config_json(cfg).dump(2) + "\n"; }

ExperimentConfig config_from_json(std::string_view text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    ExperimentConfig cfg;
    std::size_t seen = 0;
    visit_fields(cfg, [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        ++seen;
        j.at(key).get_to(field);
    });
    if (seen != j.size()) {
        for (const auto& [key, _] : j.items()) {
            bool known = false;
            ExperimentConfig probe;
            visit_fields(probe, [&](const char* k, auto&) { known = known || key == k; });
            if (!known) throw UsageError("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunResult execute(const ExperimentConfig& cfg) { return execute_inner(cfg, nullptr); }

int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    RunResult res;
    std::vector<Instance> generated;
    try {
        res = execute_inner(cfg, &generated);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return is_usage_error(e) ? 2 : 1;
    }
    for (const auto& line : res.log) err << line << '\n';

    try {
        if (cfg.subcommand == "gen") {
            for (std::size_t i = 0; i < generated.size(); ++i) {
                if (cfg.out.empty()) out << format_instance(generated[i]);
                else write_instance(generated[i], gen_path(cfg.out, i));
            }
        } else if (cfg.out.empty()) {
            write_report(out, res.rows);
        } else {
            std::ofstream f(cfg.out, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + cfg.out);
            write_report(f, res.rows);
        }
        if (!cfg.json.empty()) {
            json summary = json::object();
            summary["config"] = config_json(cfg);
            summary["exit_code"] = res.exit_code;
            summary["rows"] = json::array();
            for (const auto& row : res.rows) summary["rows"].push_back(row_json(row));
            summary["log"] = res.log;
            std::ofstream f(cfg.json, std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + cfg.json);
            f << summary.dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return res.exit_code;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        try {
            std::ifstream f(config_path, std::ios::binary);
            if (!f) throw UsageError("cannot open config " + config_path);
            std::ostringstream buf;
            buf << f.rdbuf();
            cfg = config_from_json(buf.str());
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        }
    }

    CLI::App app{"ksumforge: sparse and dense k-SUM / k-XOR experiments"};
    app.require_subcommand(1);
    std::string config_in, config_out;
    std::uint64_t t_opt = 0;
    const std::pair<const char*, const char*> commands[] = {
        {"gen", "Generate random instances"},
        {"solve", "Run a solver on an instance file or on generated instances"},
        {"reduce", "Run a sparse-to-dense reduction"},
        {"collide", "Estimate the collision probability of an oracle on correlated pairs"},
        {"fourier", "Exact character-sum magnitudes at tiny parameters"},
        {"count-quadruples", "Exact quadruple counts"},
    };
    for (const auto& [name, desc] : commands) add_options(*app.add_subcommand(name, desc), cfg, config_in, config_out, t_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    for (const auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (t_opt) cfg.n = cfg.m + t_opt;
    if (!config_out.empty()) {
        std::ofstream f(config_out, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << config_out << '\n';
            return 2;
        }
        f << config_to_json(cfg);
    }
    return run(cfg, out, err);
}

}  // namespace ksumforge
