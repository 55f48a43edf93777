#ifndef CPARK_COMMANDS_HPP
#define CPARK_COMMANDS_HPP

#include <chrono>
#include <optional>
#include <ostream>
#include <string>

#include "cpark/experiment.hpp"

namespace cpark {

// ---------------------------------------------------------------------------
// Config file sections beyond [generator]

inline void apply_solver_section(const KvSection& sec, SolverParams& p) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "delta") p.run.delta = text::parse_number<double>(value, key);
        else if (key == "gamma_init") p.run.gamma_init = text::parse_number<double>(value, key);
        else if (key == "epsilon") p.run.epsilon = text::parse_number<double>(value, key);
        else if (key == "max_iters") p.run.max_iters = text::parse_number<int>(value, key);
        else if (key == "drop_prob") p.run.channel.drop_prob = text::parse_number<double>(value, key);
        else if (key == "delay_ms") p.run.channel.per_round_delay_ms = text::parse_number<double>(value, key);
        else if (key == "net_seed") p.net_seed = text::parse_number<std::uint64_t>(value, key);
        else if (key == "max_nodes") p.limits.max_nodes = text::parse_number<long long>(value, key);
        else throw ParseError("unknown solver key '" + key + "'");
    }
}

inline void apply_experiment_section(const KvSection& sec, ExperimentConfig& cfg) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "test") {
            cfg.test = parse_test_id(value);
        } else if (key == "sweep") {
            cfg.sweep = parse_list<double>(value, "sweep value");
        } else if (key == "seeds") {
            cfg.seeds = text::parse_number<int>(value, key);
        } else if (key == "first_seed") {
            cfg.first_seed = text::parse_number<std::uint64_t>(value, key);
        } else if (key == "solvers") {
            cfg.solvers.clear();
            for (std::string_view s : text::split_ws(value)) cfg.solvers.push_back(parse_solver(s));
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "workers") {
            cfg.workers = text::parse_number<int>(value, key);
        } else {
            throw ParseError("unknown experiment key '" + key + "'");
        }
    }
}

inline KvDocument read_config(const std::string& path) {
    KvDocument doc = parse_kv(read_file(path));
    expect_header(doc, kConfigHeader);
    for (const KvSection& sec : doc.sections)
        if (sec.name != "generator" && sec.name != "solver" && sec.name != "experiment")
            throw ParseError("unknown config section '" + sec.name + "'");
    return doc;
}

// ---------------------------------------------------------------------------
// Commands

/// Writes a generated instance. The seed is mandatory so that every file can
/// be reproduced from its command line.
inline void cmd_generate(const GeneratorConfig& cfg, bool seed_set, const std::string& out_path) {
    if (!seed_set) throw InvalidConfig("--seed is required");
    write_file(out_path, write_instance(generate_instance(cfg)));
}

struct SolveOutcome {
    Assignment assignment;
    long long objective = 0;
    bool feasible = false;
    int iterations = 0;
    bool converged = false;
    double wallclock_s = 0.0;
    std::optional<RunReport> report;
};

inline std::string summary_line(SolverId solver, const SolveOutcome& o) {
    std::string line = std::string("solver=") + to_string(solver) + " objective=" + std::to_string(o.objective) +
                       " feasible=" + (o.feasible ? "1" : "0") + " iterations=" + std::to_string(o.iterations);
    if (solver == SolverId::Distributed) line += std::string(" converged=") + (o.converged ? "1" : "0");
    return line + " time_s=" + text::format_double(o.wallclock_s);
}

/// Solves an instance. Infeasibility surfaces as InstanceInfeasible, search
/// exhaustion as OracleLimit.
inline SolveOutcome solve_instance(const Instance& inst, SolverId solver, const SolverParams& params) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveOutcome out;
    switch (solver) {
        case SolverId::Exact: {
            auto a = solve_exact(inst, params.limits);
            if (!a) throw InstanceInfeasible("instance has no feasible assignment");
            out.assignment = std::move(*a);
            break;
        }
        case SolverId::Distributed: {
            RunReport rep = run_distributed(inst, params.run, params.net_seed);
            out.iterations = rep.iterations;
            out.converged = rep.converged;
            out.assignment = rep.final_assignment;
            out.report = std::move(rep);
            break;
        }
        case SolverId::Greedy: {
            auto a = solve_greedy(inst);
            if (!a) throw InstanceInfeasible("greedy baseline found no feasible assignment");
            out.assignment = std::move(*a);
            break;
        }
    }
    out.objective = objective(out.assignment);
    out.feasible = check_feasibility(inst, out.assignment).empty();
    out.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

struct SolveFiles {
    std::string assignment;   // empty: not written
    std::string convergence;  // distributed only
    std::string repair_trace;
    std::string drop_bitmap;
};

inline std::string cmd_solve(const std::string& instance_path, SolverId solver, const SolverParams& params,
                             const SolveFiles& files) {
    const Instance inst = read_instance(read_file(instance_path));
    const SolveOutcome o = solve_instance(inst, solver, params);
    if (!files.assignment.empty()) write_file(files.assignment, write_assignment(o.assignment));
    if (o.report) {
        if (!files.convergence.empty()) write_file(files.convergence, convergence_csv(*o.report));
        if (!files.repair_trace.empty()) write_file(files.repair_trace, to_csv(o.report->repair_trace));
        if (!files.drop_bitmap.empty()) write_file(files.drop_bitmap, o.report->drop_bitmap);
    }
    return summary_line(solver, o);
}

inline void cmd_export_lp(const std::string& instance_path, const std::string& out_path) {
    write_file(out_path, export_lp(read_instance(read_file(instance_path))));
}

/// Feasibility report of an assignment file as CSV; the flag is true when the
/// violation list is empty.
inline std::pair<bool, std::string> cmd_check(const std::string& instance_path, const std::string& assignment_path) {
    const Instance inst = read_instance(read_file(instance_path));
    const Assignment a = read_assignment(read_file(assignment_path));
    if (a.size() != inst.num_avs()) throw InvalidConfig("assignment does not match the instance's AV count");
    const auto violations = check_feasibility(inst, a);
    std::string csv = violation_csv_header() + "\n";
    for (const Violation& v : violations) csv += to_csv(v) + "\n";
    return {violations.empty(), csv};
}

inline void cmd_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    const ExperimentOutput out = run_experiment(cfg);
    write_experiment(out, cfg.out_dir);
    log << "experiment=" << to_string(cfg.test) << " files=" << out.files.size() << " failed_rows=" << out.failed_rows
        << " out=" << cfg.out_dir << "\n";
}

/// Maps the error hierarchy onto process exit codes.
template <class Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::Internal);
    }
}

}  // namespace cpark

#endif  // CPARK_COMMANDS_HPP
