#ifndef CPARK_EXPERIMENT_HPP
#define CPARK_EXPERIMENT_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cpark/baseline.hpp"
#include "cpark/coordinator.hpp"
#include "cpark/io.hpp"
#include "cpark/oracle.hpp"

namespace cpark {

enum class TestId { ScaleAvs, ScaleFacilities, TimeScaling, Convergence, CommLoss };

inline const char* to_string(TestId t) {
    switch (t) {
        case TestId::ScaleAvs: return "scale-avs";
        case TestId::ScaleFacilities: return "scale-facilities";
        case TestId::TimeScaling: return "time-scaling";
        case TestId::Convergence: return "convergence";
        case TestId::CommLoss: return "comm-loss";
    }
    return "?";
}

inline TestId parse_test_id(std::string_view s) {
    for (TestId t : {TestId::ScaleAvs, TestId::ScaleFacilities, TestId::TimeScaling, TestId::Convergence,
                     TestId::CommLoss})
        if (s == to_string(t)) return t;
    throw InvalidConfig("unknown experiment '" + std::string(s) +
                        "' (scale-avs, scale-facilities, time-scaling, convergence, comm-loss)");
}

enum class SolverId { Exact, Distributed, Greedy };

inline const char* to_string(SolverId s) {
    switch (s) {
        case SolverId::Exact: return "exact";
        case SolverId::Distributed: return "distributed";
        case SolverId::Greedy: return kGreedyBaselineLabel;
    }
    return "?";
}

inline SolverId parse_solver(std::string_view s) {
    if (s == "exact") return SolverId::Exact;
    if (s == "distributed") return SolverId::Distributed;
    if (s == kGreedyBaselineLabel || s == "greedy") return SolverId::Greedy;
    throw InvalidConfig("unknown solver '" + std::string(s) + "' (exact, distributed, greedy-baseline)");
}

/// Shared solver knobs for solve and experiment commands.
struct SolverParams {
    RunParams run;
    std::uint64_t net_seed = 1;
    OracleLimits limits;
};

struct ExperimentConfig {
    TestId test = TestId::ScaleAvs;
    std::vector<double> sweep;  // K, F, new D, K, or drop probability depending on the test
    int seeds = 5;
    std::uint64_t first_seed = 1;
    std::vector<SolverId> solvers;
    std::string out_dir = "results";
    GeneratorConfig base;
    SolverParams solver;
    int workers = 0;  // 0: one per hardware thread
};

/// Desk-scale defaults per test.
inline ExperimentConfig default_experiment(TestId test) {
    ExperimentConfig cfg;
    cfg.test = test;
    cfg.base.n_avs = 8;
    cfg.base.n_facilities = 2;
    cfg.base.slots = 12;
    cfg.solvers = {SolverId::Exact, SolverId::Distributed, SolverId::Greedy};
    switch (test) {
        case TestId::ScaleAvs: cfg.sweep = {4, 8, 12, 16}; break;
        case TestId::ScaleFacilities: cfg.sweep = {1, 2, 3, 4, 5}; break;
        case TestId::TimeScaling:
            cfg.base.slots = 100;
            cfg.sweep = {10, 20, 30, 40, 50, 80, 100};
            break;
        case TestId::Convergence:
            cfg.base.n_facilities = 5;
            cfg.base.slots = 100;
            cfg.sweep = {100};
            cfg.solvers = {SolverId::Distributed};
            cfg.seeds = 1;
            break;
        case TestId::CommLoss:
            cfg.base.n_avs = 100;
            cfg.base.n_facilities = 5;
            cfg.base.slots = 100;
            cfg.sweep = {0, 0.1, 0.2, 0.3, 0.4, 0.6, 0.8};
            cfg.solvers = {SolverId::Distributed};
            break;
    }
    return cfg;
}

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.seeds < 1) throw InvalidConfig("seeds per point must be at least 1");
    if (cfg.sweep.empty()) throw InvalidConfig("sweep must not be empty");
    if (cfg.solvers.empty()) throw InvalidConfig("no solver selected");
    if (cfg.workers < 0) throw InvalidConfig("workers must be nonnegative");
    for (double v : cfg.sweep) {
        if (cfg.test == TestId::CommLoss) {
            if (!(v >= 0.0 && v <= 1.0)) throw InvalidConfig("drop probabilities must lie in [0, 1]");
        } else if (!(v >= 1.0) || v != static_cast<double>(static_cast<int>(v))) {
            throw InvalidConfig("sweep values must be positive integers for " + std::string(to_string(cfg.test)));
        }
    }
}

inline std::string experiment_csv_header() {
    return "test,point,seed,solver,objective,pct_of_exact,iterations,simulated_delay_ms,feasible,status,wallclock_s";
}

struct ExperimentRow {
    std::string point;
    std::uint64_t seed = 0;
    SolverId solver = SolverId::Exact;
    std::optional<double> objective;  // in the point's own slot units
    std::optional<double> pct_of_exact;
    std::optional<int> iterations;
    std::optional<double> simulated_delay_ms;
    bool feasible = false;
    std::string status = "ok";
    double wallclock_s = 0.0;
};

/// Result of one (sweep point, seed) job.
struct JobResult {
    std::vector<ExperimentRow> rows;
    std::string convergence_csv;  // convergence test only
};

namespace detail {

inline std::string opt_csv(const std::optional<double>& v) { return v ? text::format_double(*v) : std::string(); }

inline std::string status_of(const std::exception& e) {
    if (dynamic_cast<const OracleLimit*>(&e)) return "oracle-limit";
    if (dynamic_cast<const InstanceInfeasible*>(&e)) return "infeasible";
    if (dynamic_cast<const GenerationFailure*>(&e)) return "generation-failed";
    if (dynamic_cast<const InvalidConfig*>(&e)) return "config-error";
    return "error";
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string point_label(const ExperimentConfig& cfg, double v) {
    return cfg.test == TestId::CommLoss ? text::format_double(v) : std::to_string(static_cast<int>(v));
}

/// Builds the instance for one job. For time scaling the fine instance is
/// returned too, since the exact optimum there is the reference.
struct JobInstances {
    Instance fine;
    Instance solved;
    double unit = 1.0;  // fine slots per solved slot
};

inline JobInstances job_instances(const ExperimentConfig& cfg, double point, std::uint64_t seed) {
    GeneratorConfig g = cfg.base;
    g.seed = seed;
    switch (cfg.test) {
        case TestId::ScaleAvs:
        case TestId::Convergence: g.n_avs = static_cast<int>(point); break;
        case TestId::ScaleFacilities: g.n_facilities = static_cast<int>(point); break;
        case TestId::TimeScaling:
        case TestId::CommLoss: break;
    }
    JobInstances out;
    out.fine = generate_instance(g);
    if (cfg.test == TestId::TimeScaling) {
        out.solved = rescale_time(out.fine, static_cast<int>(point));
        out.unit = static_cast<double>(out.fine.slots()) / static_cast<double>(out.solved.slots());
    } else {
        out.solved = out.fine;
    }
    return out;
}

inline JobResult run_job(const ExperimentConfig& cfg, double point, std::uint64_t seed) {
    JobResult result;
    const std::string label = point_label(cfg, point);
    auto base_row = [&](SolverId s) {
        ExperimentRow r;
        r.point = label;
        r.seed = seed;
        r.solver = s;
        return r;
    };
    JobInstances insts;
    try {
        insts = job_instances(cfg, point, seed);
    } catch (const Error& e) {
        for (SolverId s : cfg.solvers) {
            ExperimentRow r = base_row(s);
            r.status = status_of(e);
            result.rows.push_back(r);
        }
        return result;
    }

    // reference optimum, in fine slot units
    std::optional<double> reference;
    const bool wants_exact = std::find(cfg.solvers.begin(), cfg.solvers.end(), SolverId::Exact) != cfg.solvers.end();
    if (wants_exact) {
        try {
            if (auto best = solve_exact(insts.fine, cfg.solver.limits)) reference = static_cast<double>(objective(*best));
        } catch (const OracleLimit&) {
        }
    }

    for (SolverId s : cfg.solvers) {
        ExperimentRow r = base_row(s);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::optional<Assignment> a;
            switch (s) {
                case SolverId::Exact:
                    a = solve_exact(insts.solved, cfg.solver.limits);
                    break;
                case SolverId::Distributed: {
                    RunParams run = cfg.solver.run;
                    if (cfg.test == TestId::CommLoss) run.channel.drop_prob = point;
                    if (cfg.test == TestId::Convergence) run.trace_primal = true;
                    const RunReport rep = run_distributed(insts.solved, run, cfg.solver.net_seed + seed);
                    r.iterations = rep.iterations;
                    r.simulated_delay_ms = rep.simulated_delay_ms;
                    if (cfg.test == TestId::Convergence) result.convergence_csv = convergence_csv(rep);
                    a = rep.final_assignment;
                    break;
                }
                case SolverId::Greedy:
                    a = solve_greedy(insts.solved);
                    break;
            }
            if (!a) throw InstanceInfeasible("no feasible assignment");
            r.feasible = check_feasibility(insts.solved, *a).empty();
            if (!r.feasible) r.status = "infeasible-output";
            r.objective = static_cast<double>(objective(*a));
            if (reference && *reference > 0.0) r.pct_of_exact = 100.0 * *r.objective * insts.unit / *reference;
        } catch (const Error& e) {
            r.status = status_of(e);
        }
        r.wallclock_s = seconds_since(t0);
        result.rows.push_back(r);
    }
    return result;
}

/// Runs fn(i) for i in [0, n) on a small pool; results land by index so the
/// output order never depends on scheduling.
template <class Fn>
void parallel_for(int n, int workers, Fn fn) {
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace detail

inline std::string to_csv_row(TestId test, const ExperimentRow& r) {
    std::string out = std::string(to_string(test)) + "," + r.point + "," + std::to_string(r.seed) + "," +
                      to_string(r.solver) + "," + detail::opt_csv(r.objective) + "," + detail::opt_csv(r.pct_of_exact) +
                      "," + (r.iterations ? std::to_string(*r.iterations) : std::string()) + "," +
                      detail::opt_csv(r.simulated_delay_ms) + "," + (r.feasible ? "1" : "0") + "," + r.status + "," +
                      text::format_double(r.wallclock_s);
    return out;
}

struct ExperimentOutput {
    std::map<std::string, std::string> files;  // file name -> contents
    int failed_rows = 0;
};

/// Runs every (sweep point, seed) job and renders the CSV and plot-data
/// files. Nothing is written to disk here.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const int points = static_cast<int>(cfg.sweep.size());
    const int jobs = points * cfg.seeds;
    std::vector<JobResult> results(static_cast<std::size_t>(jobs));
    detail::parallel_for(jobs, cfg.workers, [&](int i) {
        const double point = cfg.sweep[static_cast<std::size_t>(i / cfg.seeds)];
        const std::uint64_t seed = cfg.first_seed + static_cast<std::uint64_t>(i % cfg.seeds);
        results[static_cast<std::size_t>(i)] = detail::run_job(cfg, point, seed);
    });

    ExperimentOutput out;
    const std::string name = to_string(cfg.test);
    std::string csv = experiment_csv_header() + "\n";
    for (const JobResult& job : results)
        for (const ExperimentRow& r : job.rows) {
            csv += to_csv_row(cfg.test, r) + "\n";
            if (r.status != "ok") ++out.failed_rows;
        }
    out.files[name + ".csv"] = csv;

    // plot data: mean objective per point and solver, plus mean iterations
    // for the distributed solver
    for (SolverId s : cfg.solvers) {
        std::string objective_dat = "# x mean_objective\n";
        std::string iterations_dat = "# x mean_iterations\n";
        for (int p = 0; p < points; ++p) {
            double obj_sum = 0.0;
            double it_sum = 0.0;
            int obj_n = 0;
            int it_n = 0;
            for (int j = 0; j < cfg.seeds; ++j)
                for (const ExperimentRow& r : results[static_cast<std::size_t>(p * cfg.seeds + j)].rows) {
                    if (r.solver != s) continue;
                    if (r.objective && r.status == "ok") obj_sum += *r.objective, ++obj_n;
                    if (r.iterations) it_sum += *r.iterations, ++it_n;
                }
            const std::string x = detail::point_label(cfg, cfg.sweep[static_cast<std::size_t>(p)]);
            if (obj_n) objective_dat += x + " " + text::format_double(obj_sum / obj_n) + "\n";
            if (it_n) iterations_dat += x + " " + text::format_double(it_sum / it_n) + "\n";
        }
        out.files[name + "_" + to_string(s) + "_objective.dat"] = objective_dat;
        if (s == SolverId::Distributed) out.files[name + "_" + to_string(s) + "_iterations.dat"] = iterations_dat;
    }

    if (cfg.test == TestId::Convergence) {
        for (int i = 0; i < jobs; ++i) {
            const JobResult& job = results[static_cast<std::size_t>(i)];
            if (job.convergence_csv.empty()) continue;
            const std::string tag = "_" + detail::point_label(cfg, cfg.sweep[static_cast<std::size_t>(i / cfg.seeds)]) +
                                    "_seed" + std::to_string(cfg.first_seed + static_cast<std::uint64_t>(i % cfg.seeds));
            out.files["convergence" + tag + ".csv"] = job.convergence_csv;
            std::string dual = "# iteration dual\n";
            std::string primal = "# iteration primal\n";
            const auto lines = text::split(job.convergence_csv, '\n');
            for (std::size_t l = 1; l < lines.size(); ++l) {
                const auto cols = text::split(lines[l], ',');
                if (cols.size() < 3) continue;
                dual += std::string(cols[0]) + " " + std::string(cols[1]) + "\n";
                if (!cols[2].empty()) primal += std::string(cols[0]) + " " + std::string(cols[2]) + "\n";
            }
            out.files["convergence" + tag + "_dual.dat"] = dual;
            out.files["convergence" + tag + "_primal.dat"] = primal;
        }
    }
    return out;
}

inline void write_experiment(const ExperimentOutput& out, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    for (const auto& [name, contents] : out.files) write_file((std::filesystem::path(dir) / name).string(), contents);
}

}  // namespace cpark

#endif  // CPARK_EXPERIMENT_HPP
