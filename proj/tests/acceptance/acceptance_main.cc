// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.
//
//   cpark_acceptance [--workdir DIR]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cpark/commands.hpp"

namespace {

using namespace cpark;

// Pinned thresholds.
constexpr int kSubproblemTrials = 1000;
constexpr int kMaxWindow = 12;
constexpr int kNearOptInstances = 25;
constexpr double kNearOptMean = 0.95;
constexpr double kNearOptMin = 0.90;
constexpr double kDualityTol = 1e-6;
constexpr int kConvergenceBudget = 100;
constexpr double kGapFraction = 0.10;
constexpr int kLossSeeds = 20;
constexpr double kLossIterFactor = 2.0;
constexpr double kLossSeedShare = 0.80;
constexpr int kScalingInstances = 10;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Suite-wide bookkeeping for criteria 3 and 7.
struct Ledger {
    long long duality_checks = 0;
    long long duality_violations = 0;
    double worst_duality_slack = 0.0;
    long long recoveries_ok = 0;
    long long recoveries_bad_output = 0;
    long long recoveries_failed = 0;
    long long failed_without_trace = 0;

    void dual_vs(double dual, double value) {
        ++duality_checks;
        const double slack = dual - value;
        worst_duality_slack = duality_checks == 1 ? slack : std::min(worst_duality_slack, slack);
        if (slack < -kDualityTol) ++duality_violations;
    }

    void run(const Instance& inst, const RunReport& r, std::optional<long long> optimum) {
        for (std::size_t i = 0; i < r.dual_series.size(); ++i) {
            if (optimum) dual_vs(r.dual_series[i], static_cast<double>(*optimum));
            if (i < r.primal_series.size() && r.primal_series[i])
                dual_vs(r.dual_series[i], static_cast<double>(*r.primal_series[i]));
            dual_vs(r.dual_series[i], static_cast<double>(objective(r.final_assignment)));
        }
        recovered(inst, r.final_assignment);
    }

    void recovered(const Instance& inst, const Assignment& a) {
        if (check_feasibility(inst, a).empty())
            ++recoveries_ok;
        else
            ++recoveries_bad_output;
    }

    void failed(const RecoveryFailed& e) {
        ++recoveries_failed;
        if (e.trace().empty()) ++failed_without_trace;
    }
};

Ledger ledger;

std::optional<RunReport> run_logged(const Instance& inst, const RunParams& params, std::uint64_t seed,
                                    std::optional<long long> optimum) {
    try {
        RunReport r = run_distributed(inst, params, seed);
        ledger.run(inst, r, optimum);
        return r;
    } catch (const RecoveryFailed& e) {
        ledger.failed(e);
        return std::nullopt;
    }
}

GeneratorConfig config(int avs, int facilities, int slots, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n_avs = avs;
    cfg.n_facilities = facilities;
    cfg.slots = slots;
    cfg.seed = seed;
    return cfg;
}

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(4);
    s << x;
    return s.str();
}

// 1. Greedy subproblem solver equals exhaustive search exactly.
Outcome subproblem_exactness() {
    Rng rng(20240601);
    int trials = 0;
    int mismatches = 0;
    for (std::uint64_t seed = 1; trials < kSubproblemTrials; ++seed) {
        const Instance inst = generate_instance(config(6, 3, kMaxWindow, seed));
        for (int round = 0; round < 3; ++round) {
            PriceVector p = PriceVector::zeros(inst);
            const bool dyadic = round % 2 == 0;
            for (FacilityId f = 0; f < inst.num_facilities(); ++f)
                for (Slot t = 1; t <= inst.slots(); ++t) {
                    if (dyadic) {
                        p.hi(f, t) = static_cast<double>(rng.uniform_int(0, 12)) * 0.25;
                        p.lo(f, t) = static_cast<double>(rng.uniform_int(0, 4)) * 0.25;
                    } else {
                        p.hi(f, t) = rng.uniform_real(0.0, 2.5);
                        p.lo(f, t) = rng.uniform_real(0.0, 1.0);
                    }
                }
            for (AvId k = 0; k < inst.num_avs(); ++k) {
                ++trials;
                if (solve_subproblem(k, inst, p) != brute_subproblem(k, inst, p, kMaxWindow)) ++mismatches;
            }
        }
    }
    return {mismatches == 0, std::to_string(trials) + " trials, " + std::to_string(mismatches) + " mismatches"};
}

// 2. Recovered distributed primal against the exact optimum. The first 25
// seeds whose instance is feasible are used.
Outcome near_optimality() {
    std::vector<double> ratios;
    int skipped = 0;
    for (std::uint64_t seed = 1; static_cast<int>(ratios.size()) < kNearOptInstances && seed < 1000; ++seed) {
        const Instance inst = generate_instance(config(8, 2, 12, seed));
        const auto best = solve_exact(inst);
        if (!best) {
            ++skipped;
            continue;
        }
        RunParams params;
        params.trace_primal = true;
        const auto r = run_logged(inst, params, seed, objective(*best));
        const double opt = static_cast<double>(objective(*best));
        const double got = r ? static_cast<double>(objective(r->final_assignment)) : 0.0;
        ratios.push_back(opt > 0.0 ? got / opt : 1.0);
    }
    if (ratios.empty()) return {false, "no feasible instance"};
    double mean = 0.0;
    for (double x : ratios) mean += x;
    mean /= static_cast<double>(ratios.size());
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const bool pass = static_cast<int>(ratios.size()) == kNearOptInstances && mean >= kNearOptMean && lo >= kNearOptMin;
    return {pass, std::to_string(ratios.size()) + " instances (" + std::to_string(skipped) +
                      " infeasible seeds skipped), mean " + fmt(mean) + ", min " + fmt(lo)};
}

// 4. Lossless convergence at default scale.
Outcome convergence_budget() {
    const Instance inst = generate_instance(config(100, 5, 100, 1));
    RunParams params;
    params.trace_primal = true;
    const auto r = run_logged(inst, params, 1, std::nullopt);
    if (!r) return {false, "recovery failed"};
    const double dual = r->dual_series.back();
    const double primal = static_cast<double>(objective(r->final_assignment));
    const double gap = dual - primal;
    const bool pass = r->converged && r->iterations <= kConvergenceBudget && gap <= kGapFraction * dual;
    return {pass, "converged=" + std::to_string(r->converged) + " iterations=" + std::to_string(r->iterations) +
                      " dual=" + fmt(dual) + " primal=" + fmt(primal) + " gap/dual=" + fmt(gap / dual)};
}

// 5. Lossy channels still converge within twice the lossless iterations.
Outcome loss_robustness() {
    const double probs[] = {0.2, 0.4, 0.8};
    int within[3] = {0, 0, 0};
    int unconverged = 0;
    for (int s = 1; s <= kLossSeeds; ++s) {
        const std::uint64_t seed = static_cast<std::uint64_t>(s);
        const Instance inst = generate_instance(config(100, 5, 100, seed));
        RunParams params;
        const auto base = run_logged(inst, params, seed, std::nullopt);
        if (!base || !base->converged) {
            ++unconverged;
            continue;
        }
        for (int i = 0; i < 3; ++i) {
            params.channel.drop_prob = probs[i];
            const auto r = run_logged(inst, params, seed, std::nullopt);
            if (!r || !r->converged) {
                ++unconverged;
                continue;
            }
            if (r->iterations <= kLossIterFactor * base->iterations) ++within[i];
        }
    }
    const int need = static_cast<int>(std::ceil(kLossSeedShare * kLossSeeds - 1e-9));
    const bool pass = unconverged == 0 && std::all_of(std::begin(within), std::end(within), [&](int w) { return w >= need; });
    return {pass, "unconverged=" + std::to_string(unconverged) + " within 2x at p=0.2/0.4/0.8: " +
                      std::to_string(within[0]) + "/" + std::to_string(within[1]) + "/" + std::to_string(within[2]) +
                      " of " + std::to_string(kLossSeeds)};
}

// 6. Coarser time scales never beat the fine optimum, and can be infeasible.
Outcome time_scaling() {
    int used = 0;
    int compared = 0;
    int worse = 0;
    int coarse_infeasible = 0;
    for (std::uint64_t seed = 1; used < kScalingInstances && seed < 1000; ++seed) {
        const Instance fine = generate_instance(config(8, 2, 20, seed));
        const auto fine_best = solve_exact(fine);
        if (!fine_best) continue;
        ++used;
        const long long fine_opt = objective(*fine_best);
        for (int slots : {10, 5}) {
            const Instance coarse = rescale_time(fine, slots);
            const auto best = solve_exact(coarse);
            if (!best) {
                if (slots == 5) ++coarse_infeasible;
                continue;
            }
            ++compared;
            // each coarse slot stands for 20 / slots fine slots
            if (objective(*best) * (20 / slots) > fine_opt) ++worse;
        }
    }
    const bool pass = used == kScalingInstances && worse == 0 && coarse_infeasible >= 1;
    return {pass, std::to_string(used) + " instances, " + std::to_string(compared) + " coarse optima compared, " +
                      std::to_string(worse) + " above the fine optimum, " + std::to_string(coarse_infeasible) +
                      " infeasible at D=5" + (compared == 0 ? " (part a holds vacuously)" : "")};
}

// Extra recovery exercise on raw subproblem replies, so that failures occur.
void recovery_sweep() {
    Rng rng(77);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const Instance inst = generate_instance(config(10, 3, 12, seed));
        PriceVector p = PriceVector::zeros(inst);
        for (FacilityId f = 0; f < inst.num_facilities(); ++f)
            for (Slot t = 1; t <= inst.slots(); ++t) {
                p.hi(f, t) = rng.uniform_real(0.0, 2.0);
                p.lo(f, t) = rng.uniform_real(0.0, 1.0);
            }
        Assignment a(inst.num_avs());
        for (AvId k = 0; k < inst.num_avs(); ++k) {
            const SubproblemResult r = solve_subproblem(k, inst, p);
            a[k] = {r.facility, r.slots};
        }
        try {
            ledger.recovered(inst, recover_primal(inst, a).assignment);
        } catch (const RecoveryFailed& e) {
            ledger.failed(e);
        }
    }
}

Outcome weak_duality() {
    return {ledger.duality_checks > 0 && ledger.duality_violations == 0,
            std::to_string(ledger.duality_checks) + " checks, " + std::to_string(ledger.duality_violations) +
                " violations, smallest slack " + fmt(ledger.worst_duality_slack)};
}

Outcome recovery_soundness() {
    return {ledger.recoveries_bad_output == 0 && ledger.failed_without_trace == 0 && ledger.recoveries_ok > 0,
            std::to_string(ledger.recoveries_ok) + " feasible outputs, " + std::to_string(ledger.recoveries_bad_output) +
                " infeasible outputs, " + std::to_string(ledger.recoveries_failed) + " failures (" +
                std::to_string(ledger.failed_without_trace) + " without trace)"};
}

// 8. Every command twice with identical flags; CSV wallclock column ignored.
std::string strip_wallclock(const std::string& csv) {
    const std::string_view header = csv.substr(0, csv.find('\n'));
    if (header.size() < 12 || header.substr(header.size() - 12) != ",wallclock_s") return csv;
    std::string out;
    for (std::string_view line : text::split(csv, '\n')) out += std::string(line.substr(0, line.rfind(','))) + "\n";
    return out;
}

Outcome determinism(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::vector<std::string> differing;
    int compared = 0;
    auto pass_dir = [&](int i) { return root / ("run" + std::to_string(i)); };
    for (int i = 1; i <= 2; ++i) {
        const fs::path dir = pass_dir(i);
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::string inst = (dir / "instance.txt").string();
        cmd_generate(config(8, 2, 12, 42), true, inst);
        cmd_generate(config(100, 5, 100, 7), true, (dir / "large.txt").string());
        for (SolverId s : {SolverId::Exact, SolverId::Distributed, SolverId::Greedy}) {
            SolverParams params;
            params.run.channel.drop_prob = 0.3;
            params.run.trace_primal = true;
            params.net_seed = 5;
            SolveFiles files;
            const std::string tag = to_string(s);
            files.assignment = (dir / (tag + "_assignment.txt")).string();
            files.convergence = (dir / (tag + "_convergence.csv")).string();
            files.repair_trace = (dir / (tag + "_trace.csv")).string();
            files.drop_bitmap = (dir / (tag + "_drops.txt")).string();
            cmd_solve(inst, s, params, files);
        }
        {
            SolveFiles files;
            files.assignment = (dir / "large_assignment.txt").string();
            files.convergence = (dir / "large_convergence.csv").string();
            SolverParams params;
            params.run.channel.drop_prob = 0.4;
            cmd_solve((dir / "large.txt").string(), SolverId::Distributed, params, files);
        }
        cmd_export_lp(inst, (dir / "model.lp").string());
        std::ostringstream log;
        for (TestId t : {TestId::ScaleAvs, TestId::ScaleFacilities, TestId::TimeScaling, TestId::Convergence,
                         TestId::CommLoss}) {
            ExperimentConfig cfg = default_experiment(t);
            cfg.seeds = 2;
            cfg.workers = 2;
            cfg.out_dir = (dir / "experiments").string();
            if (t == TestId::ScaleAvs) cfg.sweep = {4, 6};
            if (t == TestId::ScaleFacilities) cfg.sweep = {1, 2};
            if (t == TestId::TimeScaling) {
                cfg.base.slots = 20;
                cfg.sweep = {5, 10, 20};
            }
            if (t == TestId::Convergence) cfg.sweep = {30};
            if (t == TestId::CommLoss) {
                cfg.base.n_avs = 30;
                cfg.sweep = {0, 0.4};
            }
            cmd_experiment(cfg, log);
        }
    }
    for (const auto& entry : fs::recursive_directory_iterator(pass_dir(1))) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), pass_dir(1));
        const fs::path other = pass_dir(2) / rel;
        std::string a = read_file(entry.path().string());
        std::string b = fs::exists(other) ? read_file(other.string()) : std::string("<missing>");
        if (rel.extension() == ".csv") {
            a = strip_wallclock(a);
            b = strip_wallclock(b);
        }
        ++compared;
        if (a != b) differing.push_back(rel.string());
    }
    std::string detail = std::to_string(compared) + " files compared";
    if (!differing.empty()) detail += ", differing: " + differing.front();
    return {compared > 0 && differing.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    std::filesystem::path workdir = std::filesystem::temp_directory_path() / "cpark_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--workdir" && i + 1 < argc) {
            workdir = argv[++i];
        } else {
            std::cerr << "usage: cpark_acceptance [--workdir DIR]\n";
            return 4;
        }
    }

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    // 3 and 7 summarize what the other criteria recorded, so they run last.
    std::vector<Criterion> order = {
        {1, "subproblem exactness", subproblem_exactness},
        {2, "near-optimality", near_optimality},
        {4, "convergence budget", convergence_budget},
        {5, "loss robustness", loss_robustness},
        {6, "time scaling", time_scaling},
        {8, "determinism", [&] { return determinism(workdir); }},
        {3, "weak duality", weak_duality},
        {7, "recovery soundness", [] {
             recovery_sweep();
             return recovery_soundness();
         }},
    };
    std::vector<std::pair<int, std::string>> lines;
    bool all = true;
    for (const Criterion& c : order) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        all = all && o.pass;
        lines.emplace_back(c.id, "criterion " + std::to_string(c.id) + " (" + c.name + "): " + (o.pass ? "PASS" : "FAIL") +
                                     " - " + o.detail + " [" + fmt(secs) + " s]");
        std::cerr << "finished criterion " << c.id << "\n";
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [id, line] : lines) std::cout << line << "\n";
    return all ? 0 : 1;
}
