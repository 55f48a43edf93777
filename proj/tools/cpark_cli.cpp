// Command-line front end: generate, solve, experiment, export-lp, check.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "cpark/commands.hpp"

namespace {

using namespace cpark;

void add_generator_flags(CLI::App* cmd, GeneratorConfig& g) {
    cmd->add_option("--avs", g.n_avs, "number of AVs");
    cmd->add_option("--facilities", g.n_facilities, "number of parking facilities");
    cmd->add_option("--slots", g.slots, "time slots in the horizon");
    cmd->add_option("--horizon-minutes", g.horizon_minutes, "horizon length in minutes");
    cmd->add_option("--area-km", g.area_km, "side of the square service area");
    cmd->add_option("--speed-kmh", g.speed_kmh, "AV travel speed");
    cmd->add_option("--dmax-min", g.dmax_min_km, "lower bound of the per-AV distance budget");
    cmd->add_option("--dmax-max", g.dmax_max_km, "upper bound of the per-AV distance budget");
    cmd->add_option("--capacity", g.capacity, "spaces per facility (0: half the AV count, rounded up)");
    cmd->add_flag("--uniform-travel", g.uniform_travel, "same travel times to every facility");
}

void add_solver_flags(CLI::App* cmd, SolverParams& p) {
    cmd->add_option("--delta", p.run.delta, "relative change threshold for convergence");
    cmd->add_option("--gamma-init", p.run.gamma_init, "initial step size");
    cmd->add_option("--epsilon", p.run.epsilon, "step-size cap decay");
    cmd->add_option("--max-iters", p.run.max_iters, "price update budget");
    cmd->add_option("--drop-prob", p.run.channel.drop_prob, "packet drop probability");
    cmd->add_option("--delay-ms", p.run.channel.per_round_delay_ms, "simulated delay per round");
    cmd->add_option("--net-seed", p.net_seed, "seed of the lossy channel");
    cmd->add_option("--max-nodes", p.limits.max_nodes, "search node budget of the exact solver");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coordinated parking of autonomous vehicles"};
    app.require_subcommand(1);

    // generate
    GeneratorConfig gen;
    std::string gen_config;
    std::string gen_out;
    std::string stay_model = "random";
    std::uint64_t gen_seed = 0;
    auto* generate = app.add_subcommand("generate", "write a random instance");
    add_generator_flags(generate, gen);
    generate->add_option("--stay-model", stay_model, "random or charging")->check(CLI::IsMember({"random", "charging"}));
    auto* seed_opt = generate->add_option("--seed", gen_seed, "generator seed (required)");
    generate->add_option("--config", gen_config, "config file; its values override flags");
    generate->add_option("--out", gen_out, "instance file")->required();

    // solve
    std::string solve_instance_path;
    std::string solver_name = "distributed";
    std::string solve_config;
    SolverParams solve_params;
    SolveFiles solve_files;
    auto* solve = app.add_subcommand("solve", "solve an instance file");
    solve->add_option("--instance", solve_instance_path, "instance file")->required();
    solve->add_option("--solver", solver_name, "exact, distributed or greedy-baseline");
    add_solver_flags(solve, solve_params);
    solve->add_option("--config", solve_config, "config file; its values override flags");
    solve->add_option("--out", solve_files.assignment, "assignment file");
    solve->add_option("--convergence", solve_files.convergence, "convergence CSV (distributed)");
    solve->add_option("--repair-trace", solve_files.repair_trace, "repair trace CSV (distributed)");
    solve->add_option("--drop-bitmap", solve_files.drop_bitmap, "dropped packet bitmap (distributed)");
    solve->add_flag("--trace-primal", solve_params.run.trace_primal, "recover a primal value every iteration");

    // experiment
    std::string test_name;
    std::vector<double> sweep;
    std::vector<std::string> solver_names;
    std::string exp_config;
    ExperimentConfig exp;
    GeneratorConfig exp_gen;
    int seeds = 0;
    std::uint64_t first_seed = 1;
    std::string exp_out = "results";
    int workers = 0;
    auto* experiment = app.add_subcommand("experiment", "run a parameter sweep and write CSV files");
    experiment->add_option("--test", test_name, "scale-avs, scale-facilities, time-scaling, convergence or comm-loss");
    experiment->add_option("--sweep", sweep, "sweep values (defaults depend on the test)");
    experiment->add_option("--seeds", seeds, "seeds per sweep point");
    experiment->add_option("--first-seed", first_seed, "first instance seed");
    experiment->add_option("--solvers", solver_names, "subset of exact, distributed, greedy-baseline");
    experiment->add_option("--out", exp_out, "output directory");
    experiment->add_option("--workers", workers, "parallel jobs (0: one per hardware thread)");
    experiment->add_option("--config", exp_config, "config file; its values override flags");
    auto* exp_avs = experiment->add_option("--avs", exp_gen.n_avs, "number of AVs");
    auto* exp_fac = experiment->add_option("--facilities", exp_gen.n_facilities, "number of facilities");
    auto* exp_slots = experiment->add_option("--slots", exp_gen.slots, "time slots");
    SolverParams exp_params;
    add_solver_flags(experiment, exp_params);

    // export-lp
    std::string lp_instance;
    std::string lp_out;
    auto* export_lp_cmd = app.add_subcommand("export-lp", "write the integer program in LP format");
    export_lp_cmd->add_option("--instance", lp_instance, "instance file")->required();
    export_lp_cmd->add_option("--out", lp_out, "LP file")->required();

    // check
    std::string check_instance;
    std::string check_assignment;
    auto* check = app.add_subcommand("check", "report constraint violations of an assignment");
    check->add_option("--instance", check_instance, "instance file")->required();
    check->add_option("--assignment", check_assignment, "assignment file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::Config);
    }

    return run_guarded(
        [&]() -> int {
            if (generate->parsed()) {
                gen.seed = gen_seed;
                bool seed_set = seed_opt->count() > 0;
                gen.stay_model = stay_model == "charging" ? StayModel::Charging : StayModel::Random;
                if (!gen_config.empty()) {
                    const KvDocument doc = read_config(gen_config);
                    if (const KvSection* sec = doc.find("generator")) apply_generator_section(*sec, gen, seed_set);
                }
                cmd_generate(gen, seed_set, gen_out);
                return 0;
            }
            if (solve->parsed()) {
                const SolverId solver = parse_solver(solver_name);
                if (!solve_config.empty()) {
                    const KvDocument doc = read_config(solve_config);
                    if (const KvSection* sec = doc.find("solver")) apply_solver_section(*sec, solve_params);
                }
                std::cout << cmd_solve(solve_instance_path, solver, solve_params, solve_files) << "\n";
                return 0;
            }
            if (experiment->parsed()) {
                KvDocument doc;
                if (!exp_config.empty()) doc = read_config(exp_config);
                const KvSection* exp_sec = doc.find("experiment");
                if (test_name.empty() && exp_sec && exp_sec->find("test")) test_name = exp_sec->at("test");
                if (test_name.empty()) throw InvalidConfig("--test is required");
                exp = default_experiment(parse_test_id(test_name));
                if (!sweep.empty()) exp.sweep = sweep;
                if (seeds > 0) exp.seeds = seeds;
                exp.first_seed = first_seed;
                if (!solver_names.empty()) {
                    exp.solvers.clear();
                    for (const std::string& s : solver_names) exp.solvers.push_back(parse_solver(s));
                }
                exp.out_dir = exp_out;
                exp.workers = workers;
                if (exp_avs->count()) exp.base.n_avs = exp_gen.n_avs;
                if (exp_fac->count()) exp.base.n_facilities = exp_gen.n_facilities;
                if (exp_slots->count()) exp.base.slots = exp_gen.slots;
                exp.solver = exp_params;
                if (exp_sec) apply_experiment_section(*exp_sec, exp);
                bool unused = false;
                if (const KvSection* sec = doc.find("generator")) apply_generator_section(*sec, exp.base, unused);
                if (const KvSection* sec = doc.find("solver")) apply_solver_section(*sec, exp.solver);
                cmd_experiment(exp, std::cout);
                return 0;
            }
            if (export_lp_cmd->parsed()) {
                cmd_export_lp(lp_instance, lp_out);
                return 0;
            }
            if (check->parsed()) {
                const auto [ok, csv] = cmd_check(check_instance, check_assignment);
                std::cout << csv;
                return ok ? 0 : static_cast<int>(ExitCode::Infeasible);
            }
            return static_cast<int>(ExitCode::Config);
        },
        std::cerr);
}
