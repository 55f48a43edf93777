#ifndef CPARK_COORDINATOR_HPP
#define CPARK_COORDINATOR_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpark/model.hpp"
#include "cpark/netsim.hpp"
#include "cpark/recovery.hpp"
#include "cpark/subproblem.hpp"

namespace cpark {

/// Per-(facility, slot) step sizes and the diminishing cap
/// gamma_cap(i) = gamma_init * (1 - epsilon)^i.
struct StepState {
    std::vector<double> gamma_hi;
    std::vector<double> gamma_lo;
    int iteration = 0;
    double gamma_init = 0.01;
    double epsilon = 1e-3;

    static double cap_at(double gamma_init, double epsilon, int i) { return gamma_init * std::pow(1.0 - epsilon, i); }
    double cap() const { return cap_at(gamma_init, epsilon, iteration); }

    static StepState initial(const Instance& inst, double gamma_init = 0.01, double epsilon = 1e-3) {
        StepState s;
        const std::size_t cells = static_cast<std::size_t>(inst.num_facilities()) * inst.slots();
        s.gamma_hi.assign(cells, gamma_init);
        s.gamma_lo.assign(cells, gamma_init);
        s.gamma_init = gamma_init;
        s.epsilon = epsilon;
        return s;
    }
};

/// Projected subgradient step on both price families:
///   hi <- [hi - gamma_hi (c_f - total)]^+,  lo <- [lo - gamma_lo (total - rho)]^+.
/// totals is indexed f * D + (t - 1).
inline PriceVector update_prices(const PriceVector& prices, std::span<const int> totals, const Instance& inst,
                                 const StepState& steps) {
    PriceVector next = prices;
    const int D = inst.slots();
    for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
        const FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
        for (Slot t = 1; t <= D; ++t) {
            const std::size_t i = static_cast<std::size_t>(f) * D + (t - 1);
            const double total = totals[i];
            next.hi(f, t) = std::max(0.0, prices.hi(f, t) - steps.gamma_hi[i] * (fac.capacity - total));
            next.lo(f, t) = std::max(0.0, prices.lo(f, t) - steps.gamma_lo[i] * (total - fac.demand_at(t)));
        }
    }
    return next;
}

/// Advances the step sizes one iteration. A drop of the summed subproblem
/// values grows every step by 1.1, anything else shrinks it by 0.1; the
/// result is clamped to the cap of the next iteration. With fewer than two
/// history entries the steps are only clamped.
inline StepState update_steps(const StepState& steps, std::span<const double> sum_g_history) {
    StepState next = steps;
    ++next.iteration;
    double factor = 1.0;
    if (sum_g_history.size() >= 2) {
        const double diff = sum_g_history[sum_g_history.size() - 1] - sum_g_history[sum_g_history.size() - 2];
        factor = diff < 0.0 ? 1.1 : 0.1;
    }
    const double cap = next.cap();
    for (double& g : next.gamma_hi) g = std::min(g * factor, cap);
    for (double& g : next.gamma_lo) g = std::min(g * factor, cap);
    return next;
}

/// Lagrangian dual value: sum of the subproblem optima plus
/// sum over (f, t) of (hi * c_f - lo * rho_t^f).
inline double dual_objective(const PriceVector& prices, std::span<const double> g_values, const Instance& inst) {
    double total = 0.0;
    for (double g : g_values) total += g;
    for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
        const FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
        for (Slot t = 1; t <= inst.slots(); ++t)
            total += prices.hi(f, t) * fac.capacity - prices.lo(f, t) * fac.demand_at(t);
    }
    return total;
}

/// Relative change test on the summed subproblem values. A zero latest value
/// counts as converged only if the previous value was zero too.
inline bool converged(double previous, double current, double delta = 1e-5) {
    if (current == 0.0) return previous == 0.0;
    return std::fabs(current - previous) / std::fabs(current) < delta;
}

struct RunParams {
    double delta = 1e-5;
    double gamma_init = 0.01;
    double epsilon = 1e-3;
    int max_iters = 500;  // price updates; the run performs at most max_iters + 1 rounds
    ChannelModel channel;
    bool trace_primal = false;
};

struct RunReport {
    int iterations = 0;  // subproblem rounds performed
    std::vector<double> dual_series;
    std::vector<double> sum_g_series;
    std::vector<std::optional<long long>> primal_series;  // per round when traced; nullopt if repair failed
    bool converged = false;
    double simulated_delay_ms = 0.0;
    double wallclock_s = 0.0;
    NetStats net;
    std::string drop_bitmap;
    Assignment final_assignment;
    RepairTrace repair_trace;
};

inline double stale_fraction(const RunReport& r) { return stale_fraction(r.net); }

inline Assignment assignment_from(const std::vector<SubproblemResult>& results) {
    Assignment a(static_cast<int>(results.size()));
    for (const SubproblemResult& r : results) {
        a[r.av].facility = r.facility;
        a[r.av].slots = r.slots;
    }
    return a;
}

/// Distributed dual decomposition. Each round the control center broadcasts
/// prices, every AV answers with its subproblem solution, and the center
/// takes a projected subgradient step. Messages go through a lossy channel;
/// a receiver that misses a packet keeps using the last one it got.
inline RunReport run_distributed(const Instance& inst, const RunParams& params, std::uint64_t seed) {
    validate(inst);
    if (params.max_iters < 0) throw InvalidConfig("max_iters must be nonnegative");
    if (!(params.delta > 0.0)) throw InvalidConfig("delta must be positive");
    if (!(params.gamma_init > 0.0) || !(params.epsilon >= 0.0 && params.epsilon < 1.0))
        throw InvalidConfig("invalid step-size schedule");
    const auto started = std::chrono::steady_clock::now();
    const int K = inst.num_avs();
    const int D = inst.slots();

    ChannelModel channel = params.channel;
    channel.seed = seed;
    Network net(channel, K);

    std::vector<PriceVector> broadcasts{PriceVector::zeros(inst)};
    StepState steps = StepState::initial(inst, params.gamma_init, params.epsilon);
    Mailbox<int> av_inbox(K, 0);  // index into broadcasts
    SubproblemResult nothing;
    nothing.facility = kNoFacility;
    Mailbox<SubproblemResult> center_inbox(K, nothing);

    RunReport report;
    std::vector<SubproblemResult> latest(static_cast<std::size_t>(K));
    std::vector<int> versions(static_cast<std::size_t>(K));
    std::vector<double> exact_g(static_cast<std::size_t>(K));

    for (int round = 0;; ++round) {
        const int current = static_cast<int>(broadcasts.size()) - 1;
        std::fill(versions.begin(), versions.end(), current);
        net.deliver_round(std::span<const int>(versions), av_inbox, Direction::Downlink, round);

        bool all_current = true;
        for (AvId k = 0; k < K; ++k) {
            const int version = av_inbox.value(k);
            all_current = all_current && version == current;
            latest[static_cast<std::size_t>(k)] = solve_subproblem(k, inst, broadcasts[static_cast<std::size_t>(version)]);
        }
        net.deliver_round(std::span<const SubproblemResult>(latest), center_inbox, Direction::Uplink, round);
        net.end_round();

        double sum_g = 0.0;
        for (AvId k = 0; k < K; ++k) sum_g += center_inbox.value(k).value;
        report.sum_g_series.push_back(sum_g);

        const PriceVector& prices = broadcasts.back();
        for (AvId k = 0; k < K; ++k)
            exact_g[static_cast<std::size_t>(k)] = all_current ? latest[static_cast<std::size_t>(k)].value
                                                               : solve_subproblem(k, inst, prices).value;
        report.dual_series.push_back(dual_objective(prices, exact_g, inst));

        if (params.trace_primal) {
            try {
                report.primal_series.push_back(objective(recover_primal(inst, assignment_from(latest)).assignment));
            } catch (const RecoveryFailed&) {
                report.primal_series.push_back(std::nullopt);
            }
        }

        report.iterations = round + 1;
        if (round >= 1 && converged(report.sum_g_series[static_cast<std::size_t>(round) - 1], sum_g, params.delta)) {
            report.converged = true;
            break;
        }
        if (round >= params.max_iters) break;

        std::vector<int> totals(static_cast<std::size_t>(inst.num_facilities()) * D, 0);
        for (AvId k = 0; k < K; ++k) {
            const SubproblemResult& r = center_inbox.value(k);
            if (r.facility == kNoFacility) continue;
            for (Slot t : r.slots) ++totals[static_cast<std::size_t>(r.facility) * D + (t - 1)];
        }
        broadcasts.push_back(update_prices(prices, totals, inst, steps));
        steps = update_steps(steps, report.sum_g_series);
    }

    RecoveryResult recovered = recover_primal(inst, assignment_from(latest));
    report.final_assignment = std::move(recovered.assignment);
    report.repair_trace = std::move(recovered.trace);
    report.net = net.stats();
    report.simulated_delay_ms = net.stats().simulated_delay_ms;
    report.drop_bitmap = net.drop_bitmap();
    report.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

inline std::string convergence_csv(const RunReport& r) {
    std::string out = "iteration,dual,primal,gap\n";
    for (std::size_t i = 0; i < r.dual_series.size(); ++i) {
        out += std::to_string(i) + "," + text::format_double(r.dual_series[i]) + ",";
        if (i < r.primal_series.size() && r.primal_series[i]) {
            const long long p = *r.primal_series[i];
            out += std::to_string(p) + "," + text::format_double(r.dual_series[i] - static_cast<double>(p));
        } else {
            out += ",";
        }
        out += "\n";
    }
    return out;
}

inline std::string summary_line(const RunReport& r) {
    return "iterations=" + std::to_string(r.iterations) + " converged=" + (r.converged ? "1" : "0") +
           " simulated_delay_ms=" + text::format_double(r.simulated_delay_ms);
}

}  // namespace cpark

#endif  // CPARK_COORDINATOR_HPP
