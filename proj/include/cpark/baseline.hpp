#ifndef CPARK_BASELINE_HPP
#define CPARK_BASELINE_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "cpark/model.hpp"
#include "cpark/recovery.hpp"

namespace cpark {

inline constexpr const char* kGreedyBaselineLabel = "greedy-baseline";

/// Simple comparison heuristic. AVs with longer windows go first; each takes
/// the feasible facility covering the most still-unmet demand inside its
/// window (ties: shortest round trip, then lowest id) and parks its whole
/// window there. The result is then repaired like the distributed solution.
/// Returns nullopt when some AV has no feasible facility or repair fails.
inline std::optional<Assignment> solve_greedy(const Instance& inst) {
    const int K = inst.num_avs();
    const int D = inst.slots();
    std::vector<std::pair<int, AvId>> order;
    for (AvId k = 0; k < K; ++k) order.emplace_back(-max_window_length(k, inst), k);
    std::sort(order.begin(), order.end());

    std::vector<int> counts(static_cast<std::size_t>(inst.num_facilities()) * D, 0);
    Assignment a(K);
    for (const auto& [neg_len, k] : order) {
        FacilityId best = kNoFacility;
        long long best_score = -1;
        double best_km = 0.0;
        for (FacilityId f : feasible_facilities(k, inst)) {
            const SlotInterval w = feasible_window(k, f, inst);
            long long score = 0;
            for (Slot t = w.first; t <= w.last; ++t) {
                const int unmet = inst.facilities[static_cast<std::size_t>(f)].demand_at(t) -
                                  counts[static_cast<std::size_t>(f) * D + (t - 1)];
                score += std::max(0, unmet);
            }
            const double km = round_trip_km(k, f, inst);
            if (score > best_score || (score == best_score && km < best_km)) {
                best = f;
                best_score = score;
                best_km = km;
            }
        }
        if (best == kNoFacility) return std::nullopt;
        const SlotInterval w = feasible_window(k, best, inst);
        a[k].facility = best;
        for (Slot t = w.first; t <= w.last; ++t) {
            a[k].slots.push_back(t);
            ++counts[static_cast<std::size_t>(best) * D + (t - 1)];
        }
    }
    try {
        return recover_primal(inst, a).assignment;
    } catch (const RecoveryFailed&) {
        return std::nullopt;
    }
}

}  // namespace cpark

#endif  // CPARK_BASELINE_HPP
