#ifndef CPARK_ORACLE_HPP
#define CPARK_ORACLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpark/flow.hpp"
#include "cpark/model.hpp"

namespace cpark {

struct OracleLimits {
    long long max_nodes = 2'000'000;
};

namespace detail {

/// Best slot allocation for a fixed group of AVs at one facility.
struct GroupPlan {
    long long value = 0;
    std::vector<std::vector<Slot>> slots;  // parallel to the group members
};

/// Maximum occupancy of facility f by exactly the AVs in `members`, subject to
/// their windows and stays and to the per-slot bounds [demand, capacity]
/// (demand ignored when with_demand is false). The constraint matrix is a
/// network matrix, so the flow optimum is the integer optimum.
inline std::optional<GroupPlan> allocate_group(const Instance& inst, FacilityId f, const std::vector<AvId>& members,
                                               bool with_demand) {
    const int D = inst.slots();
    const int n = static_cast<int>(members.size());
    const FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
    // nodes: source, sink, one per member, one per slot
    const int source = 0;
    const int sink = 1;
    auto av_node = [](int i) { return 2 + i; };
    auto slot_node = [n](Slot t) { return 2 + n + (t - 1); };
    flow::BoundedFlow net(2 + n + D);
    std::vector<std::vector<std::pair<Slot, int>>> handles(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const AvId k = members[static_cast<std::size_t>(i)];
        const SlotInterval w = feasible_window(k, f, inst);
        net.add_edge(source, av_node(i), effective_stay(k, f, inst), w.length());
        for (Slot t = w.first; t <= w.last; ++t)
            handles[static_cast<std::size_t>(i)].emplace_back(t, net.add_edge(av_node(i), slot_node(t), 0, 1));
    }
    for (Slot t = 1; t <= D; ++t) {
        const int lower = with_demand ? fac.demand_at(t) : 0;
        if (lower > fac.capacity) return std::nullopt;
        net.add_edge(slot_node(t), sink, lower, fac.capacity);
    }
    const auto value = net.max_flow(source, sink);
    if (!value) return std::nullopt;
    GroupPlan plan;
    plan.value = *value;
    plan.slots.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (const auto& [t, h] : handles[static_cast<std::size_t>(i)])
            if (net.flow_on(h) > 0) plan.slots[static_cast<std::size_t>(i)].push_back(t);
    return plan;
}

class ExactSearch {
public:
    ExactSearch(const Instance& inst, OracleLimits limits) : inst_(inst), limits_(limits) {
        const int K = inst.num_avs();
        const int F = inst.num_facilities();
        if (K > 63) throw OracleLimit("exact search supports at most 63 AVs");
        options_.resize(static_cast<std::size_t>(K));
        best_len_.assign(static_cast<std::size_t>(K), 0);
        for (AvId k = 0; k < K; ++k) {
            options_[static_cast<std::size_t>(k)] = feasible_facilities(k, inst);
            best_len_[static_cast<std::size_t>(k)] = max_window_length(k, inst);
        }
        suffix_len_.assign(static_cast<std::size_t>(K) + 1, 0);
        for (int k = K - 1; k >= 0; --k)
            suffix_len_[static_cast<std::size_t>(k)] = suffix_len_[static_cast<std::size_t>(k) + 1] + best_len_[static_cast<std::size_t>(k)];
        members_.assign(static_cast<std::size_t>(F), 0);
        choice_.assign(static_cast<std::size_t>(K), kNoFacility);
        // potential[f][t]: AVs with index >= k that could still cover slot t at f
        potential_.assign(static_cast<std::size_t>(K) + 1, std::vector<int>(static_cast<std::size_t>(F) * inst.slots(), 0));
        for (int k = K - 1; k >= 0; --k) {
            potential_[static_cast<std::size_t>(k)] = potential_[static_cast<std::size_t>(k) + 1];
            for (FacilityId f : options_[static_cast<std::size_t>(k)]) {
                const SlotInterval w = feasible_window(k, f, inst);
                for (Slot t = w.first; t <= w.last; ++t) ++potential_[static_cast<std::size_t>(k)][cell(f, t)];
            }
        }
        covered_.assign(static_cast<std::size_t>(F) * inst.slots(), 0);
    }

    std::optional<Assignment> run() {
        for (AvId k = 0; k < inst_.num_avs(); ++k)
            if (options_[static_cast<std::size_t>(k)].empty()) return std::nullopt;
        if (!demand_reachable(0)) return std::nullopt;
        dfs(0, 0);
        if (!best_choice_) return std::nullopt;
        Assignment a(inst_.num_avs());
        for (FacilityId f = 0; f < inst_.num_facilities(); ++f) {
            const std::uint64_t mask = group_mask(*best_choice_, f);
            const GroupPlan& plan = *full_plan(f, mask);
            const std::vector<AvId> ids = ids_of(mask);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                a[ids[i]].facility = f;
                a[ids[i]].slots = plan.slots[i];
            }
        }
        return a;
    }

    long long nodes() const { return nodes_; }

private:
    std::size_t cell(FacilityId f, Slot t) const {
        return static_cast<std::size_t>(f) * static_cast<std::size_t>(inst_.slots()) + static_cast<std::size_t>(t - 1);
    }

    static std::vector<AvId> ids_of(std::uint64_t mask) {
        std::vector<AvId> ids;
        for (int k = 0; k < 64; ++k)
            if (mask & (std::uint64_t{1} << k)) ids.push_back(k);
        return ids;
    }

    static std::uint64_t group_mask(const std::vector<FacilityId>& choice, FacilityId f) {
        std::uint64_t mask = 0;
        for (std::size_t k = 0; k < choice.size(); ++k)
            if (choice[k] == f) mask |= std::uint64_t{1} << k;
        return mask;
    }

    const std::optional<GroupPlan>& full_plan(FacilityId f, std::uint64_t mask) {
        auto key = std::make_pair(f, mask);
        auto it = full_memo_.find(key);
        if (it == full_memo_.end()) it = full_memo_.emplace(key, allocate_group(inst_, f, ids_of(mask), true)).first;
        return it->second;
    }

    bool capacity_ok(FacilityId f, std::uint64_t mask) {
        auto key = std::make_pair(f, mask);
        auto it = capacity_memo_.find(key);
        if (it == capacity_memo_.end())
            it = capacity_memo_.emplace(key, allocate_group(inst_, f, ids_of(mask), false).has_value()).first;
        return it->second;
    }

    /// Every positive demand can still be met by AVs already placed at the
    /// facility plus those not yet placed.
    bool demand_reachable(AvId next) const {
        const auto& pot = potential_[static_cast<std::size_t>(next)];
        for (FacilityId f = 0; f < inst_.num_facilities(); ++f)
            for (Slot t = 1; t <= inst_.slots(); ++t)
                if (covered_[cell(f, t)] + pot[cell(f, t)] < inst_.facilities[static_cast<std::size_t>(f)].demand_at(t))
                    return false;
        return true;
    }

    void dfs(AvId k, long long placed_len) {
        if (++nodes_ > limits_.max_nodes)
            throw OracleLimit("exact search exceeded " + std::to_string(limits_.max_nodes) + " nodes");
        const int K = inst_.num_avs();
        if (best_choice_ && placed_len + suffix_len_[static_cast<std::size_t>(k)] <= best_value_) return;
        if (k == K) {
            long long value = 0;
            for (FacilityId f = 0; f < inst_.num_facilities(); ++f) {
                const auto& plan = full_plan(f, members_[static_cast<std::size_t>(f)]);
                if (!plan) return;
                value += plan->value;
            }
            if (!best_choice_ || value > best_value_) {
                best_value_ = value;
                best_choice_ = choice_;
            }
            return;
        }
        for (FacilityId f : options_[static_cast<std::size_t>(k)]) {
            std::uint64_t& group = members_[static_cast<std::size_t>(f)];
            group |= std::uint64_t{1} << k;
            const SlotInterval w = feasible_window(k, f, inst_);
            for (Slot t = w.first; t <= w.last; ++t) ++covered_[cell(f, t)];
            if (capacity_ok(f, group) && demand_reachable(k + 1)) {
                choice_[static_cast<std::size_t>(k)] = f;
                dfs(k + 1, placed_len + w.length());
            }
            for (Slot t = w.first; t <= w.last; ++t) --covered_[cell(f, t)];
            group &= ~(std::uint64_t{1} << k);
        }
        choice_[static_cast<std::size_t>(k)] = kNoFacility;
    }

    const Instance& inst_;
    OracleLimits limits_;
    std::vector<std::vector<FacilityId>> options_;
    std::vector<int> best_len_;
    std::vector<long long> suffix_len_;
    std::vector<std::uint64_t> members_;
    std::vector<FacilityId> choice_;
    std::vector<std::vector<int>> potential_;
    std::vector<int> covered_;
    std::map<std::pair<FacilityId, std::uint64_t>, std::optional<GroupPlan>> full_memo_;
    std::map<std::pair<FacilityId, std::uint64_t>, bool> capacity_memo_;
    std::optional<std::vector<FacilityId>> best_choice_;
    long long best_value_ = -1;
    long long nodes_ = 0;
};

}  // namespace detail

/// Provably optimal assignment, or nullopt when the instance has no feasible
/// assignment at all. Throws OracleLimit when the search budget runs out.
///
/// Facility choices are enumerated depth-first in AV order with bound,
/// capacity and demand pruning; for a complete choice each facility's slot
/// allocation is an exact max-flow with lower bounds. Among optimal
/// solutions the lexicographically smallest facility vector is returned.
inline std::optional<Assignment> solve_exact(const Instance& inst, OracleLimits limits = {}) {
    detail::ExactSearch search(inst, limits);
    return search.run();
}

/// True iff a is feasible and attains the exact optimum.
inline bool verify_optimal(const Instance& inst, const Assignment& a, OracleLimits limits = {}) {
    if (!check_feasibility(inst, a).empty()) return false;
    const auto best = solve_exact(inst, limits);
    return best && objective(*best) == objective(a);
}

}  // namespace cpark

#endif  // CPARK_ORACLE_HPP
