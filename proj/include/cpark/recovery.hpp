#ifndef CPARK_RECOVERY_HPP
#define CPARK_RECOVERY_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpark/model.hpp"

namespace cpark {

enum class MoveKind { DeficitMove, OverflowRemove, Reassign, Stuck };

inline const char* to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::DeficitMove: return "DeficitMove";
        case MoveKind::OverflowRemove: return "OverflowRemove";
        case MoveKind::Reassign: return "Reassign";
        case MoveKind::Stuck: return "Stuck";
    }
    return "?";
}

/// One repair step. slots holds the AV's complete slot set after the move.
/// A Stuck entry terminates a failed repair: from/to name the facility and
/// slots the single offending slot; it carries no AV.
struct RepairMove {
    MoveKind kind = MoveKind::DeficitMove;
    AvId av = -1;
    FacilityId from = kNoFacility;
    FacilityId to = kNoFacility;
    std::vector<Slot> slots;

    bool operator==(const RepairMove&) const = default;
};

struct RepairTrace {
    std::vector<RepairMove> moves;

    bool empty() const { return moves.empty(); }
    std::size_t size() const { return moves.size(); }
};

class RecoveryFailed : public InstanceInfeasible {
public:
    RecoveryFailed(const std::string& what, FacilityId f, Slot t, RepairTrace trace)
        : InstanceInfeasible(what), facility_(f), slot_(t), trace_(std::move(trace)) {}

    FacilityId facility() const noexcept { return facility_; }
    Slot slot() const noexcept { return slot_; }
    const RepairTrace& trace() const noexcept { return trace_; }

private:
    FacilityId facility_;
    Slot slot_;
    RepairTrace trace_;
};

struct RecoveryResult {
    Assignment assignment;
    RepairTrace trace;
};

inline Assignment replay(Assignment a, const RepairTrace& trace) {
    for (const RepairMove& m : trace.moves) {
        if (m.kind == MoveKind::Stuck) continue;
        a[m.av].facility = m.to;
        a[m.av].slots = m.slots;
    }
    return a;
}

inline std::string trace_csv_header() { return "step,kind,av,from,to,slots"; }

inline std::string to_csv(const RepairTrace& trace) {
    std::string out = trace_csv_header() + "\n";
    for (std::size_t i = 0; i < trace.moves.size(); ++i) {
        const RepairMove& m = trace.moves[i];
        std::string slots;
        for (std::size_t j = 0; j < m.slots.size(); ++j) slots += (j ? " " : "") + std::to_string(m.slots[j]);
        out += std::to_string(i) + "," + to_string(m.kind) + "," + std::to_string(m.av) + "," + std::to_string(m.from) +
               "," + std::to_string(m.to) + "," + slots + "\n";
    }
    return out;
}

namespace detail {

class RepairState {
public:
    RepairState(const Instance& inst, Assignment a) : inst_(inst), a_(std::move(a)), counts_(occupancy(inst, a_)) {}

    const Assignment& assignment() const { return a_; }
    RepairTrace& trace() { return trace_; }

    int count(FacilityId f, Slot t) const { return counts_[index(f, t)]; }
    int demand(FacilityId f, Slot t) const { return inst_.facilities[static_cast<std::size_t>(f)].demand_at(t); }
    int capacity(FacilityId f) const { return inst_.facilities[static_cast<std::size_t>(f)].capacity; }

    /// Largest positive demand deficit, lowest (f, t) on ties.
    std::optional<std::pair<FacilityId, Slot>> worst_deficit() const { return worst([this](FacilityId f, Slot t) { return demand(f, t) - count(f, t); }); }

    std::optional<std::pair<FacilityId, Slot>> worst_overflow() const { return worst([this](FacilityId f, Slot t) { return count(f, t) - capacity(f); }); }

    /// Removing the AV from these slots of f leaves every one at or above demand.
    bool removal_safe(FacilityId f, const std::vector<Slot>& slots) const {
        if (f == kNoFacility) return true;
        return std::all_of(slots.begin(), slots.end(), [&](Slot t) { return count(f, t) - 1 >= demand(f, t); });
    }

    void apply(MoveKind kind, AvId k, FacilityId to, std::vector<Slot> slots) {
        AvAssignment& cur = a_[k];
        const FacilityId from = cur.facility;
        shift(cur, -1);
        cur.facility = to;
        cur.slots = std::move(slots);
        shift(cur, +1);
        trace_.moves.push_back({kind, k, from, to, cur.slots});
    }

    [[noreturn]] void fail(const std::string& why, FacilityId f, Slot t) {
        trace_.moves.push_back({MoveKind::Stuck, -1, f, f, {t}});
        throw RecoveryFailed(why + " at facility " + std::to_string(f) + ", slot " + std::to_string(t), f, t, trace_);
    }

private:
    std::size_t index(FacilityId f, Slot t) const {
        return static_cast<std::size_t>(f) * static_cast<std::size_t>(inst_.slots()) + static_cast<std::size_t>(t - 1);
    }

    void shift(const AvAssignment& av, int delta) {
        if (av.facility == kNoFacility) return;
        for (Slot t : av.slots)
            if (t >= 1 && t <= inst_.slots()) counts_[index(av.facility, t)] += delta;
    }

    template <class Gap>
    std::optional<std::pair<FacilityId, Slot>> worst(Gap gap) const {
        std::optional<std::pair<FacilityId, Slot>> best;
        int best_gap = 0;
        for (FacilityId f = 0; f < inst_.num_facilities(); ++f)
            for (Slot t = 1; t <= inst_.slots(); ++t) {
                const int g = gap(f, t);
                if (g > best_gap) {
                    best_gap = g;
                    best = std::make_pair(f, t);
                }
            }
        return best;
    }

    const Instance& inst_;
    Assignment a_;
    std::vector<int> counts_;
    RepairTrace trace_;
};

inline std::vector<Slot> full_window(AvId k, FacilityId f, const Instance& inst) {
    const SlotInterval w = feasible_window(k, f, inst);
    std::vector<Slot> slots;
    for (Slot t = w.first; t <= w.last; ++t) slots.push_back(t);
    return slots;
}

/// Fixes the deficit at (f, t) by moving the free AV with the longest
/// possible stay at f onto its whole window there.
inline void repair_deficit(RepairState& st, const Instance& inst, FacilityId f, Slot t) {
    std::optional<AvId> chosen;
    int chosen_len = -1;
    for (AvId k = 0; k < inst.num_avs(); ++k) {
        if (!facility_feasible(k, f, inst)) continue;
        const SlotInterval w = feasible_window(k, f, inst);
        if (!w.contains(t)) continue;
        const AvAssignment& cur = st.assignment()[k];
        if (cur.facility == f && std::binary_search(cur.slots.begin(), cur.slots.end(), t)) continue;
        std::vector<Slot> removed;
        if (cur.facility == f) {
            for (Slot s : cur.slots)
                if (!w.contains(s)) removed.push_back(s);
        } else {
            removed = cur.slots;
        }
        if (!st.removal_safe(cur.facility, removed)) continue;
        if (w.length() > chosen_len) {
            chosen = k;
            chosen_len = w.length();
        }
    }
    if (!chosen) st.fail("no free AV can cover the demand deficit", f, t);
    st.apply(MoveKind::DeficitMove, *chosen, f, full_window(*chosen, f, inst));
}

/// m_stay least-loaded window slots of f that still have spare capacity, or
/// nothing when there are too few.
inline std::optional<std::vector<Slot>> spare_slots(const RepairState& st, const Instance& inst, AvId k, FacilityId f) {
    if (!facility_feasible(k, f, inst)) return std::nullopt;
    const SlotInterval w = feasible_window(k, f, inst);
    std::vector<std::pair<int, Slot>> open;
    for (Slot t = w.first; t <= w.last; ++t)
        if (st.count(f, t) < st.capacity(f)) open.emplace_back(st.count(f, t), t);
    const int stay = inst.plan(k, f).m_stay;
    if (static_cast<int>(open.size()) < stay) return std::nullopt;
    std::sort(open.begin(), open.end());
    std::vector<Slot> slots;
    for (int i = 0; i < stay; ++i) slots.push_back(open[static_cast<std::size_t>(i)].second);
    std::sort(slots.begin(), slots.end());
    return slots;
}

/// Fixes the overflow at (f, t): the AV with the shortest possible stay at f
/// that can give way drops slot t, or, when that would break its minimum
/// stay, moves to another facility.
inline void repair_overflow(RepairState& st, const Instance& inst, FacilityId f, Slot t) {
    std::vector<std::pair<int, AvId>> order;
    for (AvId k = 0; k < inst.num_avs(); ++k) {
        const AvAssignment& cur = st.assignment()[k];
        if (cur.facility != f || !std::binary_search(cur.slots.begin(), cur.slots.end(), t)) continue;
        order.emplace_back(feasible_window(k, f, inst).length(), k);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [len, k] : order) {
        const AvAssignment& cur = st.assignment()[k];
        std::vector<Slot> kept;
        for (Slot s : cur.slots)
            if (s != t) kept.push_back(s);
        if (static_cast<int>(kept.size()) >= effective_stay(k, f, inst)) {
            st.apply(MoveKind::OverflowRemove, k, f, std::move(kept));
            return;
        }
        if (!st.removal_safe(f, cur.slots)) continue;
        for (FacilityId g = 0; g < inst.num_facilities(); ++g) {
            if (g == f) continue;
            if (auto slots = spare_slots(st, inst, k, g)) {
                st.apply(MoveKind::Reassign, k, g, std::move(*slots));
                return;
            }
        }
    }
    st.fail("no AV can give way to resolve the capacity overflow", f, t);
}

}  // namespace detail

/// Turns per-AV subproblem solutions into an assignment that also meets every
/// demand and capacity bound. Deficits are repaired first, largest first;
/// overflows after, and any deficit reappearing sends the loop back to the
/// deficit rule. Throws RecoveryFailed carrying the trace so far.
inline RecoveryResult recover_primal(const Instance& inst, const Assignment& a0) {
    detail::RepairState st(inst, a0);
    const long long cap = static_cast<long long>(inst.num_avs()) * inst.num_facilities() * inst.slots();
    long long moves = 0;
    while (true) {
        const auto deficit = st.worst_deficit();
        const auto overflow = deficit ? std::nullopt : st.worst_overflow();
        if (!deficit && !overflow) break;
        const auto [f, t] = deficit ? *deficit : *overflow;
        if (++moves > cap) st.fail("repair move budget exhausted", f, t);
        if (deficit)
            detail::repair_deficit(st, inst, f, t);
        else
            detail::repair_overflow(st, inst, f, t);
    }
    // the repair only touches coupling rows; per-AV rows must already hold
    const auto violations = check_feasibility(inst, st.assignment());
    if (!violations.empty()) {
        const Violation& v = violations.front();
        st.fail(std::string("input violates per-AV constraint ") + to_string(v.kind), v.facility, v.slot);
    }
    return RecoveryResult{st.assignment(), std::move(st.trace())};
}

}  // namespace cpark

#endif  // CPARK_RECOVERY_HPP
