#ifndef CPARK_SUBPROBLEM_HPP
#define CPARK_SUBPROBLEM_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpark/model.hpp"

namespace cpark {

/// Shadow prices per (facility, slot): hi prices parking space (capacity
/// side), lo pays for V2G service (demand side). Both stay nonnegative.
class PriceVector {
public:
    PriceVector() = default;
    PriceVector(int facilities, int slots)
        : facilities_(facilities),
          slots_(slots),
          hi_(static_cast<std::size_t>(facilities) * slots, 0.0),
          lo_(static_cast<std::size_t>(facilities) * slots, 0.0) {}

    static PriceVector zeros(const Instance& inst) { return PriceVector(inst.num_facilities(), inst.slots()); }

    int facilities() const { return facilities_; }
    int slots() const { return slots_; }

    double& hi(FacilityId f, Slot t) { return hi_[index(f, t)]; }
    double hi(FacilityId f, Slot t) const { return hi_[index(f, t)]; }
    double& lo(FacilityId f, Slot t) { return lo_[index(f, t)]; }
    double lo(FacilityId f, Slot t) const { return lo_[index(f, t)]; }

    bool nonnegative() const {
        return std::all_of(hi_.begin(), hi_.end(), [](double v) { return v >= 0.0; }) &&
               std::all_of(lo_.begin(), lo_.end(), [](double v) { return v >= 0.0; });
    }

    bool operator==(const PriceVector&) const = default;

private:
    std::size_t index(FacilityId f, Slot t) const {
        return static_cast<std::size_t>(f) * static_cast<std::size_t>(slots_) + static_cast<std::size_t>(t - 1);
    }

    int facilities_ = 0;
    int slots_ = 0;
    std::vector<double> hi_;
    std::vector<double> lo_;
};

/// Net reward of parking one slot: 1 - hi + lo.
inline double slot_coefficient(FacilityId f, Slot t, const PriceVector& prices) {
    return 1.0 - prices.hi(f, t) + prices.lo(f, t);
}

/// One AV's optimal reply to a price vector; value is g_k.
struct SubproblemResult {
    AvId av = 0;
    FacilityId facility = kNoFacility;
    std::vector<Slot> slots;
    double value = 0.0;

    bool operator==(const SubproblemResult&) const = default;
};

namespace detail {

/// Sum taken in ascending slot order so that equal selections give bitwise
/// equal values regardless of how they were found.
inline double selection_value(const std::vector<Slot>& slots, FacilityId f, const PriceVector& prices) {
    double sum = 0.0;
    for (Slot t : slots) sum += slot_coefficient(f, t, prices);
    return sum;
}

}  // namespace detail

/// Exact maximizer of the per-AV Lagrangian subproblem.
///
/// For a fixed facility the problem is: choose at least m_stay slots of the
/// window maximizing the sum of their coefficients. Taking every nonnegative
/// slot and topping up with the largest negative ones is optimal. Zero slots
/// are kept for occupancy. Ties: lowest facility, then lowest slot index.
inline SubproblemResult solve_subproblem(AvId k, const Instance& inst, const PriceVector& prices) {
    SubproblemResult best;
    best.av = k;
    bool found = false;
    std::vector<std::pair<double, Slot>> negatives;
    for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
        if (!facility_feasible(k, f, inst)) continue;
        const SlotInterval w = feasible_window(k, f, inst);
        const int stay = inst.plan(k, f).m_stay;
        std::vector<Slot> chosen;
        negatives.clear();
        for (Slot t = w.first; t <= w.last; ++t) {
            const double c = slot_coefficient(f, t, prices);
            if (c >= 0.0)
                chosen.push_back(t);
            else
                negatives.emplace_back(c, t);
        }
        const int missing = stay - static_cast<int>(chosen.size());
        if (missing > 0) {
            std::partial_sort(negatives.begin(), negatives.begin() + missing, negatives.end(),
                              [](const auto& a, const auto& b) {
                                  return a.first != b.first ? a.first > b.first : a.second < b.second;
                              });
            for (int i = 0; i < missing; ++i) chosen.push_back(negatives[static_cast<std::size_t>(i)].second);
            std::sort(chosen.begin(), chosen.end());
        }
        const double value = detail::selection_value(chosen, f, prices);
        if (!found || value > best.value) {
            found = true;
            best.facility = f;
            best.slots = std::move(chosen);
            best.value = value;
        }
    }
    if (!found) throw AvInfeasible(k);
    return best;
}

inline constexpr int kBruteForceMaxWindow = 20;

/// Exhaustive twin of solve_subproblem over every (facility, slot subset)
/// pair. Same tie rules: value, then larger subset, then lexicographically
/// smallest slot list; across facilities the lowest id wins ties.
inline SubproblemResult brute_subproblem(AvId k, const Instance& inst, const PriceVector& prices,
                                         int max_window = kBruteForceMaxWindow) {
    SubproblemResult best;
    best.av = k;
    bool found = false;
    for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
        if (round_trip_km(k, f, inst) > inst.avs[static_cast<std::size_t>(k)].d_max) continue;
        const SlotInterval w = feasible_window(k, f, inst);
        const int len = w.length();
        const int stay = inst.plan(k, f).m_stay;
        if (stay < 1 || len < stay) continue;
        if (len > max_window)
            throw OracleLimit("window of " + std::to_string(len) + " slots exceeds brute-force bound " +
                              std::to_string(max_window));
        bool have = false;
        std::vector<Slot> facility_best;
        double facility_value = 0.0;
        std::vector<Slot> subset;
        for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
            if (__builtin_popcount(mask) < stay) continue;
            subset.clear();
            for (int b = 0; b < len; ++b)
                if (mask & (1u << b)) subset.push_back(w.first + b);
            const double value = detail::selection_value(subset, f, prices);
            bool better = !have || value > facility_value;
            if (have && value == facility_value) {
                if (subset.size() != facility_best.size())
                    better = subset.size() > facility_best.size();
                else
                    better = subset < facility_best;
            }
            if (better) {
                have = true;
                facility_best = subset;
                facility_value = value;
            }
        }
        if (!found || facility_value > best.value) {
            found = true;
            best.facility = f;
            best.slots = std::move(facility_best);
            best.value = facility_value;
        }
    }
    if (!found) throw AvInfeasible(k);
    return best;
}

inline std::string subproblem_csv_header() { return "av,facility,slots,value"; }

inline std::string to_csv(const SubproblemResult& r) {
    std::string slots;
    for (std::size_t i = 0; i < r.slots.size(); ++i) slots += (i ? " " : "") + std::to_string(r.slots[i]);
    return std::to_string(r.av) + "," + std::to_string(r.facility) + "," + slots + "," +
           text::format_double(r.value);
}

}  // namespace cpark

#endif  // CPARK_SUBPROBLEM_HPP
