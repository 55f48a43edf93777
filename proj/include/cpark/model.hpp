#ifndef CPARK_MODEL_HPP
#define CPARK_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cpark/instance.hpp"
#include "cpark/text.hpp"

namespace cpark {

/// Facility choice and occupied slots of one AV. Slots are sorted and unique.
struct AvAssignment {
    FacilityId facility = kNoFacility;
    std::vector<Slot> slots;

    bool operator==(const AvAssignment&) const = default;
};

/// Sparse form of the x/y decision variables: x_kt^f = 1 iff f is the AV's
/// facility and t is one of its slots.
struct Assignment {
    std::vector<AvAssignment> avs;

    Assignment() = default;
    explicit Assignment(int num_avs) : avs(static_cast<std::size_t>(num_avs)) {}

    AvAssignment& operator[](AvId k) { return avs[static_cast<std::size_t>(k)]; }
    const AvAssignment& operator[](AvId k) const { return avs[static_cast<std::size_t>(k)]; }
    int size() const { return static_cast<int>(avs.size()); }

    bool operator==(const Assignment&) const = default;
};

inline SlotInterval feasible_window(AvId k, FacilityId f, const Instance& inst) {
    const TravelPlan& p = inst.plan(k, f);
    return window_bounds(inst.avs[static_cast<std::size_t>(k)], p.m_to, p.m_back, inst.slots());
}

inline double round_trip_km(AvId k, FacilityId f, const Instance& inst) {
    const AvSpec& av = inst.avs[static_cast<std::size_t>(k)];
    const int node = inst.facilities[static_cast<std::size_t>(f)].node;
    return inst.distances(av.start_node, node) + inst.distances(node, av.return_node);
}

/// Required stay as used by the constraints; an undefined stay still demands one slot.
inline int effective_stay(AvId k, FacilityId f, const Instance& inst) {
    return std::max(1, inst.plan(k, f).m_stay);
}

inline bool facility_feasible(AvId k, FacilityId f, const Instance& inst) {
    if (round_trip_km(k, f, inst) > inst.avs[static_cast<std::size_t>(k)].d_max) return false;
    const int stay = inst.plan(k, f).m_stay;
    return stay >= 1 && feasible_window(k, f, inst).length() >= stay;
}

inline std::vector<FacilityId> feasible_facilities(AvId k, const Instance& inst) {
    std::vector<FacilityId> out;
    for (FacilityId f = 0; f < inst.num_facilities(); ++f)
        if (facility_feasible(k, f, inst)) out.push_back(f);
    return out;
}

/// Longest window over the AV's feasible facilities, 0 when there is none.
inline int max_window_length(AvId k, const Instance& inst) {
    int best = 0;
    for (FacilityId f = 0; f < inst.num_facilities(); ++f)
        if (facility_feasible(k, f, inst)) best = std::max(best, feasible_window(k, f, inst).length());
    return best;
}

/// Total occupancy, sum over AVs of the number of parked slots.
inline long long objective(const Assignment& a) {
    long long total = 0;
    for (const AvAssignment& av : a.avs) total += static_cast<long long>(av.slots.size());
    return total;
}

/// Per-(facility, slot) parked counts; index f * D + (t - 1). Slots outside
/// 1..D are ignored.
inline std::vector<int> occupancy(const Instance& inst, const Assignment& a) {
    const int D = inst.slots();
    std::vector<int> counts(static_cast<std::size_t>(inst.num_facilities()) * D, 0);
    for (const AvAssignment& av : a.avs) {
        if (av.facility == kNoFacility) continue;
        for (Slot t : av.slots)
            if (t >= 1 && t <= D) ++counts[static_cast<std::size_t>(av.facility) * D + (t - 1)];
    }
    return counts;
}

enum class ViolationKind { OneFacility, MinStay, Distance, WindowBefore, WindowAfter, DemandDeficit, CapacityOverflow };

inline const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::OneFacility: return "OneFacility";
        case ViolationKind::MinStay: return "MinStay";
        case ViolationKind::Distance: return "Distance";
        case ViolationKind::WindowBefore: return "WindowBefore";
        case ViolationKind::WindowAfter: return "WindowAfter";
        case ViolationKind::DemandDeficit: return "DemandDeficit";
        case ViolationKind::CapacityOverflow: return "CapacityOverflow";
    }
    return "?";
}

/// One violated constraint instance. Per-AV kinds set av; per-slot kinds set
/// facility and slot.
struct Violation {
    ViolationKind kind = ViolationKind::OneFacility;
    AvId av = -1;
    FacilityId facility = kNoFacility;
    Slot slot = 0;
    int magnitude = 1;

    bool operator==(const Violation&) const = default;
};

inline std::string violation_csv_header() { return "kind,av,facility,slot,magnitude"; }

inline std::string to_csv(const Violation& v) {
    return std::string(to_string(v.kind)) + "," + std::to_string(v.av) + "," + std::to_string(v.facility) + "," +
           std::to_string(v.slot) + "," + std::to_string(v.magnitude);
}

/// Every violated constraint of the formulation. Empty iff the assignment is feasible.
inline std::vector<Violation> check_feasibility(const Instance& inst, const Assignment& a) {
    if (a.size() != inst.num_avs()) throw InvalidConfig("assignment does not cover every AV");
    std::vector<Violation> out;
    for (AvId k = 0; k < inst.num_avs(); ++k) {
        const AvAssignment& av = a[k];
        if (!std::is_sorted(av.slots.begin(), av.slots.end()) ||
            std::adjacent_find(av.slots.begin(), av.slots.end()) != av.slots.end())
            throw InvalidConfig("slots of AV " + std::to_string(k) + " must be sorted and unique");
        if (av.facility == kNoFacility) {
            out.push_back({ViolationKind::OneFacility, k, kNoFacility, 0, 1});
            if (!av.slots.empty()) throw InvalidConfig("AV " + std::to_string(k) + " has slots but no facility");
            continue;
        }
        const FacilityId f = av.facility;
        if (f < 0 || f >= inst.num_facilities()) throw InvalidConfig("facility id out of range");
        const double excess = round_trip_km(k, f, inst) - inst.avs[static_cast<std::size_t>(k)].d_max;
        if (excess > 0.0) out.push_back({ViolationKind::Distance, k, f, 0, std::max(1, static_cast<int>(std::ceil(excess)))});
        const AvSpec& spec = inst.avs[static_cast<std::size_t>(k)];
        const Slot upper = std::min(spec.t_end - inst.plan(k, f).m_back - 1, inst.slots());
        const Slot lower = spec.t_start + inst.plan(k, f).m_to;
        int before = 0;
        int after = 0;
        for (Slot t : av.slots) {
            if (t < std::max(lower, 1))
                ++before;
            else if (t > upper)
                ++after;
        }
        if (before > 0) out.push_back({ViolationKind::WindowBefore, k, f, 0, before});
        if (after > 0) out.push_back({ViolationKind::WindowAfter, k, f, 0, after});
        const int stay = effective_stay(k, f, inst);
        const int held = static_cast<int>(av.slots.size());
        if (held < stay) out.push_back({ViolationKind::MinStay, k, f, 0, stay - held});
    }
    const int D = inst.slots();
    const std::vector<int> counts = occupancy(inst, a);
    for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
        const FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
        for (Slot t = 1; t <= D; ++t) {
            const int n = counts[static_cast<std::size_t>(f) * D + (t - 1)];
            if (n < fac.demand_at(t)) out.push_back({ViolationKind::DemandDeficit, -1, f, t, fac.demand_at(t) - n});
            if (n > fac.capacity) out.push_back({ViolationKind::CapacityOverflow, -1, f, t, n - fac.capacity});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// LP export

enum class RowSense { Le, Ge, Eq };

struct LpTerm {
    double coef = 1.0;
    std::string var;
};

struct LpRow {
    std::string name;
    std::vector<LpTerm> terms;
    RowSense sense = RowSense::Le;
    double rhs = 0.0;
};

/// Instantiated integer program: maximize the sum of objective_vars subject
/// to rows, all variables binary.
struct LpModel {
    std::vector<std::string> objective_vars;
    std::vector<LpRow> rows;
    std::vector<std::string> binaries;
};

inline std::string x_var(AvId k, FacilityId f, Slot t) {
    return "x_" + std::to_string(k) + "_" + std::to_string(f) + "_" + std::to_string(t);
}
inline std::string y_var(AvId k, FacilityId f) { return "y_" + std::to_string(k) + "_" + std::to_string(f); }

/// Big-M of the stay upper bound; any value above the window length works.
inline int big_m(const Instance& inst) { return inst.slots() + 1; }

inline LpModel build_lp(const Instance& inst) {
    const int K = inst.num_avs();
    const int F = inst.num_facilities();
    const int D = inst.slots();
    LpModel lp;
    for (AvId k = 0; k < K; ++k)
        for (FacilityId f = 0; f < F; ++f)
            for (Slot t = 1; t <= D; ++t) lp.objective_vars.push_back(x_var(k, f, t));

    auto suffix = [](std::initializer_list<int> ids) {
        std::string s;
        for (int id : ids) s += "_" + std::to_string(id);
        return s;
    };
    for (AvId k = 0; k < K; ++k) {
        LpRow one{"c3" + suffix({k}), {}, RowSense::Eq, 1.0};
        for (FacilityId f = 0; f < F; ++f) one.terms.push_back({1.0, y_var(k, f)});
        lp.rows.push_back(std::move(one));
    }
    for (AvId k = 0; k < K; ++k) {
        const AvSpec& av = inst.avs[static_cast<std::size_t>(k)];
        for (FacilityId f = 0; f < F; ++f) {
            const TravelPlan& p = inst.plan(k, f);
            LpRow lo{"c4lo" + suffix({k, f}), {}, RowSense::Ge, 0.0};
            LpRow hi{"c4hi" + suffix({k, f}), {}, RowSense::Le, 0.0};
            for (Slot t = 1; t <= D; ++t) {
                lo.terms.push_back({1.0, x_var(k, f, t)});
                hi.terms.push_back({1.0, x_var(k, f, t)});
            }
            lo.terms.push_back({-static_cast<double>(effective_stay(k, f, inst)), y_var(k, f)});
            hi.terms.push_back({-static_cast<double>(big_m(inst)), y_var(k, f)});
            lp.rows.push_back(std::move(lo));
            lp.rows.push_back(std::move(hi));

            lp.rows.push_back({"c7" + suffix({k, f}), {{round_trip_km(k, f, inst), y_var(k, f)}}, RowSense::Le, av.d_max});

            const Slot before_last = std::min(av.t_start - 1 + p.m_to, D);
            if (before_last >= 1) {
                LpRow row{"c10" + suffix({k, f}), {}, RowSense::Eq, 0.0};
                for (Slot t = 1; t <= before_last; ++t) row.terms.push_back({1.0, x_var(k, f, t)});
                lp.rows.push_back(std::move(row));
            }
            if (av.t_end - p.m_back <= D) {
                LpRow row{"c11" + suffix({k, f}), {}, RowSense::Eq, 0.0};
                for (Slot t = std::max(1, av.t_end - p.m_back); t <= D; ++t) row.terms.push_back({1.0, x_var(k, f, t)});
                lp.rows.push_back(std::move(row));
            }
        }
    }
    for (FacilityId f = 0; f < F; ++f) {
        const FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
        for (Slot t = 1; t <= D; ++t) {
            LpRow lo{"c12lo" + suffix({f, t}), {}, RowSense::Ge, static_cast<double>(fac.demand_at(t))};
            LpRow hi{"c12hi" + suffix({f, t}), {}, RowSense::Le, static_cast<double>(fac.capacity)};
            for (AvId k = 0; k < K; ++k) {
                lo.terms.push_back({1.0, x_var(k, f, t)});
                hi.terms.push_back({1.0, x_var(k, f, t)});
            }
            lp.rows.push_back(std::move(lo));
            lp.rows.push_back(std::move(hi));
        }
    }
    for (AvId k = 0; k < K; ++k)
        for (FacilityId f = 0; f < F; ++f) {
            lp.binaries.push_back(y_var(k, f));
            for (Slot t = 1; t <= D; ++t) lp.binaries.push_back(x_var(k, f, t));
        }
    return lp;
}

namespace detail {

inline void append_wrapped(std::string& out, std::size_t& line_len, const std::string& token) {
    constexpr std::size_t kMaxLine = 200;
    if (line_len + token.size() + 1 > kMaxLine) {
        out += "\n   ";
        line_len = 3;
    }
    out += ' ';
    out += token;
    line_len += token.size() + 1;
}

inline std::string format_coef(double c, bool first) {
    std::string sign = c < 0 ? "-" : (first ? "" : "+");
    const double mag = std::fabs(c);
    if (mag == 1.0) return sign;
    return sign + (sign.empty() ? "" : " ") + text::format_double(mag);
}

}  // namespace detail

/// CPLEX-style LP text.
inline std::string write_lp(const LpModel& lp) {
    std::string out = "\\ Coordinated parking assignment\nMaximize\n obj:";
    std::size_t line_len = 5;
    for (std::size_t i = 0; i < lp.objective_vars.size(); ++i)
        detail::append_wrapped(out, line_len, (i == 0 ? "" : "+ ") + lp.objective_vars[i]);
    out += "\nSubject To\n";
    for (const LpRow& row : lp.rows) {
        out += ' ' + row.name + ':';
        line_len = row.name.size() + 2;
        for (std::size_t i = 0; i < row.terms.size(); ++i) {
            std::string coef = detail::format_coef(row.terms[i].coef, i == 0);
            detail::append_wrapped(out, line_len, coef.empty() ? row.terms[i].var : coef + ' ' + row.terms[i].var);
        }
        const char* sense = row.sense == RowSense::Le ? "<=" : row.sense == RowSense::Ge ? ">=" : "=";
        out += ' ';
        out += sense;
        out += ' ' + text::format_double(row.rhs) + '\n';
    }
    out += "Binary\n";
    line_len = 0;
    for (const std::string& v : lp.binaries) detail::append_wrapped(out, line_len, v);
    out += "\nEnd\n";
    return out;
}

inline std::string export_lp(const Instance& inst) { return write_lp(build_lp(inst)); }

/// Dense 0/1 values of every variable under an assignment (absent names are 0).
inline std::map<std::string, int> lp_values(const Assignment& a) {
    std::map<std::string, int> values;
    for (AvId k = 0; k < a.size(); ++k) {
        if (a[k].facility == kNoFacility) continue;
        values[y_var(k, a[k].facility)] = 1;
        for (Slot t : a[k].slots) values[x_var(k, a[k].facility, t)] = 1;
    }
    return values;
}

inline bool row_satisfied(const LpRow& row, const std::map<std::string, int>& values, double tol = 1e-9) {
    double lhs = 0.0;
    for (const LpTerm& term : row.terms) {
        auto it = values.find(term.var);
        if (it != values.end()) lhs += term.coef * it->second;
    }
    switch (row.sense) {
        case RowSense::Le: return lhs <= row.rhs + tol;
        case RowSense::Ge: return lhs >= row.rhs - tol;
        case RowSense::Eq: return std::fabs(lhs - row.rhs) <= tol;
    }
    return false;
}

}  // namespace cpark

#endif  // CPARK_MODEL_HPP
