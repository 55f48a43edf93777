#ifndef CPARK_INSTANCE_HPP
#define CPARK_INSTANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpark/error.hpp"
#include "cpark/rng.hpp"

namespace cpark {

using AvId = int;
using FacilityId = int;
/// Slot index; 1..D are schedulable, 0 is the pre-horizon instant.
using Slot = int;

inline constexpr FacilityId kNoFacility = -1;

// Slack used when converting real durations into whole slots so that exact
// multiples (6 min / 1.2 min) do not round up because of representation error.
inline constexpr double kSlotRoundingSlack = 1e-9;

struct TimeHorizon {
    int slots = 1;
    double slot_minutes = 1.0;

    double slot_hours() const { return slot_minutes / 60.0; }
};

class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(int n) : n_(n), d_(static_cast<std::size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
    double& operator()(int i, int j) { return d_[static_cast<std::size_t>(i) * n_ + j]; }

    bool operator==(const DistanceMatrix&) const = default;

private:
    int n_ = 0;
    std::vector<double> d_;
};

struct AvSpec {
    AvId id = 0;
    int start_node = 0;
    int return_node = 0;
    Slot t_start = 1;
    Slot t_end = 1;  // may exceed D: the AV does not return within the horizon
    double soc_start = 0.0;  // kWh
    double soc_return = 0.0;  // kWh
    double battery_kwh = 40.0;
    double d_max = 4.0;  // km
    double speed_kmh = 30.0;
    double consumption = 0.15;  // kWh/km

    bool operator==(const AvSpec&) const = default;
};

struct FacilitySpec {
    FacilityId id = 0;
    int node = 0;
    std::vector<int> demand;  // rho_t for t = 1..D, stored at index t-1
    int capacity = 0;
    double charge_rate_kw = 7.2;

    int demand_at(Slot t) const { return demand[static_cast<std::size_t>(t - 1)]; }

    bool operator==(const FacilitySpec&) const = default;
};

/// Travel legs of one (AV, facility) pair.
struct TravelLegs {
    int m_to = 0;
    int m_back = 0;
    double e_to = 0.0;
    double e_back = 0.0;
};

/// Travel and stay data of one (AV, facility) pair. m_stay == 0 marks a pair
/// whose availability window is empty, so no stay could be assigned.
struct TravelPlan {
    int m_to = 0;
    int m_back = 0;
    double e_to = 0.0;
    double e_back = 0.0;
    int m_stay = 0;

    bool operator==(const TravelPlan&) const = default;
};

struct Instance {
    TimeHorizon horizon;
    DistanceMatrix distances;
    std::vector<AvSpec> avs;
    std::vector<FacilitySpec> facilities;
    std::vector<TravelPlan> plans;  // row-major, avs x facilities
    std::uint64_t seed = 0;
    bool uniform_travel = false;

    int num_avs() const { return static_cast<int>(avs.size()); }
    int num_facilities() const { return static_cast<int>(facilities.size()); }
    int slots() const { return horizon.slots; }

    const TravelPlan& plan(AvId k, FacilityId f) const {
        return plans[static_cast<std::size_t>(k) * facilities.size() + static_cast<std::size_t>(f)];
    }
    TravelPlan& plan(AvId k, FacilityId f) {
        return plans[static_cast<std::size_t>(k) * facilities.size() + static_cast<std::size_t>(f)];
    }

    bool operator==(const Instance& other) const {
        return horizon.slots == other.horizon.slots && horizon.slot_minutes == other.horizon.slot_minutes &&
               distances == other.distances && avs == other.avs && facilities == other.facilities &&
               plans == other.plans && seed == other.seed && uniform_travel == other.uniform_travel;
    }
};

/// Closed slot interval. Empty when first > last.
struct SlotInterval {
    Slot first = 1;
    Slot last = 0;

    bool empty() const { return first > last; }
    int length() const { return empty() ? 0 : last - first + 1; }
    bool contains(Slot t) const { return t >= first && t <= last; }
    bool operator==(const SlotInterval&) const = default;
};

/// Slots in which an AV can be parked, given its travel legs: after arriving
/// (t_start + m_to) and early enough to leave (t_end - m_back - 1), clipped to D.
inline SlotInterval window_bounds(const AvSpec& av, int m_to, int m_back, int slots) {
    SlotInterval w{av.t_start + m_to, std::min(av.t_end - m_back - 1, slots)};
    w.first = std::max(w.first, 1);
    if (w.empty()) return SlotInterval{1, 0};
    return w;
}

inline int slots_for_minutes(double minutes, double slot_minutes) {
    if (minutes <= 0.0) return 0;
    return static_cast<int>(std::ceil(minutes / slot_minutes - kSlotRoundingSlack));
}

inline TravelLegs travel_slots(const AvSpec& av, const FacilitySpec& fac, const TimeHorizon& horizon,
                               const DistanceMatrix& d) {
    const double to_km = d(av.start_node, fac.node);
    const double back_km = d(fac.node, av.return_node);
    TravelLegs legs;
    legs.m_to = slots_for_minutes(to_km / av.speed_kmh * 60.0, horizon.slot_minutes);
    legs.m_back = slots_for_minutes(back_km / av.speed_kmh * 60.0, horizon.slot_minutes);
    legs.e_to = to_km * av.consumption;
    legs.e_back = back_km * av.consumption;
    return legs;
}

enum class StayModel { Random, Charging };

/// Stay needed to bring the AV from its arrival SOC to its departure SOC.
inline int charging_stay(const AvSpec& av, const FacilitySpec& fac, const TravelLegs& legs,
                         const TimeHorizon& horizon) {
    const double arrival_soc = av.soc_start - legs.e_to;
    const double departure_soc = av.soc_return + legs.e_back;
    const double needed = std::max(0.0, departure_soc - arrival_soc);
    const double per_slot = fac.charge_rate_kw * horizon.slot_hours();
    const int slots = static_cast<int>(std::ceil(needed / per_slot - kSlotRoundingSlack));
    return std::max(slots, 1);
}

/// Required stay of an AV at a facility; 0 when the window is empty.
/// The random model consumes exactly one draw from rng when the window is
/// nonempty, the charging model none.
inline int required_stay(const AvSpec& av, const FacilitySpec& fac, const TravelLegs& legs,
                         const TimeHorizon& horizon, StayModel model, Rng& rng) {
    const int window = window_bounds(av, legs.m_to, legs.m_back, horizon.slots).length();
    if (window < 1) return 0;
    if (model == StayModel::Random) return static_cast<int>(rng.uniform_int(1, window));
    return charging_stay(av, fac, legs, horizon);
}

/// Structural checks; throws InvalidConfig.
inline void validate(const Instance& inst) {
    if (inst.horizon.slots < 1) throw InvalidConfig("horizon must have at least one slot");
    if (!(inst.horizon.slot_minutes > 0.0)) throw InvalidConfig("slot length must be positive");
    const int n = inst.distances.size();
    for (int i = 0; i < n; ++i) {
        if (inst.distances(i, i) != 0.0) throw InvalidConfig("distance matrix diagonal must be zero");
        for (int j = 0; j < n; ++j)
            if (!(inst.distances(i, j) >= 0.0)) throw InvalidConfig("distances must be nonnegative");
    }
    auto node_ok = [n](int v) { return v >= 0 && v < n; };
    for (std::size_t k = 0; k < inst.avs.size(); ++k) {
        const AvSpec& av = inst.avs[k];
        if (av.id != static_cast<int>(k)) throw InvalidConfig("AV ids must be 0..K-1 in order");
        if (!node_ok(av.start_node) || !node_ok(av.return_node)) throw InvalidConfig("AV node out of range");
        if (av.t_start < 1) throw InvalidConfig("AV start slot must be >= 1");
        if (av.t_end < av.t_start) throw InvalidConfig("AV end slot precedes its start slot");
        if (!(av.d_max > 0.0) || !(av.speed_kmh > 0.0)) throw InvalidConfig("AV d_max and speed must be positive");
    }
    for (std::size_t f = 0; f < inst.facilities.size(); ++f) {
        const FacilitySpec& fac = inst.facilities[f];
        if (fac.id != static_cast<int>(f)) throw InvalidConfig("facility ids must be 0..F-1 in order");
        if (!node_ok(fac.node)) throw InvalidConfig("facility node out of range");
        if (fac.capacity < 0) throw InvalidConfig("facility capacity must be nonnegative");
        if (static_cast<int>(fac.demand.size()) != inst.horizon.slots)
            throw InvalidConfig("facility demand profile must have D entries");
        for (int rho : fac.demand)
            if (rho < 0 || rho > fac.capacity)
                throw InvalidConfig("facility " + std::to_string(f) + " demand outside [0, capacity]");
    }
    if (inst.plans.size() != inst.avs.size() * inst.facilities.size())
        throw InvalidConfig("travel plan table incomplete");
    for (const TravelPlan& p : inst.plans)
        if (p.m_to < 0 || p.m_back < 0 || p.m_stay < 0 || p.e_to < 0.0 || p.e_back < 0.0)
            throw InvalidConfig("travel plan entries must be nonnegative");
}

// ---------------------------------------------------------------------------
// Random instance generation

struct GeneratorConfig {
    int n_avs = 100;
    int n_facilities = 5;
    int slots = 100;
    double horizon_minutes = 120.0;
    double area_km = 5.0;
    double speed_kmh = 30.0;
    double dmax_min_km = 4.0;
    double dmax_max_km = 5.0;
    int capacity = 0;  // 0: ceil(K/2)
    bool uniform_travel = false;
    StayModel stay_model = StayModel::Random;
    double battery_kwh = 40.0;
    double consumption = 0.15;
    double charge_rate_kw = 7.2;
    std::uint64_t seed = 0;
};

inline constexpr int kMaxConsecutiveRejections = 1000;

namespace detail {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double euclid(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace detail

inline Instance generate_instance(const GeneratorConfig& cfg) {
    if (cfg.n_avs < 1 || cfg.n_facilities < 1 || cfg.slots < 1)
        throw InvalidConfig("AV, facility and slot counts must be >= 1");
    if (!(cfg.area_km > 0.0)) throw InvalidConfig("area must be positive");
    if (!(cfg.speed_kmh > 0.0)) throw InvalidConfig("speed must be positive");
    if (!(cfg.horizon_minutes > 0.0)) throw InvalidConfig("horizon must be positive");
    if (!(cfg.dmax_min_km > 0.0) || cfg.dmax_max_km < cfg.dmax_min_km) throw InvalidConfig("invalid d_max range");
    if (cfg.capacity < 0) throw InvalidConfig("capacity must be nonnegative");

    const int K = cfg.n_avs;
    const int F = cfg.n_facilities;
    const int D = cfg.slots;

    Instance inst;
    inst.seed = cfg.seed;
    inst.uniform_travel = cfg.uniform_travel;
    inst.horizon = TimeHorizon{D, cfg.horizon_minutes / D};

    Rng rng(cfg.seed);
    std::vector<detail::Point> points;
    points.reserve(static_cast<std::size_t>(F + 2 * K));
    auto random_point = [&] {
        const double x = rng.uniform_real(0.0, cfg.area_km);
        const double y = rng.uniform_real(0.0, cfg.area_km);
        return detail::Point{x, y};
    };
    for (int f = 0; f < F; ++f) {
        points.push_back(random_point());
        FacilitySpec fac;
        fac.id = f;
        fac.node = f;
        fac.charge_rate_kw = cfg.charge_rate_kw;
        fac.capacity = cfg.capacity > 0 ? cfg.capacity : (K + 1) / 2;
        inst.facilities.push_back(std::move(fac));
    }

    // A rejected AV sample is discarded whole; the stream keeps advancing so
    // the result stays a pure function of the seed.
    std::vector<TravelPlan> plans(static_cast<std::size_t>(K) * F);
    int rejections = 0;
    for (int k = 0; k < K;) {
        if (rejections >= kMaxConsecutiveRejections)
            throw GenerationFailure("no feasible facility for AV " + std::to_string(k) + " after " +
                                    std::to_string(kMaxConsecutiveRejections) + " samples");
        const detail::Point start = random_point();
        const detail::Point back = random_point();
        AvSpec av;
        av.id = k;
        av.start_node = F + 2 * k;
        av.return_node = F + 2 * k + 1;
        av.d_max = rng.uniform_real(cfg.dmax_min_km, cfg.dmax_max_km);
        av.speed_kmh = cfg.speed_kmh;
        av.consumption = cfg.consumption;
        av.battery_kwh = cfg.battery_kwh;

        std::vector<TravelPlan> row(static_cast<std::size_t>(F));
        std::vector<bool> reachable(static_cast<std::size_t>(F));
        int max_to = -1;
        int max_back = -1;
        for (int f = 0; f < F; ++f) {
            const double to_km = detail::euclid(start, points[static_cast<std::size_t>(f)]);
            const double back_km = detail::euclid(points[static_cast<std::size_t>(f)], back);
            TravelPlan& p = row[static_cast<std::size_t>(f)];
            p.m_to = slots_for_minutes(to_km / cfg.speed_kmh * 60.0, inst.horizon.slot_minutes);
            p.m_back = slots_for_minutes(back_km / cfg.speed_kmh * 60.0, inst.horizon.slot_minutes);
            p.e_to = to_km * cfg.consumption;
            p.e_back = back_km * cfg.consumption;
            reachable[static_cast<std::size_t>(f)] = to_km + back_km <= av.d_max;
            if (reachable[static_cast<std::size_t>(f)]) {
                max_to = std::max(max_to, p.m_to);
                max_back = std::max(max_back, p.m_back);
            }
        }
        const int span = D - max_to - max_back;
        if (max_to < 0 || span < 1) {
            ++rejections;
            continue;
        }
        if (cfg.uniform_travel) {
            for (TravelPlan& p : row) {
                p.m_to = max_to;
                p.m_back = max_back;
            }
        }
        av.t_start = static_cast<int>(rng.uniform_int(1, span));
        av.t_end = static_cast<int>(rng.uniform_int(0, span)) + av.t_start + max_to + max_back;
        av.soc_start = rng.uniform_real(0.2, 0.9) * cfg.battery_kwh;
        av.soc_return = rng.uniform_real(0.5, 1.0) * cfg.battery_kwh;

        bool any_feasible = false;
        for (int f = 0; f < F; ++f) {
            TravelPlan& p = row[static_cast<std::size_t>(f)];
            const TravelLegs legs{p.m_to, p.m_back, p.e_to, p.e_back};
            p.m_stay = required_stay(av, inst.facilities[static_cast<std::size_t>(f)], legs, inst.horizon,
                                     cfg.stay_model, rng);
            const int window = window_bounds(av, p.m_to, p.m_back, D).length();
            if (reachable[static_cast<std::size_t>(f)] && p.m_stay >= 1 && p.m_stay <= window) any_feasible = true;
        }
        if (!any_feasible) {
            ++rejections;
            continue;
        }
        rejections = 0;
        points.push_back(start);
        points.push_back(back);
        inst.avs.push_back(av);
        std::copy(row.begin(), row.end(), plans.begin() + static_cast<std::ptrdiff_t>(k) * F);
        ++k;
    }
    inst.plans = std::move(plans);

    const int n = static_cast<int>(points.size());
    inst.distances = DistanceMatrix(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inst.distances(i, j) = i == j ? 0.0
                                          : detail::euclid(points[static_cast<std::size_t>(i)],
                                                           points[static_cast<std::size_t>(j)]);

    // Demand: rho_t^f = rand(0, a_t^f / F) where a_t^f counts AVs that can park at f in t.
    for (int f = 0; f < F; ++f) {
        FacilitySpec& fac = inst.facilities[static_cast<std::size_t>(f)];
        std::vector<int> available(static_cast<std::size_t>(D), 0);
        for (const AvSpec& av : inst.avs) {
            const TravelPlan& p = inst.plan(av.id, f);
            const double dist = inst.distances(av.start_node, fac.node) + inst.distances(fac.node, av.return_node);
            const SlotInterval w = window_bounds(av, p.m_to, p.m_back, D);
            if (dist > av.d_max || p.m_stay < 1 || p.m_stay > w.length()) continue;
            for (Slot t = w.first; t <= w.last; ++t) ++available[static_cast<std::size_t>(t - 1)];
        }
        fac.demand.resize(static_cast<std::size_t>(D));
        for (int t = 0; t < D; ++t) {
            const int hi = available[static_cast<std::size_t>(t)] / F;
            fac.demand[static_cast<std::size_t>(t)] =
                std::min(static_cast<int>(rng.uniform_int(0, hi)), fac.capacity);
        }
    }
    validate(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Time rescaling

/// Maps slot t of a D-slot horizon onto the slot of a new_D-slot horizon that
/// contains its start: ceil(t * new_D / D).
inline Slot rescale_slot_ceil(Slot t, int from_slots, int to_slots) {
    const long long num = static_cast<long long>(t) * to_slots;
    return static_cast<Slot>((num + from_slots - 1) / from_slots);
}

inline Slot rescale_slot_floor(Slot t, int from_slots, int to_slots) {
    return static_cast<Slot>(static_cast<long long>(t) * to_slots / from_slots);
}

/// Re-expresses an instance on a coarser grid over the same real-time
/// horizon. Availability start rounds up, end rounds down, travel and stay
/// durations round up. The result may be infeasible.
inline Instance rescale_time(const Instance& inst, int new_slots) {
    const int D = inst.horizon.slots;
    if (new_slots < 1) throw InvalidConfig("rescaled horizon must have at least one slot");
    if (new_slots > D) throw InvalidConfig("rescaling only coarsens the horizon");
    if (new_slots == D) return inst;

    Instance out = inst;
    out.horizon = TimeHorizon{new_slots, inst.horizon.slot_minutes * D / new_slots};
    const int K = inst.num_avs();
    const int F = inst.num_facilities();

    for (AvSpec& av : out.avs) {
        av.t_start = std::max(1, rescale_slot_ceil(av.t_start, D, new_slots));
        av.t_end = std::max(av.t_start, rescale_slot_floor(av.t_end, D, new_slots));
    }
    for (int k = 0; k < K; ++k) {
        const AvSpec& av = out.avs[static_cast<std::size_t>(k)];
        int max_to = 0;
        int max_back = 0;
        for (int f = 0; f < F; ++f) {
            const FacilitySpec& fac = out.facilities[static_cast<std::size_t>(f)];
            const TravelLegs legs = travel_slots(av, fac, out.horizon, out.distances);
            TravelPlan& p = out.plan(k, f);
            p.m_to = legs.m_to;
            p.m_back = legs.m_back;
            p.m_stay = p.m_stay == 0 ? 0 : rescale_slot_ceil(p.m_stay, D, new_slots);
            if (out.distances(av.start_node, fac.node) + out.distances(fac.node, av.return_node) <= av.d_max) {
                max_to = std::max(max_to, legs.m_to);
                max_back = std::max(max_back, legs.m_back);
            }
        }
        if (out.uniform_travel) {
            for (int f = 0; f < F; ++f) {
                out.plan(k, f).m_to = max_to;
                out.plan(k, f).m_back = max_back;
            }
        }
    }
    for (FacilitySpec& fac : out.facilities) {
        std::vector<int> demand(static_cast<std::size_t>(new_slots), 0);
        for (Slot t = 1; t <= D; ++t) {
            const Slot s = rescale_slot_ceil(t, D, new_slots);
            int& cell = demand[static_cast<std::size_t>(s - 1)];
            cell = std::max(cell, fac.demand_at(t));
        }
        fac.demand = std::move(demand);
    }
    return out;
}

}  // namespace cpark

#endif  // CPARK_INSTANCE_HPP
