#ifndef CPARK_IO_HPP
#define CPARK_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpark/instance.hpp"
#include "cpark/model.hpp"
#include "cpark/text.hpp"

namespace cpark {

inline constexpr std::string_view kInstanceHeader = "cpark-instance 1";
inline constexpr std::string_view kAssignmentHeader = "cpark-assignment 1";
inline constexpr std::string_view kConfigHeader = "cpark-config 1";

// ---------------------------------------------------------------------------
// Key-value document: a version header line, then "[section]" lines each
// followed by "key = value" lines. '#' starts a comment line.

struct KvSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
    const std::string& at(std::string_view key) const {
        if (const std::string* v = find(key)) return *v;
        throw ParseError("section [" + name + "] is missing key '" + std::string(key) + "'");
    }
};

struct KvDocument {
    std::string header;
    std::vector<KvSection> sections;

    const KvSection* find(std::string_view name) const {
        for (const KvSection& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const KvSection& at(std::string_view name) const {
        if (const KvSection* s = find(name)) return *s;
        throw ParseError("missing section [" + std::string(name) + "]");
    }
};

inline KvDocument parse_kv(std::string_view input) {
    KvDocument doc;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= input.size()) {
        std::size_t end = input.find('\n', pos);
        if (end == std::string_view::npos) end = input.size();
        const std::string_view line = text::trim(input.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            if (end == input.size()) break;
            continue;
        }
        if (doc.header.empty()) {
            doc.header = std::string(line);
        } else if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("line " + std::to_string(line_no) + ": unterminated section");
            doc.sections.push_back({std::string(text::trim(line.substr(1, line.size() - 2))), {}});
        } else {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos || doc.sections.empty())
                throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
            doc.sections.back().entries.emplace_back(std::string(text::trim(line.substr(0, eq))),
                                                     std::string(text::trim(line.substr(eq + 1))));
        }
        if (end == input.size()) break;
    }
    if (doc.header.empty()) throw ParseError("empty document");
    return doc;
}

class KvWriter {
public:
    explicit KvWriter(std::string_view header) { out_ += std::string(header) + "\n"; }

    KvWriter& section(std::string_view name) {
        out_ += "\n[" + std::string(name) + "]\n";
        return *this;
    }
    KvWriter& put(std::string_view key, std::string_view value) {
        out_ += std::string(key) + " = " + std::string(value) + "\n";
        return *this;
    }
    KvWriter& put(std::string_view key, int value) { return put(key, std::to_string(value)); }
    KvWriter& put(std::string_view key, std::uint64_t value) { return put(key, std::to_string(value)); }
    KvWriter& put(std::string_view key, double value) { return put(key, text::format_double(value)); }
    KvWriter& put(std::string_view key, bool value) { return put(key, std::string_view(value ? "1" : "0")); }

    const std::string& str() const { return out_; }

private:
    std::string out_;
};

inline void expect_header(const KvDocument& doc, std::string_view header) {
    if (doc.header != header)
        throw ParseError("unexpected header '" + doc.header + "', wanted '" + std::string(header) + "'");
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ' ';
        if constexpr (std::is_floating_point_v<T>)
            out += text::format_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

template <class T>
std::vector<T> parse_list(std::string_view s, std::string_view what) {
    std::vector<T> out;
    for (std::string_view tok : text::split_ws(s)) out.push_back(text::parse_number<T>(tok, what));
    return out;
}

// ---------------------------------------------------------------------------
// Instance

inline std::string write_instance(const Instance& inst) {
    KvWriter w(kInstanceHeader);
    w.section("horizon").put("slots", inst.horizon.slots).put("slot_minutes", inst.horizon.slot_minutes);
    w.section("meta").put("seed", inst.seed).put("uniform_travel", inst.uniform_travel);
    w.section("nodes").put("count", inst.distances.size());
    for (int i = 0; i < inst.distances.size(); ++i) {
        std::vector<double> row;
        for (int j = 0; j < inst.distances.size(); ++j) row.push_back(inst.distances(i, j));
        w.put("d." + std::to_string(i), join(row));
    }
    w.section("avs").put("count", inst.num_avs());
    w.put("columns", std::string_view("start_node return_node t_start t_end soc_start soc_return battery_kwh d_max speed_kmh consumption"));
    for (const AvSpec& av : inst.avs) {
        const std::string row = std::to_string(av.start_node) + " " + std::to_string(av.return_node) + " " +
                                std::to_string(av.t_start) + " " + std::to_string(av.t_end) + " " +
                                join(std::vector<double>{av.soc_start, av.soc_return, av.battery_kwh, av.d_max,
                                                         av.speed_kmh, av.consumption});
        w.put("av." + std::to_string(av.id), row);
    }
    w.section("facilities").put("count", inst.num_facilities());
    for (const FacilitySpec& fac : inst.facilities) {
        const std::string id = std::to_string(fac.id);
        w.put("facility." + id + ".node", fac.node);
        w.put("facility." + id + ".capacity", fac.capacity);
        w.put("facility." + id + ".charge_rate_kw", fac.charge_rate_kw);
        w.put("facility." + id + ".demand", join(fac.demand));
    }
    w.section("plans").put("columns", std::string_view("m_to m_back e_to e_back m_stay"));
    for (AvId k = 0; k < inst.num_avs(); ++k)
        for (FacilityId f = 0; f < inst.num_facilities(); ++f) {
            const TravelPlan& p = inst.plan(k, f);
            w.put("plan." + std::to_string(k) + "." + std::to_string(f),
                  std::to_string(p.m_to) + " " + std::to_string(p.m_back) + " " + text::format_double(p.e_to) + " " +
                      text::format_double(p.e_back) + " " + std::to_string(p.m_stay));
        }
    return w.str();
}

inline Instance read_instance(std::string_view input) {
    const KvDocument doc = parse_kv(input);
    expect_header(doc, kInstanceHeader);
    Instance inst;
    const KvSection& horizon = doc.at("horizon");
    inst.horizon.slots = text::parse_number<int>(horizon.at("slots"), "slots");
    inst.horizon.slot_minutes = text::parse_number<double>(horizon.at("slot_minutes"), "slot_minutes");
    const KvSection& meta = doc.at("meta");
    inst.seed = text::parse_number<std::uint64_t>(meta.at("seed"), "seed");
    inst.uniform_travel = text::parse_bool(meta.at("uniform_travel"), "uniform_travel");

    const KvSection& nodes = doc.at("nodes");
    const int n = text::parse_number<int>(nodes.at("count"), "node count");
    if (n < 0) throw ParseError("negative node count");
    inst.distances = DistanceMatrix(n);
    for (int i = 0; i < n; ++i) {
        const auto row = parse_list<double>(nodes.at("d." + std::to_string(i)), "distance");
        if (static_cast<int>(row.size()) != n) throw ParseError("distance row " + std::to_string(i) + " has wrong length");
        for (int j = 0; j < n; ++j) inst.distances(i, j) = row[static_cast<std::size_t>(j)];
    }

    const KvSection& avs = doc.at("avs");
    const int K = text::parse_number<int>(avs.at("count"), "AV count");
    for (int k = 0; k < K; ++k) {
        const auto tok = text::split_ws(avs.at("av." + std::to_string(k)));
        if (tok.size() != 10) throw ParseError("AV " + std::to_string(k) + " needs 10 fields");
        AvSpec av;
        av.id = k;
        av.start_node = text::parse_number<int>(tok[0], "start_node");
        av.return_node = text::parse_number<int>(tok[1], "return_node");
        av.t_start = text::parse_number<int>(tok[2], "t_start");
        av.t_end = text::parse_number<int>(tok[3], "t_end");
        av.soc_start = text::parse_number<double>(tok[4], "soc_start");
        av.soc_return = text::parse_number<double>(tok[5], "soc_return");
        av.battery_kwh = text::parse_number<double>(tok[6], "battery_kwh");
        av.d_max = text::parse_number<double>(tok[7], "d_max");
        av.speed_kmh = text::parse_number<double>(tok[8], "speed_kmh");
        av.consumption = text::parse_number<double>(tok[9], "consumption");
        inst.avs.push_back(av);
    }

    const KvSection& facs = doc.at("facilities");
    const int F = text::parse_number<int>(facs.at("count"), "facility count");
    for (int f = 0; f < F; ++f) {
        const std::string id = "facility." + std::to_string(f);
        FacilitySpec fac;
        fac.id = f;
        fac.node = text::parse_number<int>(facs.at(id + ".node"), "facility node");
        fac.capacity = text::parse_number<int>(facs.at(id + ".capacity"), "capacity");
        fac.charge_rate_kw = text::parse_number<double>(facs.at(id + ".charge_rate_kw"), "charge_rate_kw");
        fac.demand = parse_list<int>(facs.at(id + ".demand"), "demand");
        inst.facilities.push_back(std::move(fac));
    }

    const KvSection& plans = doc.at("plans");
    inst.plans.resize(static_cast<std::size_t>(K) * F);
    for (int k = 0; k < K; ++k)
        for (int f = 0; f < F; ++f) {
            const auto tok = text::split_ws(plans.at("plan." + std::to_string(k) + "." + std::to_string(f)));
            if (tok.size() != 5) throw ParseError("plan entries need 5 fields");
            TravelPlan& p = inst.plan(k, f);
            p.m_to = text::parse_number<int>(tok[0], "m_to");
            p.m_back = text::parse_number<int>(tok[1], "m_back");
            p.e_to = text::parse_number<double>(tok[2], "e_to");
            p.e_back = text::parse_number<double>(tok[3], "e_back");
            p.m_stay = text::parse_number<int>(tok[4], "m_stay");
        }
    validate(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Assignment

inline std::string write_assignment(const Assignment& a) {
    KvWriter w(kAssignmentHeader);
    w.section("assignment").put("avs", a.size());
    for (AvId k = 0; k < a.size(); ++k) {
        const AvAssignment& av = a[k];
        std::string value = av.facility == kNoFacility ? std::string("none") : std::to_string(av.facility);
        value += " |";
        if (!av.slots.empty()) value += " " + join(av.slots);
        w.put("av." + std::to_string(k), value);
    }
    return w.str();
}

inline Assignment read_assignment(std::string_view input) {
    const KvDocument doc = parse_kv(input);
    expect_header(doc, kAssignmentHeader);
    const KvSection& sec = doc.at("assignment");
    const int K = text::parse_number<int>(sec.at("avs"), "AV count");
    if (K < 0) throw ParseError("negative AV count");
    Assignment a(K);
    for (int k = 0; k < K; ++k) {
        const std::string& value = sec.at("av." + std::to_string(k));
        const std::size_t bar = value.find('|');
        if (bar == std::string::npos) throw ParseError("assignment entry needs 'facility | slots'");
        const std::string_view fac = text::trim(std::string_view(value).substr(0, bar));
        a[k].facility = fac == "none" ? kNoFacility : text::parse_number<int>(fac, "facility");
        a[k].slots = parse_list<int>(std::string_view(value).substr(bar + 1), "slot");
    }
    return a;
}

// ---------------------------------------------------------------------------
// Generator configuration

/// Applies the keys of the [generator] section, leaving others untouched.
inline void apply_generator_section(const KvSection& sec, GeneratorConfig& cfg, bool& seed_set) {
    for (const auto& [key, value] : sec.entries) {
        if (key == "avs") cfg.n_avs = text::parse_number<int>(value, key);
        else if (key == "facilities") cfg.n_facilities = text::parse_number<int>(value, key);
        else if (key == "slots") cfg.slots = text::parse_number<int>(value, key);
        else if (key == "horizon_minutes") cfg.horizon_minutes = text::parse_number<double>(value, key);
        else if (key == "area_km") cfg.area_km = text::parse_number<double>(value, key);
        else if (key == "speed_kmh") cfg.speed_kmh = text::parse_number<double>(value, key);
        else if (key == "dmax_min_km") cfg.dmax_min_km = text::parse_number<double>(value, key);
        else if (key == "dmax_max_km") cfg.dmax_max_km = text::parse_number<double>(value, key);
        else if (key == "capacity") cfg.capacity = text::parse_number<int>(value, key);
        else if (key == "uniform_travel") cfg.uniform_travel = text::parse_bool(value, key);
        else if (key == "battery_kwh") cfg.battery_kwh = text::parse_number<double>(value, key);
        else if (key == "consumption") cfg.consumption = text::parse_number<double>(value, key);
        else if (key == "charge_rate_kw") cfg.charge_rate_kw = text::parse_number<double>(value, key);
        else if (key == "stay_model") {
            if (value == "random") cfg.stay_model = StayModel::Random;
            else if (value == "charging") cfg.stay_model = StayModel::Charging;
            else throw ParseError("stay_model must be 'random' or 'charging'");
        } else if (key == "seed") {
            cfg.seed = text::parse_number<std::uint64_t>(value, key);
            seed_set = true;
        } else {
            throw ParseError("unknown generator key '" + key + "'");
        }
    }
}

inline std::string write_generator_config(const GeneratorConfig& cfg) {
    KvWriter w(kConfigHeader);
    w.section("generator")
        .put("avs", cfg.n_avs)
        .put("facilities", cfg.n_facilities)
        .put("slots", cfg.slots)
        .put("horizon_minutes", cfg.horizon_minutes)
        .put("area_km", cfg.area_km)
        .put("speed_kmh", cfg.speed_kmh)
        .put("dmax_min_km", cfg.dmax_min_km)
        .put("dmax_max_km", cfg.dmax_max_km)
        .put("capacity", cfg.capacity)
        .put("uniform_travel", cfg.uniform_travel)
        .put("stay_model", std::string_view(cfg.stay_model == StayModel::Random ? "random" : "charging"))
        .put("battery_kwh", cfg.battery_kwh)
        .put("consumption", cfg.consumption)
        .put("charge_rate_kw", cfg.charge_rate_kw)
        .put("seed", cfg.seed);
    return w.str();
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace cpark

#endif  // CPARK_IO_HPP
