#include "p2gsim/scenario.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace p2g::scenario {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<int, 12> kMonthDays{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ScenarioError(where + ": " + what);
}

void check_month_day(MonthDay md, const std::string& where) {
    if (md.month < 1 || md.month > 12 || md.day < 1 || md.day > kMonthDays[md.month - 1]) {
        fail(where, "invalid date " + std::to_string(md.month) + "-" + std::to_string(md.day) +
                        " (365-day calendar, no Feb 29)");
    }
}

MonthDay parse_month_day(const std::string& text, const std::string& where) {
    MonthDay md;
    char dash = 0;
    std::istringstream is(text);
    if (!(is >> md.month >> dash >> md.day) || dash != '-' || !is.eof()) fail(where, "expected MM-DD, got '" + text + "'");
    check_month_day(md, where);
    return md;
}

std::string format_month_day(MonthDay md) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02d-%02d", md.month, md.day);
    return buf;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Strict JSON object access: every key must be consumed, and errors carry the
/// JSON path of the offending value.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail(where_, "expected a JSON object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    template <class T>
    T req(const char* key) {
        if (!j_.contains(key)) fail(where_, std::string("missing key '") + key + "'");
        return get<T>(key);
    }

    template <class T>
    void opt(const char* key, T& out) {
        if (j_.contains(key)) out = get<T>(key);
    }

    const json& child(const char* key) {
        if (!j_.contains(key)) fail(where_, std::string("missing key '") + key + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    std::string path(const char* key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) fail(where_, "unknown key '" + key + "'");
        }
    }

private:
    template <class T>
    T get(const char* key) {
        seen_.insert(key);
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception& e) {
            fail(where_ + "." + key, e.what());
        }
    }

    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path.string() + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path.string() + ": malformed JSON: " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw ScenarioError(path.string() + ": write failed");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        fail(where, "not a number: '" + cell + "'");
    }
    if (used != cell.size() || !std::isfinite(v)) fail(where, "not a finite number: '" + cell + "'");
    return v;
}

int parse_int(const std::string& cell, const std::string& where) {
    const double v = parse_number(cell, where);
    if (v != std::floor(v) || std::abs(v) > 2e9) fail(where, "not an integer: '" + cell + "'");
    return static_cast<int>(v);
}

/// Reads a CSV with a fixed header; calls `row(cells, where)` per data line.
template <class F>
void read_csv(const fs::path& path, const std::vector<std::string>& header, F&& row) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(path.string() + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ScenarioError(path.string() + ": empty file");
    if (split_csv(line) != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw ScenarioError(path.string() + ":1: expected header '" + expected + "'");
    }
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(line);
        const std::string where = path.string() + ":" + std::to_string(number);
        if (cells.size() != header.size()) {
            fail(where, "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        }
        row(cells, where);
    }
}

}  // namespace

int day_of_year(MonthDay md) {
    int d = 0;
    for (int m = 1; m < md.month; ++m) d += kMonthDays[m - 1];
    return d + md.day - 1;
}

MonthDay month_day(int doy) {
    doy = ((doy % kDaysPerYear) + kDaysPerYear) % kDaysPerYear;
    int m = 0;
    while (doy >= kMonthDays[m]) doy -= kMonthDays[m++];
    return MonthDay{m + 1, doy + 1};
}

Instant TimeGrid::at(int step) const {
    const long long minutes = static_cast<long long>(day_of_year(start_date)) * 1440 + start_minute_of_day +
                              static_cast<long long>(step) * step_minutes;
    Instant t;
    t.day_of_year = static_cast<int>((minutes / 1440) % kDaysPerYear);
    t.minute_of_day = static_cast<int>(minutes % 1440);
    const MonthDay md = month_day(t.day_of_year);
    t.month = md.month;
    t.day = md.day;
    return t;
}

std::string TimeGrid::start_iso() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", start_year, start_date.month, start_date.day,
                  start_minute_of_day / 60, start_minute_of_day % 60);
    return buf;
}

TimeGrid parse_time_grid(const std::string& iso, int step_minutes, int step_count) {
    TimeGrid g;
    int hh = 0;
    int mm = 0;
    if (std::sscanf(iso.c_str(), "%4d-%2d-%2dT%2d:%2d", &g.start_year, &g.start_date.month, &g.start_date.day, &hh,
                    &mm) != 5 ||
        iso.size() != 16) {
        throw ScenarioError("time_grid.start: expected YYYY-MM-DDTHH:MM, got '" + iso + "'");
    }
    check_month_day(g.start_date, "time_grid.start");
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59) throw ScenarioError("time_grid.start: invalid time of day");
    g.start_minute_of_day = hh * 60 + mm;
    if (step_minutes <= 0) throw ScenarioError("time_grid.step_minutes: must be positive");
    if (step_count < 1) throw ScenarioError("time_grid.step_count: must be at least 1");
    g.step_minutes = step_minutes;
    g.step_count = step_count;
    return g;
}

const char* to_string(Season s) { return s == Season::Heating ? "heating" : "non_heating"; }

void validate(const SeasonCalendar& cal) {
    auto sorted = cal.heating_intervals;
    for (const auto& [a, b] : sorted) {
        check_month_day(a, "calendar.heating_intervals");
        check_month_day(b, "calendar.heating_intervals");
        if (b < a) throw ScenarioError("calendar.heating_intervals: interval end precedes its start");
    }
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (!(sorted[i - 1].second < sorted[i].first)) {
            throw ScenarioError("calendar.heating_intervals: intervals overlap");
        }
    }
}

Season season_of(int step, const TimeGrid& grid, const SeasonCalendar& cal) {
    const Instant t = grid.at(step);
    const MonthDay md{t.month, t.day};
    for (const auto& [a, b] : cal.heating_intervals) {
        if (!(md < a) && !(b < md)) return Season::Heating;
    }
    return Season::NonHeating;
}

const char* to_string(ProfileRole r) {
    switch (r) {
        case ProfileRole::ElectricLoadKw: return "electric_load_kW";
        case ProfileRole::ResGenerationKw: return "res_generation_kW";
        case ProfileRole::GasWithdrawalKgPerS: return "gas_withdrawal_kg_per_s";
    }
    return "unknown";
}

ProfileRole profile_role_from_string(const std::string& s) {
    for (auto r : {ProfileRole::ElectricLoadKw, ProfileRole::ResGenerationKw, ProfileRole::GasWithdrawalKgPerS}) {
        if (s == to_string(r)) return r;
    }
    throw ScenarioError("unknown profile role '" + s + "'");
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Files

std::vector<electric::Branch> read_en_topology(const fs::path& csv) {
    std::vector<electric::Branch> out;
    read_csv(csv, {"from", "to", "R_pu", "X_pu", "length_km"}, [&](const auto& c, const std::string& w) {
        electric::Branch b{parse_int(c[0], w), parse_int(c[1], w), parse_number(c[2], w), parse_number(c[3], w),
                           parse_number(c[4], w)};
        if (b.r_pu < 0.0 || b.x_pu < 0.0) fail(w, "impedances must be non-negative");
        if (b.from == b.to) fail(w, "self-loop branch");
        out.push_back(b);
    });
    if (out.empty()) throw ScenarioError(csv.string() + ": no branches");
    return out;
}

std::vector<gas::Pipe> read_gn_topology(const fs::path& csv) {
    std::vector<gas::Pipe> out;
    read_csv(csv, {"from", "to", "length_m", "diameter_mm"}, [&](const auto& c, const std::string& w) {
        gas::Pipe p{parse_int(c[0], w), parse_int(c[1], w), parse_number(c[2], w), parse_number(c[3], w)};
        if (!(p.length_m > 0.0) || !(p.diameter_mm > 0.0)) fail(w, "length and diameter must be positive");
        if (p.from == p.to) fail(w, "self-loop pipe");
        out.push_back(p);
    });
    if (out.empty()) throw ScenarioError(csv.string() + ": no pipes");
    return out;
}

std::vector<Profile> read_profiles(const fs::path& csv) {
    std::ifstream in(csv);
    if (!in) throw ScenarioError(csv.string() + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw ScenarioError(csv.string() + ": empty file");
    const auto header = split_csv(line);
    if (header.empty() || header[0] != "step") throw ScenarioError(csv.string() + ":1: first column must be 'step'");
    std::vector<Profile> profiles;
    for (std::size_t k = 1; k < header.size(); ++k) {
        const auto colon = header[k].rfind(':');
        const std::string where = csv.string() + ":1: column " + std::to_string(k + 1);
        if (colon == std::string::npos) fail(where, "expected '<role>:<node>', got '" + header[k] + "'");
        Profile p;
        try {
            p.role = profile_role_from_string(header[k].substr(0, colon));
        } catch (const ScenarioError& e) {
            fail(where, e.what());
        }
        p.node_id = parse_int(header[k].substr(colon + 1), where);
        profiles.push_back(std::move(p));
    }
    int number = 1;
    int expected_step = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = csv.string() + ":" + std::to_string(number);
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            fail(where, "expected " + std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        }
        if (parse_int(cells[0], where) != expected_step) {
            fail(where, "expected step " + std::to_string(expected_step) + ", got '" + cells[0] + "'");
        }
        ++expected_step;
        for (std::size_t k = 1; k < cells.size(); ++k) {
            const double v = parse_number(cells[k], where);
            if (v < 0.0) fail(where, "negative sample in column '" + header[k] + "'");
            profiles[k - 1].samples.push_back(v);
        }
    }
    return profiles;
}

void write_profiles(const fs::path& csv, const std::vector<Profile>& profiles, int step_count) {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw ScenarioError(csv.string() + ": cannot open for writing");
    out << "step";
    for (const Profile& p : profiles) out << ',' << to_string(p.role) << ':' << p.node_id;
    out << '\n';
    std::string row;
    char buf[32];
    for (int t = 0; t < step_count; ++t) {
        row = std::to_string(t);
        for (const Profile& p : profiles) {
            std::snprintf(buf, sizeof buf, ",%.17g", p.samples.at(static_cast<std::size_t>(t)));
            row += buf;
        }
        row += '\n';
        out << row;
    }
    if (!out) throw ScenarioError(csv.string() + ": write failed");
}

void to_json(json& j, const plant::PlantConfig& p) {
    const auto& e = p.electrolyzer;
    const auto& b = p.buffer;
    const auto& m = p.methanation;
    j = json{{"name", p.name},
             {"en_bus", p.en_bus},
             {"gn_node", p.gn_node},
             {"electrolyzer",
              {{"nominal_power_kw", e.nominal_power_kw},
               {"min_load_fraction", e.min_load_fraction},
               {"standby_power_kw", e.standby_power_kw},
               {"specific_consumption_kwh_per_kg_h2", e.specific_consumption_kwh_per_kg_h2},
               {"o2_yield_kg_per_kg_h2", e.o2_yield_kg_per_kg_h2},
               {"heat_yield_kwh_per_kg_h2", e.heat_yield_kwh_per_kg_h2}}},
             {"h2_buffer",
              {{"volume_m3", b.volume_m3},
               {"temperature_k", b.temperature_k},
               {"p_max_bar", b.p_max_bar},
               {"p_min_bar", b.p_min_bar},
               {"meth_trigger_bar", b.meth_trigger_bar}}},
             {"methanation",
              {{"nominal_h2_intake_kg_per_h", m.nominal_h2_intake_kg_per_h},
               {"ramp_up_kg_per_h_per_h", m.ramp_up_kg_per_h2},
               {"ramp_down_kg_per_h_per_h", m.ramp_down_kg_per_h2},
               {"co2_ratio_kg_per_kg_h2", m.co2_ratio_kg_per_kg_h2},
               {"ch4_yield_kg_per_kg_h2", m.ch4_yield_kg_per_kg_h2},
               {"sng_lhv_kwh_per_kg", m.sng_lhv_kwh_per_kg},
               {"heat_yield_kwh_per_kg_h2", m.heat_yield_kwh_per_kg_h2},
               {"balancing_duration_steps", m.balancing_duration_steps}}},
             {"capex_sizing",
              {{"electrolyzer_kwe", p.sizing.electrolyzer_kwe},
               {"h2_buffer_m3_h2", p.sizing.h2_buffer_m3},
               {"methanation_kw_sng", p.sizing.methanation_kw_sng}}},
             {"initial",
              {{"buffer_pressure_bar", p.initial.buffer_pressure_bar},
               {"methanation_state", plant::to_string(p.initial.methanation.mode)},
               {"methanation_load_kg_per_h", p.initial.methanation.load_kg_per_h},
               {"balancing_steps_left", p.initial.methanation.balancing_steps_left}}}};
}

namespace {

void read_plant(const json& j, plant::PlantConfig& p, const std::string& where) {
    ObjectReader r(j, where);
    p.name = r.req<std::string>("name");
    p.en_bus = r.req<int>("en_bus");
    p.gn_node = r.req<int>("gn_node");
    if (r.has("electrolyzer")) {
        ObjectReader e(r.child("electrolyzer"), r.path("electrolyzer"));
        e.opt("nominal_power_kw", p.electrolyzer.nominal_power_kw);
        e.opt("min_load_fraction", p.electrolyzer.min_load_fraction);
        e.opt("standby_power_kw", p.electrolyzer.standby_power_kw);
        e.opt("specific_consumption_kwh_per_kg_h2", p.electrolyzer.specific_consumption_kwh_per_kg_h2);
        e.opt("o2_yield_kg_per_kg_h2", p.electrolyzer.o2_yield_kg_per_kg_h2);
        e.opt("heat_yield_kwh_per_kg_h2", p.electrolyzer.heat_yield_kwh_per_kg_h2);
        e.finish();
    }
    if (r.has("h2_buffer")) {
        ObjectReader b(r.child("h2_buffer"), r.path("h2_buffer"));
        b.opt("volume_m3", p.buffer.volume_m3);
        b.opt("temperature_k", p.buffer.temperature_k);
        b.opt("p_max_bar", p.buffer.p_max_bar);
        b.opt("p_min_bar", p.buffer.p_min_bar);
        b.opt("meth_trigger_bar", p.buffer.meth_trigger_bar);
        b.finish();
    }
    if (r.has("methanation")) {
        ObjectReader m(r.child("methanation"), r.path("methanation"));
        m.opt("nominal_h2_intake_kg_per_h", p.methanation.nominal_h2_intake_kg_per_h);
        m.opt("ramp_up_kg_per_h_per_h", p.methanation.ramp_up_kg_per_h2);
        m.opt("ramp_down_kg_per_h_per_h", p.methanation.ramp_down_kg_per_h2);
        m.opt("co2_ratio_kg_per_kg_h2", p.methanation.co2_ratio_kg_per_kg_h2);
        m.opt("ch4_yield_kg_per_kg_h2", p.methanation.ch4_yield_kg_per_kg_h2);
        m.opt("sng_lhv_kwh_per_kg", p.methanation.sng_lhv_kwh_per_kg);
        m.opt("heat_yield_kwh_per_kg_h2", p.methanation.heat_yield_kwh_per_kg_h2);
        m.opt("balancing_duration_steps", p.methanation.balancing_duration_steps);
        m.finish();
    }
    if (r.has("capex_sizing")) {
        ObjectReader s(r.child("capex_sizing"), r.path("capex_sizing"));
        s.opt("electrolyzer_kwe", p.sizing.electrolyzer_kwe);
        s.opt("h2_buffer_m3_h2", p.sizing.h2_buffer_m3);
        s.opt("methanation_kw_sng", p.sizing.methanation_kw_sng);
        s.finish();
    }
    if (r.has("initial")) {
        ObjectReader i(r.child("initial"), r.path("initial"));
        i.opt("buffer_pressure_bar", p.initial.buffer_pressure_bar);
        if (i.has("methanation_state")) {
            try {
                p.initial.methanation.mode = plant::meth_mode_from_string(i.req<std::string>("methanation_state"));
            } catch (const std::invalid_argument& e) {
                fail(i.path("methanation_state"), e.what());
            }
        }
        i.opt("methanation_load_kg_per_h", p.initial.methanation.load_kg_per_h);
        i.opt("balancing_steps_left", p.initial.methanation.balancing_steps_left);
        i.finish();
    }
    r.finish();
    try {
        plant::validate(p);
    } catch (const std::invalid_argument& e) {
        fail(where, e.what());
    }
}

}  // namespace

void from_json(const json& j, plant::PlantConfig& p) {
    p = plant::PlantConfig{};
    read_plant(j, p, "plant");
}

std::vector<plant::PlantConfig> read_plants(const fs::path& path) {
    const json j = read_json_file(path);
    if (!j.is_array()) throw ScenarioError(path.string() + ": expected a JSON array of plants");
    std::vector<plant::PlantConfig> plants;
    for (std::size_t k = 0; k < j.size(); ++k) {
        plant::PlantConfig p;
        read_plant(j[k], p, path.string() + ": [" + std::to_string(k) + "]");
        plants.push_back(std::move(p));
    }
    return plants;
}

econ::CostScenario read_cost_scenario(const fs::path& path) {
    const json j = read_json_file(path);
    try {
        return j.get<econ::CostScenario>();
    } catch (const std::exception& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Validation

void validate(const Scenario& s) {
    if (s.time_grid.step_minutes <= 0) throw ScenarioError("time_grid.step_minutes: must be positive");
    if (s.time_grid.step_count < 1) throw ScenarioError("time_grid.step_count: must be at least 1");
    validate(s.calendar);
    if (!(s.ng_lhv_kwh_per_kg > 0.0)) throw ScenarioError("ng_lhv_kwh_per_kg: must be positive");

    std::optional<electric::RadialTopology> topo;
    try {
        topo.emplace(s.electrical);
    } catch (const electric::TopologyError& e) {
        throw ScenarioError(std::string("electrical network: ") + e.what());
    }
    std::optional<gas::CompiledGasNetwork> gn;
    try {
        gn.emplace(s.gas);
    } catch (const gas::GasModelError& e) {
        throw ScenarioError(std::string("gas network: ") + e.what());
    }
    if (s.gas_initial_pressure_barg < s.gas.p_min_barg || s.gas_initial_pressure_barg > s.gas.p_max_barg) {
        throw ScenarioError("gas.initial_pressure_barg: outside [p_min_barg, p_max_barg]");
    }

    std::set<std::size_t> feeders_used;
    std::set<std::string> names;
    for (std::size_t k = 0; k < s.plants.size(); ++k) {
        const auto& p = s.plants[k];
        const std::string where = "plants[" + std::to_string(k) + "] '" + p.name + "'";
        try {
            plant::validate(p);
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(where + ": " + e.what());
        }
        if (!names.insert(p.name).second) throw ScenarioError(where + ": duplicate plant name");
        if (!topo->has_bus(p.en_bus)) {
            throw ScenarioError(where + ": electrical bus " + std::to_string(p.en_bus) + " does not exist");
        }
        if (!gn->has_node(p.gn_node)) {
            throw ScenarioError(where + ": gas node " + std::to_string(p.gn_node) + " does not exist");
        }
        if (p.gn_node == s.gas.citygate) throw ScenarioError(where + ": SNG cannot be injected at the citygate");
        if (!feeders_used.insert(topo->feeder_of(p.en_bus)).second) {
            throw ScenarioError(where + ": another plant already serves the feeder of bus " + std::to_string(p.en_bus));
        }
    }
    try {
        econ::validate(s.cost);
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }

    for (std::size_t k = 0; k < s.profiles.size(); ++k) {
        const Profile& p = s.profiles[k];
        const std::string where = std::string("profile ") + to_string(p.role) + ":" + std::to_string(p.node_id);
        if (p.samples.size() != static_cast<std::size_t>(s.time_grid.step_count)) {
            throw ScenarioError(where + ": has " + std::to_string(p.samples.size()) + " samples but the time grid has " +
                                std::to_string(s.time_grid.step_count) + " steps");
        }
        for (std::size_t t = 0; t < p.samples.size(); ++t) {
            if (!(p.samples[t] >= 0.0) || !std::isfinite(p.samples[t])) {
                throw ScenarioError(where + ": sample " + std::to_string(t) + " is negative or not finite");
            }
        }
        if (p.role == ProfileRole::GasWithdrawalKgPerS) {
            if (!gn->has_node(p.node_id)) throw ScenarioError(where + ": gas node does not exist");
            if (p.node_id == s.gas.citygate) throw ScenarioError(where + ": withdrawals at the citygate are not allowed");
        } else if (!topo->has_bus(p.node_id)) {
            throw ScenarioError(where + ": electrical bus does not exist");
        }
    }
}

// ---------------------------------------------------------------------------
// Synthetic profiles

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return unit_uniform(engine_()); }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

double bump(double x, double centre, double width) {
    const double z = (x - centre) / width;
    return std::exp(-z * z);
}

bool in_months(int month, std::initializer_list<int> months) {
    return std::find(months.begin(), months.end(), month) != months.end();
}

struct Weather {
    std::vector<double> clearness;  // per day
    std::vector<double> wind;       // per step, in [0, 1] of rated power
};

Weather draw_weather(const TimeGrid& grid, Rng& rng) {
    Weather w;
    w.clearness.resize(kDaysPerYear);
    for (int d = 0; d < kDaysPerYear; ++d) {
        const double winter = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (d - 15) / kDaysPerYear);
        const double cloud = rng.uniform() * (0.35 + 0.4 * winter);
        w.clearness[static_cast<std::size_t>(d)] = 1.0 - cloud;
    }
    w.wind.resize(static_cast<std::size_t>(grid.step_count));
    const double rho = std::exp(-grid.step_hours() / 12.0);
    double z = rng.normal();
    for (int t = 0; t < grid.step_count; ++t) {
        z = rho * z + std::sqrt(1.0 - rho * rho) * rng.normal();
        const Instant at = grid.at(t);
        const double v = 6.0 + 1.2 * std::cos(2.0 * std::numbers::pi * (at.day_of_year - 15) / kDaysPerYear) + 2.8 * z;
        double p = 0.0;
        if (v > 3.0 && v < 25.0) p = std::min(1.0, std::pow((v - 3.0) / 9.0, 3.0));
        w.wind[static_cast<std::size_t>(t)] = p;
    }
    return w;
}

/// Normalized PV output; `seasonality` scales the solar declination swing.
double pv_shape(const Instant& at, double clearness, double seasonality) {
    constexpr double kLatitude = 45.0 * std::numbers::pi / 180.0;
    const double decl = seasonality * 23.45 * std::numbers::pi / 180.0 *
                        std::sin(2.0 * std::numbers::pi * (284.0 + at.day_of_year + 1.0) / kDaysPerYear);
    const double hour = at.minute_of_day / 60.0;
    const double omega = (hour - 12.0) * 15.0 * std::numbers::pi / 180.0;
    const double sin_elev =
        std::sin(kLatitude) * std::sin(decl) + std::cos(kLatitude) * std::cos(decl) * std::cos(omega);
    return sin_elev > 0.0 ? clearness * sin_elev : 0.0;
}

double summer_winter_ratio(const std::vector<double>& series, const TimeGrid& grid) {
    double summer = 0.0;
    double winter = 0.0;
    int ns = 0;
    int nw = 0;
    for (int t = 0; t < grid.step_count; ++t) {
        const int m = grid.at(t).month;
        if (in_months(m, {6, 7, 8})) {
            summer += series[static_cast<std::size_t>(t)];
            ++ns;
        } else if (in_months(m, {12, 1, 2})) {
            winter += series[static_cast<std::size_t>(t)];
            ++nw;
        }
    }
    if (ns == 0 || nw == 0 || winter <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (summer / ns) / (winter / nw);
}

std::vector<double> random_weights(std::size_t n, Rng& rng, double lo, double hi) {
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) total += (x = rng.uniform(lo, hi));
    for (double& x : w) x /= total;
    return w;
}

}  // namespace

SyntheticProfiles synthesize_demo_profiles(const TimeGrid& grid, const SeasonCalendar& calendar,
                                           const SyntheticTargets& targets,
                                           const electric::ElectricalNetwork& electrical, const gas::GasNetwork& gasnet,
                                           double ng_lhv_kwh_per_kg, std::uint64_t seed) {
    if (!(targets.peak_gas_demand_mw >= 0.0)) throw ScenarioError("synthetic_profiles: negative peak gas demand");
    if (!(targets.heating_to_non_heating_gas_ratio > 0.0) || !(targets.summer_to_winter_res_ratio > 0.0)) {
        throw ScenarioError("synthetic_profiles: seasonal ratios must be positive");
    }
    if (!(ng_lhv_kwh_per_kg > 0.0)) throw ScenarioError("synthetic_profiles: NG LHV must be positive");
    const electric::RadialTopology topo(electrical);
    if (targets.feeders.size() != electrical.transformers.size()) {
        throw ScenarioError("synthetic_profiles: one feeder target per transformer is required");
    }
    for (const auto& f : targets.feeders) {
        if (f.el_demand_capacity_mw < 0.0 || f.pv_mw < 0.0 || f.wt_mw < 0.0 || f.el_load_factor < 0.0 ||
            f.el_load_factor > 1.0) {
            throw ScenarioError("synthetic_profiles: infeasible feeder targets for transformer " +
                                std::to_string(f.transformer_id));
        }
    }

    const auto steps = static_cast<std::size_t>(grid.step_count);
    Rng rng(seed);
    const Weather weather = draw_weather(grid, rng);
    const std::size_t nf = electrical.transformers.size();

    std::vector<std::vector<std::size_t>> feeder_buses(nf);
    for (std::size_t k = 0; k < topo.bus_count(); ++k) {
        if (topo.buses()[k].parent >= 0) feeder_buses[topo.buses()[k].feeder].push_back(k);
    }
    std::vector<double> load_noise(kDaysPerYear);
    for (double& x : load_noise) x = 1.0 + 0.04 * rng.normal();

    SyntheticProfiles out;
    out.pv_installed_kw.assign(nf, 0.0);
    out.wt_installed_kw.assign(nf, 0.0);

    // Electric demand: residential/tertiary day shape, cooling uplift in summer.
    for (std::size_t f = 0; f < nf; ++f) {
        const FeederTargets* target = nullptr;
        for (const auto& ft : targets.feeders) {
            if (ft.transformer_id == electrical.transformers[f].id) target = &ft;
        }
        if (!target) {
            throw ScenarioError("synthetic_profiles: no targets for transformer " +
                                std::to_string(electrical.transformers[f].id));
        }
        if (feeder_buses[f].empty()) continue;
        std::vector<double> shape(steps);
        double mean = 0.0;
        for (std::size_t t = 0; t < steps; ++t) {
            const Instant at = grid.at(static_cast<int>(t));
            const double h = at.minute_of_day / 60.0;
            const double cooling = 0.1 * std::max(0.0, std::cos(2.0 * std::numbers::pi * (at.day_of_year - 200) / kDaysPerYear));
            const double day = 0.55 + 0.3 * bump(h, 9.0, 2.5) + 0.2 * bump(h, 13.0, 3.0) + 0.45 * bump(h, 19.5, 2.2);
            shape[t] = std::max(0.0, day * (1.0 + cooling) * load_noise[static_cast<std::size_t>(at.day_of_year)]);
            mean += shape[t];
        }
        mean /= static_cast<double>(steps);
        const double cap_kw = target->el_demand_capacity_mw * 1000.0;
        const auto weights = random_weights(feeder_buses[f].size(), rng, 0.5, 1.5);
        for (std::size_t b = 0; b < feeder_buses[f].size(); ++b) {
            Profile p{ProfileRole::ElectricLoadKw, topo.buses()[feeder_buses[f][b]].id, std::vector<double>(steps)};
            for (std::size_t t = 0; t < steps; ++t) {
                const double feeder_kw = mean > 0.0 ? std::min(cap_kw, cap_kw * target->el_load_factor * shape[t] / mean) : 0.0;
                p.samples[t] = feeder_kw * weights[b];
            }
            out.profiles.push_back(std::move(p));
        }
    }

    // RES placement: PV on roughly half the buses of each feeder, wind on one.
    struct ResSite {
        std::size_t feeder;
        int bus;
        double pv_kw;
        double wt_kw;
    };
    std::vector<ResSite> sites;
    for (std::size_t f = 0; f < nf; ++f) {
        const FeederTargets* target = nullptr;
        for (const auto& ft : targets.feeders) {
            if (ft.transformer_id == electrical.transformers[f].id) target = &ft;
        }
        const auto& buses = feeder_buses[f];
        if (buses.empty()) continue;
        std::vector<std::size_t> pv_buses;
        for (std::size_t b = 0; b < buses.size(); ++b) {
            if (b % 2 == 1 || buses.size() == 1) pv_buses.push_back(buses[b]);
        }
        const auto pv_w = random_weights(pv_buses.size(), rng, 0.5, 1.5);
        const std::size_t wt_bus = buses[static_cast<std::size_t>(rng.uniform() * static_cast<double>(buses.size()))];
        std::map<int, ResSite> by_bus;
        for (std::size_t b = 0; b < pv_buses.size(); ++b) {
            const int id = topo.buses()[pv_buses[b]].id;
            by_bus[id] = ResSite{f, id, target->pv_mw * 1000.0 * pv_w[b], 0.0};
        }
        const int wid = topo.buses()[wt_bus].id;
        auto [it, inserted] = by_bus.try_emplace(wid, ResSite{f, wid, 0.0, 0.0});
        it->second.wt_kw = target->wt_mw * 1000.0;
        for (const auto& [_, site] : by_bus) sites.push_back(site);
        out.pv_installed_kw[f] = target->pv_mw * 1000.0;
        out.wt_installed_kw[f] = target->wt_mw * 1000.0;
    }

    double pv_total = 0.0;
    double wt_total = 0.0;
    for (const auto& s : sites) {
        pv_total += s.pv_kw;
        wt_total += s.wt_kw;
    }
    auto total_res = [&](double seasonality) {
        std::vector<double> total(steps);
        for (std::size_t t = 0; t < steps; ++t) {
            const Instant at = grid.at(static_cast<int>(t));
            total[t] = pv_total * pv_shape(at, weather.clearness[static_cast<std::size_t>(at.day_of_year)], seasonality) +
                       wt_total * weather.wind[t];
        }
        return total;
    };
    // Calibrate the solar seasonality so that summer RES is the requested
    // multiple of winter RES; the ratio grows monotonically with it.
    double seasonality = 1.0;
    if (pv_total + wt_total > 0.0) {
        const double goal = targets.summer_to_winter_res_ratio;
        double lo = 0.0;
        double hi = 1.6;
        const double r_lo = summer_winter_ratio(total_res(lo), grid);
        const double r_hi = summer_winter_ratio(total_res(hi), grid);
        if (!(r_lo <= goal && goal <= r_hi)) {
            std::ostringstream os;
            os << "synthetic_profiles: summer/winter RES ratio " << goal << " not reachable (range " << r_lo << " .. "
               << r_hi << ")";
            throw ScenarioError(os.str());
        }
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (summer_winter_ratio(total_res(mid), grid) < goal ? lo : hi) = mid;
        }
        seasonality = 0.5 * (lo + hi);
    }
    for (const auto& s : sites) {
        Profile p{ProfileRole::ResGenerationKw, s.bus, std::vector<double>(steps)};
        for (std::size_t t = 0; t < steps; ++t) {
            const Instant at = grid.at(static_cast<int>(t));
            p.samples[t] =
                s.pv_kw * pv_shape(at, weather.clearness[static_cast<std::size_t>(at.day_of_year)], seasonality) +
                s.wt_kw * weather.wind[t];
        }
        out.profiles.push_back(std::move(p));
    }

    // Gas withdrawals: heating demand follows a cold-winter envelope with
    // morning/evening peaks; outside heating only hot water and cooking.
    const gas::CompiledGasNetwork gn(gasnet);
    std::vector<std::size_t> gas_nodes;
    for (std::size_t i = 0; i < gn.node_count(); ++i) {
        if (i != gn.citygate_index()) gas_nodes.push_back(i);
    }
    std::vector<double> gas_day(kDaysPerYear);
    for (double& x : gas_day) x = std::max(0.2, 1.0 + 0.1 * rng.normal());
    std::vector<double> total(steps);
    std::vector<bool> heating(steps);
    double sum_h = 0.0;
    double sum_n = 0.0;
    std::size_t n_h = 0;
    for (std::size_t t = 0; t < steps; ++t) {
        const Instant at = grid.at(static_cast<int>(t));
        const double h = at.minute_of_day / 60.0;
        heating[t] = season_of(static_cast<int>(t), grid, calendar) == Season::Heating;
        const double noise = gas_day[static_cast<std::size_t>(at.day_of_year)];
        if (heating[t]) {
            const double cold = 0.6 + 0.8 * std::max(0.0, std::cos(2.0 * std::numbers::pi * (at.day_of_year - 15) / kDaysPerYear));
            total[t] = cold * noise * (0.45 + 0.6 * bump(h, 7.0, 1.6) + 0.45 * bump(h, 19.0, 2.4) - 0.25 * bump(h, 2.5, 2.0));
            sum_h += total[t];
            ++n_h;
        } else {
            total[t] = noise * (0.5 + 0.5 * bump(h, 7.5, 1.5) + 0.5 * bump(h, 19.5, 1.8));
            sum_n += total[t];
        }
    }
    const std::size_t n_n = steps - n_h;
    if (n_h > 0 && n_n > 0 && sum_n > 0.0) {
        const double factor = (sum_h / n_h) / (targets.heating_to_non_heating_gas_ratio * (sum_n / n_n));
        for (std::size_t t = 0; t < steps; ++t) {
            if (!heating[t]) total[t] *= factor;
        }
    }
    const double peak = *std::max_element(total.begin(), total.end());
    const double peak_kg_per_s = targets.peak_gas_demand_mw * 1000.0 / ng_lhv_kwh_per_kg / 3600.0;
    const auto weights = random_weights(gas_nodes.size(), rng, 0.3, 1.7);
    for (std::size_t k = 0; k < gas_nodes.size(); ++k) {
        Profile p{ProfileRole::GasWithdrawalKgPerS, gn.nodes()[gas_nodes[k]].id, std::vector<double>(steps)};
        for (std::size_t t = 0; t < steps; ++t) p.samples[t] = peak > 0.0 ? total[t] / peak * peak_kg_per_s * weights[k] : 0.0;
        out.profiles.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Root config

namespace {

SyntheticTargets read_targets(const json& j, const std::string& where) {
    ObjectReader r(j, where);
    SyntheticTargets t;
    r.opt("peak_gas_demand_mw", t.peak_gas_demand_mw);
    r.opt("heating_to_non_heating_gas_ratio", t.heating_to_non_heating_gas_ratio);
    r.opt("summer_to_winter_res_ratio", t.summer_to_winter_res_ratio);
    const json& feeders = r.child("feeders");
    if (!feeders.is_array()) fail(r.path("feeders"), "expected an array");
    for (std::size_t k = 0; k < feeders.size(); ++k) {
        ObjectReader f(feeders[k], r.path("feeders") + "[" + std::to_string(k) + "]");
        FeederTargets ft;
        ft.transformer_id = f.req<int>("transformer_id");
        f.opt("el_demand_capacity_mw", ft.el_demand_capacity_mw);
        f.opt("el_load_factor", ft.el_load_factor);
        f.opt("pv_mw", ft.pv_mw);
        f.opt("wt_mw", ft.wt_mw);
        f.finish();
        t.feeders.push_back(ft);
    }
    r.finish();
    return t;
}

fs::path resolve(const fs::path& base, const std::string& rel) {
    const fs::path p(rel);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

Scenario load_scenario(const fs::path& root_config, const LoadOptions& options) {
    const json j = read_json_file(root_config);
    const std::string file = root_config.string();
    const fs::path base = root_config.parent_path();
    ObjectReader r(j, file);
    Scenario s;
    r.opt("name", s.name);
    r.opt("seed", s.seed);
    if (options.seed_override) s.seed = *options.seed_override;

    {
        ObjectReader g(r.child("time_grid"), file + ": time_grid");
        std::string start = "2030-01-01T00:00";
        int step_minutes = 15;
        int step_count = 35040;
        g.opt("start", start);
        g.opt("step_minutes", step_minutes);
        g.opt("step_count", step_count);
        g.finish();
        try {
            s.time_grid = parse_time_grid(start, step_minutes, step_count);
        } catch (const ScenarioError& e) {
            fail(file, e.what());
        }
    }
    if (r.has("calendar")) {
        ObjectReader c(r.child("calendar"), file + ": calendar");
        const json& iv = c.child("heating_intervals");
        const std::string where = file + ": calendar.heating_intervals";
        if (!iv.is_array()) fail(where, "expected an array of [start, end] pairs");
        s.calendar.heating_intervals.clear();
        for (const auto& pair : iv) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
                fail(where, "each interval must be [\"MM-DD\", \"MM-DD\"]");
            }
            s.calendar.heating_intervals.emplace_back(parse_month_day(pair[0].get<std::string>(), where),
                                                      parse_month_day(pair[1].get<std::string>(), where));
        }
        c.finish();
    }
    r.opt("ng_lhv_kwh_per_kg", s.ng_lhv_kwh_per_kg);

    {
        ObjectReader e(r.child("electrical"), file + ": electrical");
        s.electrical.branches = read_en_topology(resolve(base, e.req<std::string>("topology_csv")));
        e.opt("base_mva", s.electrical.base_mva);
        e.opt("slack_voltage_pu", s.electrical.slack_voltage_pu);
        const json& tr = e.child("transformers");
        if (!tr.is_array()) fail(e.path("transformers"), "expected an array");
        for (std::size_t k = 0; k < tr.size(); ++k) {
            ObjectReader t(tr[k], e.path("transformers") + "[" + std::to_string(k) + "]");
            electric::Transformer x;
            x.id = t.req<int>("id");
            x.root_bus = t.req<int>("root_bus");
            t.opt("base_kv", x.base_kv);
            t.finish();
            s.electrical.transformers.push_back(x);
        }
        e.finish();
    }
    {
        ObjectReader g(r.child("gas"), file + ": gas");
        s.gas.pipes = read_gn_topology(resolve(base, g.req<std::string>("topology_csv")));
        g.opt("citygate_node", s.gas.citygate);
        g.opt("citygate_pressure_barg", s.gas.citygate_pressure_barg);
        g.opt("p_min_barg", s.gas.p_min_barg);
        g.opt("p_max_barg", s.gas.p_max_barg);
        g.opt("rho_std_kg_per_m3", s.gas.gas.rho_std_kg_per_m3);
        g.opt("r_gas_j_per_kgk", s.gas.gas.r_gas_j_per_kgk);
        g.opt("temperature_k", s.gas.gas.temperature_k);
        s.gas_initial_pressure_barg = s.gas.citygate_pressure_barg;
        g.opt("initial_pressure_barg", s.gas_initial_pressure_barg);
        g.finish();
    }
    if (r.has("plants_json")) s.plants = read_plants(resolve(base, r.req<std::string>("plants_json")));
    if (r.has("cost_scenario_json")) s.cost = read_cost_scenario(resolve(base, r.req<std::string>("cost_scenario_json")));

    const bool has_csv = r.has("profiles_csv");
    const bool has_synth = r.has("synthetic_profiles");
    if (has_csv == has_synth) fail(file, "exactly one of 'profiles_csv' and 'synthetic_profiles' is required");
    if (has_csv) {
        s.profiles = read_profiles(resolve(base, r.req<std::string>("profiles_csv")));
        for (const Profile& p : s.profiles) {
            if (p.samples.size() != static_cast<std::size_t>(s.time_grid.step_count)) {
                fail(resolve(base, r.req<std::string>("profiles_csv")).string(),
                     std::to_string(p.samples.size()) + " rows but the time grid has " +
                         std::to_string(s.time_grid.step_count) + " steps");
            }
        }
    } else {
        const SyntheticTargets targets = read_targets(r.child("synthetic_profiles"), file + ": synthetic_profiles");
        s.profiles = synthesize_demo_profiles(s.time_grid, s.calendar, targets, s.electrical, s.gas,
                                              s.ng_lhv_kwh_per_kg, s.seed)
                         .profiles;
    }
    r.finish();
    try {
        validate(s);
    } catch (const ScenarioError& e) {
        fail(file, e.what());
    }
    return s;
}

namespace {

json root_json(const Scenario& s) {
    json intervals = json::array();
    for (const auto& [a, b] : s.calendar.heating_intervals) {
        intervals.push_back({format_month_day(a), format_month_day(b)});
    }
    json transformers = json::array();
    for (const auto& t : s.electrical.transformers) {
        transformers.push_back({{"id", t.id}, {"root_bus", t.root_bus}, {"base_kv", t.base_kv}});
    }
    return json{{"name", s.name},
                {"seed", s.seed},
                {"time_grid",
                 {{"start", s.time_grid.start_iso()},
                  {"step_minutes", s.time_grid.step_minutes},
                  {"step_count", s.time_grid.step_count}}},
                {"calendar", {{"heating_intervals", intervals}}},
                {"ng_lhv_kwh_per_kg", s.ng_lhv_kwh_per_kg},
                {"electrical",
                 {{"topology_csv", "en_topology.csv"},
                  {"base_mva", s.electrical.base_mva},
                  {"slack_voltage_pu", s.electrical.slack_voltage_pu},
                  {"transformers", transformers}}},
                {"gas",
                 {{"topology_csv", "gn_topology.csv"},
                  {"citygate_node", s.gas.citygate},
                  {"citygate_pressure_barg", s.gas.citygate_pressure_barg},
                  {"p_min_barg", s.gas.p_min_barg},
                  {"p_max_barg", s.gas.p_max_barg},
                  {"rho_std_kg_per_m3", s.gas.gas.rho_std_kg_per_m3},
                  {"r_gas_j_per_kgk", s.gas.gas.r_gas_j_per_kgk},
                  {"temperature_k", s.gas.gas.temperature_k},
                  {"initial_pressure_barg", s.gas_initial_pressure_barg}}},
                {"plants_json", "plants.json"},
                {"cost_scenario_json", "cost_scenario.json"},
                {"profiles_csv", "profiles.csv"}};
}

std::string en_csv(const Scenario& s) {
    std::string out = "from,to,R_pu,X_pu,length_km\n";
    for (const auto& b : s.electrical.branches) {
        out += std::to_string(b.from) + "," + std::to_string(b.to) + "," + format_double(b.r_pu) + "," +
               format_double(b.x_pu) + "," + format_double(b.length_km) + "\n";
    }
    return out;
}

std::string gn_csv(const Scenario& s) {
    std::string out = "from,to,length_m,diameter_mm\n";
    for (const auto& p : s.gas.pipes) {
        out += std::to_string(p.from) + "," + std::to_string(p.to) + "," + format_double(p.length_m) + "," +
               format_double(p.diameter_mm) + "\n";
    }
    return out;
}

json plants_json(const Scenario& s) {
    json arr = json::array();
    for (const auto& p : s.plants) {
        json j;
        to_json(j, p);
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

fs::path save_scenario(const Scenario& s, const fs::path& dir) {
    fs::create_directories(dir);
    write_text(dir / "en_topology.csv", en_csv(s));
    write_text(dir / "gn_topology.csv", gn_csv(s));
    write_text(dir / "plants.json", plants_json(s).dump(2) + "\n");
    write_text(dir / "cost_scenario.json", json(s.cost).dump(2) + "\n");
    write_profiles(dir / "profiles.csv", s.profiles, s.time_grid.step_count);
    const fs::path root = dir / "scenario.json";
    write_text(root, root_json(s).dump(2) + "\n");
    return root;
}

std::string config_hash(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::string text = root_json(s).dump() + en_csv(s) + gn_csv(s) + plants_json(s).dump() + json(s.cost).dump();
    feed(text.data(), text.size());
    for (const Profile& p : s.profiles) {
        const std::string head = std::string(to_string(p.role)) + ":" + std::to_string(p.node_id);
        feed(head.data(), head.size());
        for (double v : p.samples) {
            const auto bits = std::bit_cast<std::uint64_t>(v);
            std::array<unsigned char, 8> le{};
            for (int k = 0; k < 8; ++k) le[static_cast<std::size_t>(k)] = static_cast<unsigned char>(bits >> (8 * k));
            feed(le.data(), le.size());
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace p2g::scenario
