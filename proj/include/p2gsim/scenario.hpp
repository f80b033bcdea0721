#pragma once

#include "p2gsim/economics.hpp"
#include "p2gsim/electric_net.hpp"
#include "p2gsim/gas_net.hpp"
#include "p2gsim/p2g_plant.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace p2g::scenario {

/// Ingestion or validation failure; the message carries file and line (or JSON
/// path) context.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDaysPerYear = 365;

struct MonthDay {
    int month = 1;
    int day = 1;

    bool operator==(const MonthDay&) const = default;
    auto operator<=>(const MonthDay&) const = default;
};

/// Day of year (0-based) on a fixed 365-day calendar.
int day_of_year(MonthDay md);
MonthDay month_day(int day_of_year);

struct Instant {
    int day_of_year = 0;  // 0..364
    int minute_of_day = 0;
    int month = 1;
    int day = 1;
};

/// Uniform time grid on a 365-day calendar (leap days do not exist).
struct TimeGrid {
    int start_year = 2030;
    MonthDay start_date{1, 1};
    int start_minute_of_day = 0;
    int step_minutes = 15;
    int step_count = 35040;

    bool operator==(const TimeGrid&) const = default;

    double step_hours() const { return step_minutes / 60.0; }
    double step_seconds() const { return step_minutes * 60.0; }
    Instant at(int step) const;
    std::string start_iso() const;
};

TimeGrid parse_time_grid(const std::string& start_iso, int step_minutes, int step_count);

enum class Season { Heating, NonHeating };
const char* to_string(Season season);

/// Inclusive date intervals of the heating season.
struct SeasonCalendar {
    std::vector<std::pair<MonthDay, MonthDay>> heating_intervals{{{1, 1}, {4, 15}}, {{10, 15}, {12, 31}}};

    bool operator==(const SeasonCalendar&) const = default;
};

void validate(const SeasonCalendar& calendar);
Season season_of(int step, const TimeGrid& grid, const SeasonCalendar& calendar);

enum class ProfileRole { ElectricLoadKw, ResGenerationKw, GasWithdrawalKgPerS };
const char* to_string(ProfileRole role);
ProfileRole profile_role_from_string(const std::string& name);

struct Profile {
    ProfileRole role = ProfileRole::ElectricLoadKw;
    int node_id = 0;
    std::vector<double> samples;

    bool operator==(const Profile&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    TimeGrid time_grid;
    SeasonCalendar calendar;
    double ng_lhv_kwh_per_kg = 13.1;
    electric::ElectricalNetwork electrical;
    gas::GasNetwork gas;
    double gas_initial_pressure_barg = 4.0;
    std::vector<plant::PlantConfig> plants;
    econ::CostScenario cost;
    std::vector<Profile> profiles;

    bool operator==(const Scenario&) const = default;
};

/// Checks every invariant and cross-reference; throws ScenarioError.
void validate(const Scenario& scenario);

/// Targets for the synthetic demo profiles; one entry per transformer.
struct FeederTargets {
    int transformer_id = 0;
    double el_demand_capacity_mw = 0.0;
    double el_load_factor = 0.2;
    double pv_mw = 0.0;
    double wt_mw = 0.0;

    bool operator==(const FeederTargets&) const = default;
};

struct SyntheticTargets {
    double peak_gas_demand_mw = 23.0;
    double heating_to_non_heating_gas_ratio = 10.0;
    double summer_to_winter_res_ratio = 2.0;
    std::vector<FeederTargets> feeders;

    bool operator==(const SyntheticTargets&) const = default;
};

struct SyntheticProfiles {
    std::vector<Profile> profiles;
    std::vector<double> pv_installed_kw;  // per feeder
    std::vector<double> wt_installed_kw;
};

/// Seeded synthetic load, RES and gas withdrawal profiles. Gas demand is
/// converted from MW (NG lower heating value) to kg/s.
SyntheticProfiles synthesize_demo_profiles(const TimeGrid& grid, const SeasonCalendar& calendar,
                                           const SyntheticTargets& targets,
                                           const electric::ElectricalNetwork& electrical,
                                           const gas::GasNetwork& gas, double ng_lhv_kwh_per_kg, std::uint64_t seed);

struct LoadOptions {
    std::optional<std::uint64_t> seed_override;
};

Scenario load_scenario(const std::filesystem::path& root_config, const LoadOptions& options = {});

/// Writes a self-contained scenario (root JSON, topologies, plants, cost and a
/// materialized profiles CSV) into `dir`; returns the root config path.
std::filesystem::path save_scenario(const Scenario& scenario, const std::filesystem::path& dir);

std::vector<electric::Branch> read_en_topology(const std::filesystem::path& csv);
std::vector<gas::Pipe> read_gn_topology(const std::filesystem::path& csv);
std::vector<Profile> read_profiles(const std::filesystem::path& csv);
void write_profiles(const std::filesystem::path& csv, const std::vector<Profile>& profiles, int step_count);
std::vector<plant::PlantConfig> read_plants(const std::filesystem::path& json_path);
econ::CostScenario read_cost_scenario(const std::filesystem::path& json_path);

void to_json(nlohmann::json& j, const plant::PlantConfig& p);
void from_json(const nlohmann::json& j, plant::PlantConfig& p);

/// FNV-1a hash of the canonical serialization, rendered as 16 hex digits.
std::string config_hash(const Scenario& scenario);

/// Uniform double in [0, 1) from the upper 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

}  // namespace p2g::scenario
