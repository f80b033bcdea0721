#include "p2gsim/sim_engine.hpp"

#include "p2gsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace p2g::sim {

namespace fs = std::filesystem;
using nlohmann::json;
using scenario::ProfileRole;
using scenario::Season;

namespace {

std::string timestamp(const scenario::TimeGrid& grid, int step) {
    const scenario::Instant at = grid.at(step);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d %02d:%02d", grid.start_year, at.month, at.day,
                  at.minute_of_day / 60, at.minute_of_day % 60);
    return buf;
}

struct BoundProfile {
    ProfileRole role;
    std::size_t index;  // bus or gas node index
    const std::vector<double>* samples;
};

}  // namespace

double SimulationResult::annualization_factor() const {
    const double hours = time_grid.step_count * time_grid.step_hours();
    return hours > 0.0 ? kHoursPerYear / hours : 0.0;
}

std::vector<econ::PlantEconomics> SimulationResult::annual_plant_economics() const {
    std::vector<econ::PlantEconomics> out;
    const double f = annualization_factor();
    for (std::size_t p = 0; p < plant_names.size(); ++p) {
        out.push_back({plant_names[p], seasonal.year.plants.at(p).accounts.scaled(f), plant_sizing[p]});
    }
    return out;
}

SimulationResult run(const scenario::Scenario& sc, const SimOptions& options) {
    scenario::validate(sc);
    const electric::RadialTopology topo(sc.electrical);
    const gas::CompiledGasNetwork gn(sc.gas);
    const auto& grid = sc.time_grid;
    const double dt_h = grid.step_hours();
    const double dt_s = grid.step_seconds();
    const std::size_t nb = topo.bus_count();
    const std::size_t nf = topo.feeder_count();
    const std::size_t nn = gn.node_count();
    const std::size_t np = sc.plants.size();
    const double q_per_p = std::tan(std::acos(options.load_power_factor));

    std::vector<BoundProfile> bound;
    for (const auto& p : sc.profiles) {
        const std::size_t idx = p.role == ProfileRole::GasWithdrawalKgPerS ? gn.index_of(p.node_id) : topo.index_of(p.node_id);
        bound.push_back({p.role, idx, &p.samples});
    }
    std::vector<std::size_t> plant_bus(np), plant_node(np), plant_feeder(np);
    for (std::size_t p = 0; p < np; ++p) {
        plant_bus[p] = topo.index_of(sc.plants[p].en_bus);
        plant_node[p] = gn.index_of(sc.plants[p].gn_node);
        plant_feeder[p] = topo.feeder_of(sc.plants[p].en_bus);
    }

    SimulationResult result;
    result.scenario_name = sc.name;
    result.seed = sc.seed;
    result.config_hash = scenario::config_hash(sc);
    result.time_grid = grid;
    result.ng_lhv_kwh_per_kg = sc.ng_lhv_kwh_per_kg;
    for (const auto& t : sc.electrical.transformers) result.transformer_ids.push_back(t.id);
    for (const auto& p : sc.plants) {
        result.plant_names.push_back(p.name);
        result.plant_sizing.push_back(p.sizing);
    }

    std::vector<plant::PlantState> states;
    for (const auto& p : sc.plants) states.push_back(plant::initial_state(p));
    result.initial_plant_states = states;
    gas::GasState gas_state = gas::uniform_state(gn, sc.gas_initial_pressure_barg);
    result.initial_stored_mass_kg = gas::stored_mass_kg(gn, gas_state);
    result.records.reserve(static_cast<std::size_t>(grid.step_count));

    std::vector<double> bus_load(nb), bus_res(nb), withdrawals(nn), injections(nn), plant_kw(np), surplus(np);
    std::vector<electric::Complex> inj_pu(nb);
    std::vector<electric::FeederTotals> totals(nf);

    auto solve = [&](std::span<const double> plant_load_kw) {
        for (std::size_t k = 0; k < nb; ++k) {
            inj_pu[k] = electric::Complex(topo.kw_to_pu(bus_res[k] - bus_load[k]), -topo.kw_to_pu(bus_load[k]) * q_per_p);
        }
        for (std::size_t p = 0; p < np; ++p) inj_pu[plant_bus[p]] -= topo.kw_to_pu(plant_load_kw[p]);
        return electric::bfs_power_flow(topo, inj_pu, options.power_flow);
    };

    for (int t = 0; t < grid.step_count; ++t) {
        try {
            const auto ts = static_cast<std::size_t>(t);
            std::fill(bus_load.begin(), bus_load.end(), 0.0);
            std::fill(bus_res.begin(), bus_res.end(), 0.0);
            std::fill(withdrawals.begin(), withdrawals.end(), 0.0);
            std::fill(injections.begin(), injections.end(), 0.0);
            for (const auto& b : bound) {
                const double v = (*b.samples)[ts];
                switch (b.role) {
                    case ProfileRole::ElectricLoadKw: bus_load[b.index] += v; break;
                    case ProfileRole::ResGenerationKw: bus_res[b.index] += v; break;
                    case ProfileRole::GasWithdrawalKgPerS: withdrawals[b.index] += v; break;
                }
            }
            std::fill(totals.begin(), totals.end(), electric::FeederTotals{});
            for (std::size_t k = 0; k < nb; ++k) {
                totals[topo.buses()[k].feeder].demand_kw += bus_load[k];
                totals[topo.buses()[k].feeder].res_kw += bus_res[k];
            }

            // (1) tentative power flow with every plant at standby
            for (std::size_t p = 0; p < np; ++p) plant_kw[p] = sc.plants[p].electrolyzer.standby_power_kw;
            const auto tentative = electric::transformer_balance(topo, solve(plant_kw), totals);

            // (2) electrolyzer setpoints from the feeder surplus
            for (std::size_t p = 0; p < np; ++p) surplus[p] = tentative[plant_feeder[p]].surplus_kw;
            const auto setpoints = coord::electrolyzer_setpoints(sc.plants, states, surplus, dt_h);

            // (3) SNG budget from the gas state at the start of the step
            const double budget = gas::max_sng_injectable(gn, gas_state, withdrawals, dt_s);

            // (4) methanation dispatch
            const auto dispatch = coord::methanation_dispatch(sc.plants, states, budget, dt_h);

            // (5) plant steps
            StepRecord rec;
            rec.season = scenario::season_of(t, grid, sc.calendar);
            rec.dispatch = dispatch.diagnostics;
            rec.plants.resize(np);
            for (std::size_t p = 0; p < np; ++p) {
                PlantRecord& pr = rec.plants[p];
                pr.result = plant::plant_step(sc.plants[p], states[p], setpoints[p],
                                              dispatch.plants[p].h2_target_kg_per_h, surplus[p], dt_h);
                pr.state = states[p];
                pr.dispatch = dispatch.plants[p];
                injections[plant_node[p]] += pr.result.sng_kg / dt_s;
                rec.sng_injected_kg += pr.result.sng_kg;
                plant_kw[p] = pr.result.effective_setpoint_kw;
            }

            // (6) gas network step
            const auto g = gas::step(gn, gas_state, injections, withdrawals, dt_s, options.gas_step);
            gas_state = g.state;
            rec.citygate_kg = g.citygate_mass_kg;
            rec.gas_substeps = g.substeps;
            rec.withdrawal_kg = std::accumulate(withdrawals.begin(), withdrawals.end(), 0.0) * dt_s;
            rec.stored_mass_kg = gas::stored_mass_kg(gn, gas_state);
            rec.gas_p_min_barg = std::numeric_limits<double>::infinity();
            rec.gas_p_max_barg = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < nn; ++i) {
                if (i == gn.citygate_index()) continue;
                rec.gas_p_min_barg = std::min(rec.gas_p_min_barg, abs_to_barg(gas_state.pressure_bar_abs[i]));
                rec.gas_p_max_barg = std::max(rec.gas_p_max_barg, abs_to_barg(gas_state.pressure_bar_abs[i]));
            }
            rec.gas_p_mean_barg = abs_to_barg(gas::mean_pressure(gn, gas_state));

            // (7) final power flow with the dispatched plant loads
            const auto final_state = solve(plant_kw);
            const auto final_balance = electric::transformer_balance(topo, final_state, totals);
            rec.power_flow_residual_kw =
                topo.pu_to_kw(electric::conservation_residual_pu(topo, final_state, inj_pu));

            // (8) record
            rec.feeders.resize(nf);
            for (std::size_t f = 0; f < nf; ++f) {
                FeederRecord& fr = rec.feeders[f];
                fr.demand_kw = totals[f].demand_kw;
                fr.res_kw = totals[f].res_kw;
                fr.surplus_kw = tentative[f].surplus_kw;
                fr.tentative_rpf_kw = tentative[f].rpf_kw;
                fr.import_kw = final_balance[f].import_kw;
                fr.rpf_kw = final_balance[f].rpf_kw;
                fr.losses_kw = topo.pu_to_kw(final_state.feeder_losses_pu[f]);
            }
            for (std::size_t p = 0; p < np; ++p) rec.feeders[plant_feeder[p]].plant_load_kw += plant_kw[p];
            for (auto& fr : rec.feeders) fr.absorbed_kw = std::min(fr.surplus_kw, fr.plant_load_kw + fr.losses_kw);
            result.records.push_back(std::move(rec));
        } catch (const SimulationError&) {
            throw;
        } catch (const std::exception& e) {
            throw SimulationError(t, "step " + std::to_string(t) + " (" + timestamp(grid, t) + "): " + e.what());
        }
    }
    result.seasonal = aggregate(result);
    return result;
}

SeasonalTables aggregate(const SimulationResult& r) {
    const std::size_t nf = r.transformer_ids.size();
    const std::size_t np = r.plant_names.size();
    const double dt_h = r.time_grid.step_hours();
    const double lhv_mwh = r.ng_lhv_kwh_per_kg / 1000.0;
    SeasonalTables out;
    for (SeasonTable* s : {&out.heating, &out.non_heating, &out.year}) {
        s->feeders.assign(nf, {});
        s->plants.assign(np, {});
    }
    double previous_mass = r.initial_stored_mass_kg;
    for (const StepRecord& rec : r.records) {
        SeasonTable& season = rec.season == Season::Heating ? out.heating : out.non_heating;
        for (SeasonTable* s : {&season, &out.year}) {
            ++s->steps;
            for (std::size_t f = 0; f < nf; ++f) {
                const FeederRecord& fr = rec.feeders[f];
                FeederSeasonTotals& ft = s->feeders[f];
                ft.el_demand_mwh += fr.demand_kw * dt_h / 1000.0;
                ft.res_mwh += fr.res_kw * dt_h / 1000.0;
                ft.surplus_mwh += fr.surplus_kw * dt_h / 1000.0;
                ft.absorbed_mwh += fr.absorbed_kw * dt_h / 1000.0;
                ft.rpf_mwh += fr.rpf_kw * dt_h / 1000.0;
            }
            GasSeasonTotals& g = s->gas;
            g.ng_demand_kg += rec.withdrawal_kg;
            g.ng_imported_kg += rec.citygate_kg;
            g.sng_kg += rec.sng_injected_kg;
            g.linepack_delta_kg += rec.stored_mass_kg - previous_mass;
            for (std::size_t p = 0; p < np; ++p) {
                const PlantRecord& pr = rec.plants[p];
                PlantSeasonTotals& pt = s->plants[p];
                pt.accounts += econ::AnnualAccounts{pr.result.electricity_surplus_kwh / 1000.0,
                                                    pr.result.electricity_deficit_kwh / 1000.0,
                                                    pr.result.sng_kwh / 1000.0,
                                                    pr.result.co2_t,
                                                    pr.result.o2_t,
                                                    pr.result.heat_kwh / 1000.0};
                pt.electricity_mwh += pr.result.electricity_kwh() / 1000.0;
                pt.h2_produced_kg += pr.result.h2_produced_kg;
                pt.h2_to_methanation_kg += pr.result.h2_to_methanation_kg;
                if (pr.state.methanation.mode == plant::MethMode::UpAndRunning) ++pt.running_steps;
                if (pr.dispatch.curtailed) ++pt.curtailed_steps;
            }
        }
        previous_mass = rec.stored_mass_kg;
    }
    for (SeasonTable* s : {&out.heating, &out.non_heating, &out.year}) {
        GasSeasonTotals& g = s->gas;
        g.ng_demand_mwh = g.ng_demand_kg * lhv_mwh;
        g.ng_imported_mwh = g.ng_imported_kg * lhv_mwh;
        g.linepack_delta_mwh = g.linepack_delta_kg * lhv_mwh;
        for (const auto& pt : s->plants) g.sng_mwh += pt.accounts.sng_mwh;
    }
    return out;
}

GasValidationReport validate_gas_model(const gas::GasNetwork& network, std::span<const double> withdrawals,
                                       std::span<const double> injections, const GasValidationOptions& options) {
    const gas::CompiledGasNetwork gn(network);
    GasValidationReport report;
    report.steady_bar_abs = gas::steady_state_solve(gn, withdrawals, injections);
    const double p0 = options.initial_pressure_barg < 0.0 ? network.citygate_pressure_barg : options.initial_pressure_barg;
    gas::GasState state = gas::uniform_state(gn, p0);
    const int settle = static_cast<int>(std::lround(options.settle_hours * kSecondsPerHour / options.dt_s));
    const int check = std::max(1, static_cast<int>(std::lround(options.check_hours * kSecondsPerHour / options.dt_s)));
    for (int k = 0; k < settle + check; ++k) {
        state = gas::step(gn, state, injections, withdrawals, options.dt_s).state;
        if (k < settle) continue;
        double worst = 0.0;
        for (std::size_t i = 0; i < gn.node_count(); ++i) {
            const double ref = report.steady_bar_abs[i];
            worst = std::max(worst, std::abs(state.pressure_bar_abs[i] - ref) / ref);
        }
        report.error_per_step.push_back(worst);
        report.max_relative_error = std::max(report.max_relative_error, worst);
    }
    report.transient_bar_abs = state.pressure_bar_abs;
    return report;
}

GasValidationCase load_gas_validation_case(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open file");
    GasValidationCase c;
    try {
        const json j = json::parse(in);
        const json& g = j.at("gas");
        c.network.pipes = scenario::read_gn_topology(path.parent_path() / g.at("topology_csv").get<std::string>());
        c.network.citygate = g.value("citygate_node", c.network.citygate);
        c.network.citygate_pressure_barg = g.value("citygate_pressure_barg", c.network.citygate_pressure_barg);
        c.network.p_min_barg = g.value("p_min_barg", c.network.p_min_barg);
        c.network.p_max_barg = g.value("p_max_barg", c.network.p_max_barg);
        c.network.gas.rho_std_kg_per_m3 = g.value("rho_std_kg_per_m3", c.network.gas.rho_std_kg_per_m3);
        c.network.gas.r_gas_j_per_kgk = g.value("r_gas_j_per_kgk", c.network.gas.r_gas_j_per_kgk);
        c.network.gas.temperature_k = g.value("temperature_k", c.network.gas.temperature_k);
        c.horizon_h = j.value("horizon_h", c.horizon_h);
        c.step_s = j.value("step_s", c.step_s);
        const gas::CompiledGasNetwork gn(c.network);
        c.withdrawals_kg_per_s.assign(gn.node_count(), 0.0);
        for (const auto& [node, value] : j.at("withdrawals_kg_per_s").items()) {
            const int id = std::stoi(node);
            if (!gn.has_node(id)) throw std::runtime_error("withdrawal at unknown gas node " + node);
            c.withdrawals_kg_per_s[gn.index_of(id)] = value.get<double>();
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

class CsvWriter {
public:
    explicit CsvWriter(const fs::path& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error(path.string() + ": cannot open for writing");
    }
    ~CsvWriter() = default;

    CsvWriter& cell(const std::string& s) {
        sep();
        line_ += s;
        return *this;
    }
    CsvWriter& cell(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        return cell(std::string(buf));
    }
    CsvWriter& cell(int v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }
    void end() {
        line_ += '\n';
        out_ << line_;
        line_.clear();
    }
    void close() {
        out_.close();
        if (!out_) throw std::runtime_error(path_.string() + ": write failed");
    }

private:
    void sep() {
        if (!line_.empty()) line_ += ',';
    }

    fs::path path_;
    std::ofstream out_;
    std::string line_;
};

std::string tr_label(int id) { return "TR" + std::to_string(id); }

void write_timeseries(const SimulationResult& r, const fs::path& path) {
    CsvWriter w(path);
    w.cell("step").cell("timestamp").cell("season");
    for (int id : r.transformer_ids) {
        const std::string l = tr_label(id);
        for (const char* c : {"_demand_kw", "_res_kw", "_surplus_kw", "_plant_load_kw", "_absorbed_kw", "_rpf_kw",
                              "_import_kw"}) {
            w.cell(l + c);
        }
    }
    w.cell("gas_p_min_barg").cell("gas_p_mean_barg").cell("gas_p_max_barg").cell("citygate_kg").cell("withdrawal_kg");
    w.cell("sng_injected_kg").cell("sng_budget_kg").cell("linepack_kg");
    for (const auto& name : r.plant_names) {
        for (const char* c : {"_setpoint_kw", "_effective_kw", "_h2_kg", "_buffer_bar", "_meth_state", "_meth_load_kg_per_h",
                              "_sng_kg"}) {
            w.cell(name + c);
        }
    }
    w.end();
    for (std::size_t t = 0; t < r.records.size(); ++t) {
        const StepRecord& rec = r.records[t];
        w.cell(t).cell(timestamp(r.time_grid, static_cast<int>(t))).cell(std::string(scenario::to_string(rec.season)));
        for (const FeederRecord& f : rec.feeders) {
            w.cell(f.demand_kw).cell(f.res_kw).cell(f.surplus_kw).cell(f.plant_load_kw).cell(f.absorbed_kw).cell(f.rpf_kw);
            w.cell(f.import_kw);
        }
        w.cell(rec.gas_p_min_barg).cell(rec.gas_p_mean_barg).cell(rec.gas_p_max_barg).cell(rec.citygate_kg);
        w.cell(rec.withdrawal_kg).cell(rec.sng_injected_kg).cell(rec.dispatch.budget_kg).cell(rec.stored_mass_kg);
        for (const PlantRecord& p : rec.plants) {
            w.cell(p.result.setpoint_kw).cell(p.result.effective_setpoint_kw).cell(p.result.h2_produced_kg);
            w.cell(p.result.buffer_pressure_bar).cell(std::string(plant::to_string(p.state.methanation.mode)));
            w.cell(p.state.methanation.load_kg_per_h).cell(p.result.sng_kg);
        }
        w.end();
    }
    w.close();
}

void write_dispatch_log(const SimulationResult& r, const fs::path& path) {
    CsvWriter w(path);
    for (const char* c : {"step", "timestamp", "plant", "role", "meth_state_before", "meth_state_after", "h2_target_kg_per_h",
                          "min_load_kg_per_h", "max_load_kg_per_h", "meth_load_kg_per_h", "planned_sng_kg", "sng_kg",
                          "curtailed", "started", "budget_kg", "budget_used_kg", "binding", "setpoint_kw", "effective_kw",
                          "buffer_bar"}) {
        w.cell(std::string(c));
    }
    w.end();
    std::vector<plant::PlantState> before = r.initial_plant_states;
    for (std::size_t t = 0; t < r.records.size(); ++t) {
        const StepRecord& rec = r.records[t];
        for (std::size_t p = 0; p < rec.plants.size(); ++p) {
            const PlantRecord& pr = rec.plants[p];
            w.cell(t).cell(timestamp(r.time_grid, static_cast<int>(t))).cell(r.plant_names[p]);
            w.cell(std::string(coord::to_string(pr.dispatch.role)));
            w.cell(std::string(plant::to_string(before[p].methanation.mode)));
            w.cell(std::string(plant::to_string(pr.state.methanation.mode)));
            w.cell(pr.dispatch.h2_target_kg_per_h).cell(pr.dispatch.min_load_kg_per_h).cell(pr.dispatch.max_load_kg_per_h);
            w.cell(pr.state.methanation.load_kg_per_h).cell(pr.dispatch.planned_sng_kg).cell(pr.result.sng_kg);
            w.cell(pr.dispatch.curtailed ? 1 : 0).cell(pr.dispatch.started ? 1 : 0);
            w.cell(rec.dispatch.budget_kg).cell(rec.dispatch.budget_used_kg).cell(rec.dispatch.binding ? 1 : 0);
            w.cell(pr.result.setpoint_kw).cell(pr.result.effective_setpoint_kw).cell(pr.result.buffer_pressure_bar);
            w.end();
            before[p] = pr.state;
        }
    }
    w.close();
}

std::vector<std::pair<std::string, const SeasonTable*>> season_rows(const SeasonalTables& s) {
    return {{"heating", &s.heating}, {"non_heating", &s.non_heating}, {"whole_year", &s.year}};
}

void write_seasonal(const SimulationResult& r, const fs::path& dir, std::vector<fs::path>& files) {
    {
        const fs::path path = dir / "seasonal_electric.csv";
        CsvWriter w(path);
        w.cell("season").cell("transformer").cell("el_demand_mwh").cell("res_mwh").cell("surplus_mwh").cell("absorbed_mwh");
        w.cell("rpf_mwh").end();
        for (const auto& [label, table] : season_rows(r.seasonal)) {
            for (std::size_t f = 0; f < r.transformer_ids.size(); ++f) {
                const auto& ft = table->feeders[f];
                w.cell(label).cell(tr_label(r.transformer_ids[f])).cell(ft.el_demand_mwh).cell(ft.res_mwh);
                w.cell(ft.surplus_mwh).cell(ft.absorbed_mwh).cell(ft.rpf_mwh).end();
            }
        }
        w.close();
        files.push_back(path);
    }
    {
        const fs::path path = dir / "seasonal_gas.csv";
        CsvWriter w(path);
        w.cell("season").cell("ng_demand_mwh").cell("ng_imported_mwh").cell("sng_mwh").cell("linepack_delta_mwh");
        w.cell("sng_share_pct").end();
        for (const auto& [label, table] : season_rows(r.seasonal)) {
            const auto& g = table->gas;
            w.cell(label).cell(g.ng_demand_mwh).cell(g.ng_imported_mwh).cell(g.sng_mwh).cell(g.linepack_delta_mwh);
            w.cell(100.0 * g.sng_share()).end();
        }
        w.close();
        files.push_back(path);
    }
    {
        const fs::path path = dir / "seasonal_plants.csv";
        CsvWriter w(path);
        for (const char* c : {"season", "plant", "el_consumption_mwh", "surplus_energy_mwh", "deficit_energy_mwh", "sng_mwh",
                              "co2_t", "heat_mwh", "o2_t", "h2_produced_kg", "running_steps", "curtailed_steps"}) {
            w.cell(std::string(c));
        }
        w.end();
        for (const auto& [label, table] : season_rows(r.seasonal)) {
            for (std::size_t p = 0; p < r.plant_names.size(); ++p) {
                const auto& pt = table->plants[p];
                w.cell(label).cell(r.plant_names[p]).cell(pt.electricity_mwh).cell(pt.accounts.surplus_energy_mwh);
                w.cell(pt.accounts.deficit_energy_mwh).cell(pt.accounts.sng_mwh).cell(pt.accounts.co2_t);
                w.cell(pt.accounts.heat_mwh).cell(pt.accounts.o2_t).cell(pt.h2_produced_kg).cell(pt.running_steps);
                w.cell(pt.curtailed_steps).end();
            }
        }
        w.close();
        files.push_back(path);
    }
}

void write_duration_curves(const SimulationResult& r, const fs::path& path) {
    std::vector<std::string> header{"rank"};
    std::vector<std::vector<double>> columns;
    for (std::size_t f = 0; f < r.transformer_ids.size(); ++f) {
        for (int kind = 0; kind < 3; ++kind) {
            static const char* names[] = {"_rpf_kw", "_surplus_kw", "_import_kw"};
            header.push_back(tr_label(r.transformer_ids[f]) + names[kind]);
            std::vector<double> col;
            for (const auto& rec : r.records) {
                const auto& fr = rec.feeders[f];
                col.push_back(kind == 0 ? fr.rpf_kw : kind == 1 ? fr.surplus_kw : fr.import_kw);
            }
            columns.push_back(std::move(col));
        }
    }
    header.push_back("gas_p_mean_barg");
    columns.emplace_back();
    for (const auto& rec : r.records) columns.back().push_back(rec.gas_p_mean_barg);
    for (std::size_t p = 0; p < r.plant_names.size(); ++p) {
        header.push_back(r.plant_names[p] + "_effective_kw");
        columns.emplace_back();
        for (const auto& rec : r.records) columns.back().push_back(rec.plants[p].result.effective_setpoint_kw);
    }
    for (auto& c : columns) std::sort(c.begin(), c.end(), std::greater<>());

    CsvWriter w(path);
    for (const auto& h : header) w.cell(h);
    w.end();
    for (std::size_t k = 0; k < r.records.size(); ++k) {
        w.cell(k);
        for (const auto& c : columns) w.cell(c[k]);
        w.end();
    }
    w.close();
}

json sizing_json(const plant::CapexSizing& z) {
    return {{"electrolyzer_kwe", z.electrolyzer_kwe},
            {"h2_buffer_m3_h2", z.h2_buffer_m3},
            {"methanation_kw_sng", z.methanation_kw_sng}};
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace

std::vector<fs::path> emit_reports(const SimulationResult& r, const fs::path& dir, const ReportOptions& options) {
    fs::create_directories(dir);
    std::vector<fs::path> files;
    write_timeseries(r, dir / "timeseries.csv");
    files.push_back(dir / "timeseries.csv");
    write_dispatch_log(r, dir / "dispatch_log.csv");
    files.push_back(dir / "dispatch_log.csv");
    write_seasonal(r, dir, files);
    write_duration_curves(r, dir / "duration_curves.csv");
    files.push_back(dir / "duration_curves.csv");

    const auto economics = r.annual_plant_economics();
    {
        json plants = json::array();
        for (const auto& pe : economics) {
            plants.push_back({{"name", pe.name}, {"accounts", pe.accounts}, {"capex_sizing", sizing_json(pe.sizing)}});
        }
        write_json(dir / "plant_accounts.json",
                   {{"annualization_factor", r.annualization_factor()}, {"plants", plants}});
        files.push_back(dir / "plant_accounts.json");
    }
    {
        std::vector<econ::CostScenario> scenarios = options.cost_scenarios;
        if (scenarios.empty()) scenarios = {econ::cost_scenario_2030(), econ::cost_scenario_2050()};
        CsvWriter w(dir / "lc_sng.csv");
        w.cell("plant").cell("year").cell("surplus_price_eur_per_mwh").cell("lc_sng_eur_per_mwh").end();
        for (const auto& s : scenarios) {
            for (double price : options.surplus_prices_eur_per_mwh) {
                econ::CostScenario cs = s;
                cs.surplus_price_eur_per_mwh = price;
                for (const auto& pe : economics) {
                    w.cell(pe.name).cell(cs.year_label).cell(price);
                    if (pe.accounts.sng_mwh > 0.0) {
                        w.cell(econ::lc_sng(pe.accounts, cs, pe.sizing));
                    } else {
                        w.cell(std::string("nan"));
                    }
                    w.end();
                }
            }
        }
        w.close();
        files.push_back(dir / "lc_sng.csv");
    }
    {
        json names = json::array();
        for (const auto& f : files) names.push_back(f.filename().string());
        write_json(dir / "manifest.json", {{"scenario", r.scenario_name},
                                           {"seed", r.seed},
                                           {"config_hash", r.config_hash},
                                           {"start", r.time_grid.start_iso()},
                                           {"step_minutes", r.time_grid.step_minutes},
                                           {"step_count", r.time_grid.step_count},
                                           {"records", r.records.size()},
                                           {"plants", r.plant_names},
                                           {"transformers", r.transformer_ids},
                                           {"files", names}});
        files.push_back(dir / "manifest.json");
    }
    return files;
}

std::vector<econ::PlantEconomics> read_plant_accounts(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open file");
    std::vector<econ::PlantEconomics> out;
    try {
        const json j = json::parse(in);
        for (const auto& p : j.at("plants")) {
            econ::PlantEconomics pe;
            pe.name = p.at("name").get<std::string>();
            pe.accounts = p.at("accounts").get<econ::AnnualAccounts>();
            const auto& z = p.at("capex_sizing");
            pe.sizing.electrolyzer_kwe = z.at("electrolyzer_kwe").get<double>();
            pe.sizing.h2_buffer_m3 = z.at("h2_buffer_m3_h2").get<double>();
            pe.sizing.methanation_kw_sng = z.at("methanation_kw_sng").get<double>();
            out.push_back(std::move(pe));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Invariants

double gas_mass_balance_error(const SimulationResult& r) {
    double net = 0.0;
    double inflow = 0.0;
    for (const auto& rec : r.records) {
        net += rec.citygate_kg + rec.sng_injected_kg - rec.withdrawal_kg;
        inflow += rec.citygate_kg + rec.sng_injected_kg;
    }
    const double end = r.records.empty() ? r.initial_stored_mass_kg : r.records.back().stored_mass_kg;
    const double delta = end - r.initial_stored_mass_kg;
    return std::abs(delta - net) / std::max({inflow, std::abs(delta), 1e-12});
}

namespace {

bool close_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

void compare_tables(const SeasonTable& a, const SeasonTable& b, const std::string& what, double rel,
                    std::vector<Violation>& out) {
    auto check = [&](double x, double y, const std::string& field) {
        if (!close_rel(x, y, rel)) out.push_back({-1, what + ": " + field + " differs from the sum of records"});
    };
    check(a.steps, b.steps, "steps");
    for (std::size_t f = 0; f < a.feeders.size(); ++f) {
        check(a.feeders[f].surplus_mwh, b.feeders[f].surplus_mwh, "surplus");
        check(a.feeders[f].absorbed_mwh, b.feeders[f].absorbed_mwh, "absorbed surplus");
        check(a.feeders[f].rpf_mwh, b.feeders[f].rpf_mwh, "RPF");
        check(a.feeders[f].el_demand_mwh, b.feeders[f].el_demand_mwh, "demand");
    }
    check(a.gas.ng_demand_kg, b.gas.ng_demand_kg, "gas demand");
    check(a.gas.ng_imported_kg, b.gas.ng_imported_kg, "gas import");
    check(a.gas.sng_kg, b.gas.sng_kg, "SNG");
    for (std::size_t p = 0; p < a.plants.size(); ++p) {
        check(a.plants[p].accounts.sng_mwh, b.plants[p].accounts.sng_mwh, "plant SNG");
        check(a.plants[p].electricity_mwh, b.plants[p].electricity_mwh, "plant electricity");
    }
}

}  // namespace

std::vector<Violation> check_invariants(const SimulationResult& r, const scenario::Scenario& sc,
                                        const InvariantTolerances& tol) {
    std::vector<Violation> out;
    if (r.records.size() != static_cast<std::size_t>(r.time_grid.step_count)) {
        out.push_back({-1, "record count differs from the step count"});
    }
    const double dt_h = r.time_grid.step_hours();
    std::vector<plant::PlantState> before = r.initial_plant_states;
    char buf[256];
    for (std::size_t t = 0; t < r.records.size(); ++t) {
        const StepRecord& rec = r.records[t];
        const int step = static_cast<int>(t);
        if (rec.gas_p_max_barg > sc.gas.p_max_barg + tol.gas_pressure_bar) {
            std::snprintf(buf, sizeof buf, "gas pressure %.6f barg above the %.2f barg limit", rec.gas_p_max_barg,
                          sc.gas.p_max_barg);
            out.push_back({step, buf});
        }
        if (rec.gas_p_min_barg < sc.gas.p_min_barg - tol.gas_pressure_bar) {
            std::snprintf(buf, sizeof buf, "gas pressure %.6f barg below the %.2f barg limit", rec.gas_p_min_barg,
                          sc.gas.p_min_barg);
            out.push_back({step, buf});
        }
        for (std::size_t f = 0; f < rec.feeders.size(); ++f) {
            const FeederRecord& fr = rec.feeders[f];
            const double gap = fr.surplus_kw - fr.absorbed_kw - fr.rpf_kw;
            if (std::abs(gap) > tol.feeder_ledger_kw + rec.power_flow_residual_kw) {
                std::snprintf(buf, sizeof buf, "feeder %zu: surplus - absorbed - RPF = %.6g kW", f, gap);
                out.push_back({step, buf});
            }
        }
        for (std::size_t p = 0; p < rec.plants.size(); ++p) {
            const auto& cfg = sc.plants[p];
            const PlantRecord& pr = rec.plants[p];
            const double bar = pr.result.buffer_pressure_bar;
            if (bar < cfg.buffer.p_min_bar * (1.0 - tol.buffer_relative) ||
                bar > cfg.buffer.p_max_bar * (1.0 + tol.buffer_relative)) {
                std::snprintf(buf, sizeof buf, "%s: buffer pressure %.6f bar outside [%.2f, %.2f]", cfg.name.c_str(), bar,
                              cfg.buffer.p_min_bar, cfg.buffer.p_max_bar);
                out.push_back({step, buf});
            }
            const double expected = before[p].buffer.stored_mass_kg + pr.result.h2_produced_kg - pr.result.h2_to_methanation_kg;
            if (!close_rel(pr.state.buffer.stored_mass_kg, expected, tol.buffer_relative)) {
                out.push_back({step, cfg.name + ": hydrogen buffer ledger does not close"});
            }
            const auto& m = cfg.methanation;
            const double prev = before[p].methanation.mode == plant::MethMode::UpAndRunning
                                    ? before[p].methanation.load_kg_per_h
                                    : 0.0;
            const double now = pr.state.methanation.mode == plant::MethMode::UpAndRunning ? pr.state.methanation.load_kg_per_h
                                                                                          : 0.0;
            if (now - prev > m.ramp_up_kg_per_h2 * dt_h + tol.ramp_kg_per_h ||
                prev - now > m.ramp_down_kg_per_h2 * dt_h + tol.ramp_kg_per_h) {
                std::snprintf(buf, sizeof buf, "%s: methanation load moved %.6f -> %.6f kg/h beyond the ramp limits",
                              cfg.name.c_str(), prev, now);
                out.push_back({step, buf});
            }
            if (now > m.nominal_h2_intake_kg_per_h * (1.0 + 1e-12)) {
                out.push_back({step, cfg.name + ": methanation load above nominal"});
            }
            before[p] = pr.state;
        }
    }
    const double mass_err = gas_mass_balance_error(r);
    if (mass_err > tol.gas_mass_relative) {
        std::snprintf(buf, sizeof buf, "gas mass balance error %.3g exceeds %.3g", mass_err, tol.gas_mass_relative);
        out.push_back({-1, buf});
    }
    const SeasonalTables fresh = aggregate(r);
    compare_tables(r.seasonal.year, fresh.year, "whole year", tol.aggregate_relative, out);
    compare_tables(r.seasonal.heating, fresh.heating, "heating season", tol.aggregate_relative, out);
    compare_tables(r.seasonal.non_heating, fresh.non_heating, "non-heating season", tol.aggregate_relative, out);
    SeasonTable sum = fresh.heating;
    sum.steps += fresh.non_heating.steps;
    for (std::size_t f = 0; f < sum.feeders.size(); ++f) {
        sum.feeders[f].surplus_mwh += fresh.non_heating.feeders[f].surplus_mwh;
        sum.feeders[f].absorbed_mwh += fresh.non_heating.feeders[f].absorbed_mwh;
        sum.feeders[f].rpf_mwh += fresh.non_heating.feeders[f].rpf_mwh;
        sum.feeders[f].el_demand_mwh += fresh.non_heating.feeders[f].el_demand_mwh;
    }
    sum.gas.ng_demand_kg += fresh.non_heating.gas.ng_demand_kg;
    sum.gas.ng_imported_kg += fresh.non_heating.gas.ng_imported_kg;
    sum.gas.sng_kg += fresh.non_heating.gas.sng_kg;
    for (std::size_t p = 0; p < sum.plants.size(); ++p) {
        sum.plants[p].accounts += fresh.non_heating.plants[p].accounts;
        sum.plants[p].electricity_mwh += fresh.non_heating.plants[p].electricity_mwh;
    }
    compare_tables(sum, fresh.year, "season split", 1e-9, out);
    return out;
}

}  // namespace p2g::sim
