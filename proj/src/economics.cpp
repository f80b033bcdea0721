#include "p2gsim/economics.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace p2g::econ {

CostScenario cost_scenario_2030() { return CostScenario{}; }

CostScenario cost_scenario_2050() {
    CostScenario s;
    s.year_label = 2050;
    s.capex = {400.0, 50.0, 300.0};
    s.opex_fraction = {0.02, 0.015, 0.03};
    return s;
}

void validate(const CostScenario& s) {
    auto non_negative = [](double v, const char* what) {
        if (!(v >= 0.0)) throw std::invalid_argument(std::string("cost scenario: ") + what + " must be >= 0");
    };
    non_negative(s.capex.electrolyzer, "electrolyzer CAPEX");
    non_negative(s.capex.h2_buffer, "buffer CAPEX");
    non_negative(s.capex.methanation, "methanation CAPEX");
    non_negative(s.opex_fraction.electrolyzer, "electrolyzer OPEX fraction");
    non_negative(s.opex_fraction.h2_buffer, "buffer OPEX fraction");
    non_negative(s.opex_fraction.methanation, "methanation OPEX fraction");
    non_negative(s.wacc, "wacc");
    non_negative(s.deficit_price_eur_per_mwh, "deficit price");
    non_negative(s.surplus_price_eur_per_mwh, "surplus price");
    non_negative(s.stack_replacement_fraction, "stack replacement fraction");
    non_negative(s.co2_cost_eur_per_t, "CO2 cost");
    non_negative(s.o2_revenue_eur_per_t, "O2 revenue");
    non_negative(s.heat_revenue_eur_per_mwh, "heat revenue");
    if (s.plant_lifetime_y < 1) throw std::invalid_argument("cost scenario: plant lifetime must be >= 1 year");
    if (s.replacement_period_y < 1) throw std::invalid_argument("cost scenario: replacement period must be >= 1 year");
}

AnnualAccounts& AnnualAccounts::operator+=(const AnnualAccounts& o) {
    surplus_energy_mwh += o.surplus_energy_mwh;
    deficit_energy_mwh += o.deficit_energy_mwh;
    sng_mwh += o.sng_mwh;
    co2_t += o.co2_t;
    o2_t += o.o2_t;
    heat_mwh += o.heat_mwh;
    return *this;
}

AnnualAccounts AnnualAccounts::scaled(double f) const {
    return AnnualAccounts{surplus_energy_mwh * f, deficit_energy_mwh * f, sng_mwh * f, co2_t * f, o2_t * f,
                          heat_mwh * f};
}

double total_capex(const CostScenario& s, const plant::CapexSizing& z) {
    return s.capex.electrolyzer * z.electrolyzer_kwe + s.capex.h2_buffer * z.h2_buffer_m3 +
           s.capex.methanation * z.methanation_kw_sng;
}

CashFlow annual_cashflow(const AnnualAccounts& a, const CostScenario& s, const plant::CapexSizing& z, int i) {
    if (i < 0 || i > s.plant_lifetime_y) throw std::out_of_range("annual_cashflow: year index outside [0, lifetime]");
    CashFlow cf;
    if (i == 0) {
        cf.capex = total_capex(s, z);
        return cf;
    }
    cf.opex = s.opex_fraction.electrolyzer * s.capex.electrolyzer * z.electrolyzer_kwe +
              s.opex_fraction.h2_buffer * s.capex.h2_buffer * z.h2_buffer_m3 +
              s.opex_fraction.methanation * s.capex.methanation * z.methanation_kw_sng;
    cf.c_el = a.surplus_energy_mwh * s.surplus_price_eur_per_mwh + a.deficit_energy_mwh * s.deficit_price_eur_per_mwh;
    cf.c_co2 = a.co2_t * s.co2_cost_eur_per_t;
    if (i % s.replacement_period_y == 0 && i < s.plant_lifetime_y) {
        cf.c_r = s.stack_replacement_fraction * s.capex.electrolyzer * z.electrolyzer_kwe;
    }
    cf.r_o2 = a.o2_t * s.o2_revenue_eur_per_t;
    cf.r_heat = a.heat_mwh * s.heat_revenue_eur_per_mwh;
    return cf;
}

double discounted_sum(std::span<const double> values, double wacc) {
    double total = 0.0;
    double factor = 1.0;
    for (double v : values) {
        total += v / factor;
        factor *= 1.0 + wacc;
    }
    return total;
}

double lc_sng(std::span<const CashFlow> cashflows, std::span<const double> sng_mwh, double wacc) {
    if (cashflows.size() != sng_mwh.size()) throw std::invalid_argument("lc_sng: cash flow and energy lengths differ");
    std::vector<double> net(cashflows.size());
    for (std::size_t i = 0; i < net.size(); ++i) net[i] = cashflows[i].net();
    const double energy = discounted_sum(sng_mwh, wacc);
    if (!(energy > 0.0)) throw std::domain_error("lc_sng: no SNG produced over the plant lifetime");
    return discounted_sum(net, wacc) / energy;
}

namespace {

std::vector<double> yearly_energy(double per_year, int lifetime) {
    std::vector<double> e(static_cast<std::size_t>(lifetime) + 1, per_year);
    e[0] = 0.0;
    return e;
}

}  // namespace

double lc_sng(const AnnualAccounts& a, const CostScenario& s, const plant::CapexSizing& z) {
    std::vector<CashFlow> flows;
    for (int i = 0; i <= s.plant_lifetime_y; ++i) flows.push_back(annual_cashflow(a, s, z, i));
    return lc_sng(flows, yearly_energy(a.sng_mwh, s.plant_lifetime_y), s.wacc);
}

double surplus_price_slope(const AnnualAccounts& a, const CostScenario& s) {
    return discounted_sum(yearly_energy(a.surplus_energy_mwh, s.plant_lifetime_y), s.wacc) /
           discounted_sum(yearly_energy(a.sng_mwh, s.plant_lifetime_y), s.wacc);
}

double byproduct_credit(const AnnualAccounts& a, const CostScenario& s) {
    const double revenue = a.o2_t * s.o2_revenue_eur_per_t + a.heat_mwh * s.heat_revenue_eur_per_mwh;
    return discounted_sum(yearly_energy(revenue, s.plant_lifetime_y), s.wacc) /
           discounted_sum(yearly_energy(a.sng_mwh, s.plant_lifetime_y), s.wacc);
}

std::vector<SweepCell> sensitivity_sweep(std::span<const CostScenario> scenarios, std::span<const double> prices,
                                         std::span<const PlantEconomics> plants) {
    std::vector<SweepCell> cells;
    for (const CostScenario& base : scenarios) {
        for (double price : prices) {
            CostScenario s = base;
            s.surplus_price_eur_per_mwh = price;
            for (const PlantEconomics& p : plants) {
                cells.push_back(SweepCell{p.name, s.year_label, price, lc_sng(p.accounts, s, p.sizing)});
            }
        }
    }
    return cells;
}

namespace {

void to_json(nlohmann::json& j, const ComponentValues& v) {
    j = {{"electrolyzer", v.electrolyzer}, {"h2_buffer", v.h2_buffer}, {"methanation", v.methanation}};
}

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}

void read_components(const nlohmann::json& j, const char* key, ComponentValues& v) {
    if (!j.contains(key)) return;
    const auto& c = j.at(key);
    check_keys(c, {"electrolyzer", "h2_buffer", "methanation"}, std::string("cost scenario.") + key);
    v.electrolyzer = c.value("electrolyzer", v.electrolyzer);
    v.h2_buffer = c.value("h2_buffer", v.h2_buffer);
    v.methanation = c.value("methanation", v.methanation);
}

}  // namespace

// CAPEX units: electrolyzer EUR/kWe, buffer EUR/m3 H2, methanation EUR/kW SNG.
void to_json(nlohmann::json& j, const CostScenario& s) {
    nlohmann::json capex;
    nlohmann::json opex;
    to_json(capex, s.capex);
    to_json(opex, s.opex_fraction);
    j = nlohmann::json{{"year_label", s.year_label},
                       {"capex_eur_per_unit", capex},
                       {"opex_fraction_of_capex", opex},
                       {"plant_lifetime_y", s.plant_lifetime_y},
                       {"wacc", s.wacc},
                       {"deficit_price_eur_per_mwh", s.deficit_price_eur_per_mwh},
                       {"surplus_price_eur_per_mwh", s.surplus_price_eur_per_mwh},
                       {"stack_replacement_fraction", s.stack_replacement_fraction},
                       {"replacement_period_y", s.replacement_period_y},
                       {"co2_cost_eur_per_t", s.co2_cost_eur_per_t},
                       {"o2_revenue_eur_per_t", s.o2_revenue_eur_per_t},
                       {"heat_revenue_eur_per_mwh", s.heat_revenue_eur_per_mwh}};
}

void from_json(const nlohmann::json& j, CostScenario& s) {
    check_keys(j,
               {"year_label", "capex_eur_per_unit", "opex_fraction_of_capex", "plant_lifetime_y", "wacc",
                "deficit_price_eur_per_mwh", "surplus_price_eur_per_mwh", "stack_replacement_fraction",
                "replacement_period_y", "co2_cost_eur_per_t", "o2_revenue_eur_per_t", "heat_revenue_eur_per_mwh"},
               "cost scenario");
    const int year = j.value("year_label", 2030);
    if (year == 2030) {
        s = cost_scenario_2030();
    } else if (year == 2050) {
        s = cost_scenario_2050();
    } else {
        s = CostScenario{};
        s.year_label = year;
    }
    read_components(j, "capex_eur_per_unit", s.capex);
    read_components(j, "opex_fraction_of_capex", s.opex_fraction);
    s.plant_lifetime_y = j.value("plant_lifetime_y", s.plant_lifetime_y);
    s.wacc = j.value("wacc", s.wacc);
    s.deficit_price_eur_per_mwh = j.value("deficit_price_eur_per_mwh", s.deficit_price_eur_per_mwh);
    s.surplus_price_eur_per_mwh = j.value("surplus_price_eur_per_mwh", s.surplus_price_eur_per_mwh);
    s.stack_replacement_fraction = j.value("stack_replacement_fraction", s.stack_replacement_fraction);
    s.replacement_period_y = j.value("replacement_period_y", s.replacement_period_y);
    s.co2_cost_eur_per_t = j.value("co2_cost_eur_per_t", s.co2_cost_eur_per_t);
    s.o2_revenue_eur_per_t = j.value("o2_revenue_eur_per_t", s.o2_revenue_eur_per_t);
    s.heat_revenue_eur_per_mwh = j.value("heat_revenue_eur_per_mwh", s.heat_revenue_eur_per_mwh);
    validate(s);
}

void to_json(nlohmann::json& j, const AnnualAccounts& a) {
    j = nlohmann::json{{"surplus_energy_mwh", a.surplus_energy_mwh}, {"deficit_energy_mwh", a.deficit_energy_mwh},
                       {"sng_mwh", a.sng_mwh},       {"co2_t", a.co2_t},
                       {"o2_t", a.o2_t},             {"heat_mwh", a.heat_mwh}};
}

void from_json(const nlohmann::json& j, AnnualAccounts& a) {
    a.surplus_energy_mwh = j.at("surplus_energy_mwh").get<double>();
    a.deficit_energy_mwh = j.at("deficit_energy_mwh").get<double>();
    a.sng_mwh = j.at("sng_mwh").get<double>();
    a.co2_t = j.at("co2_t").get<double>();
    a.o2_t = j.at("o2_t").get<double>();
    a.heat_mwh = j.at("heat_mwh").get<double>();
}

}  // namespace p2g::econ
