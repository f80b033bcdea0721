#include "p2gsim/economics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace p2g::econ;

namespace {

CostScenario plain_scenario() {
    CostScenario s;
    s.capex = {0.0, 0.0, 0.0};
    s.opex_fraction = {0.0, 0.0, 0.0};
    s.co2_cost_eur_per_t = 0.0;
    s.o2_revenue_eur_per_t = 0.0;
    s.heat_revenue_eur_per_mwh = 0.0;
    s.stack_replacement_fraction = 0.0;
    return s;
}

}  // namespace

TEST(Discounting, AnnuityGolden) {
    std::vector<double> ones(21, 1.0);
    ones[0] = 0.0;
    EXPECT_NEAR(discounted_sum(ones, 0.08), 9.818147407449291, 1e-12);
}

TEST(LcSng, HandWorkedExample) {
    const std::vector<CashFlow> flows = [] {
        std::vector<CashFlow> f(21);
        f[0].capex = 1000.0;
        for (int i = 1; i <= 20; ++i) f[i].opex = 50.0;
        return f;
    }();
    std::vector<double> sng(21, 10.0);
    sng[0] = 0.0;
    EXPECT_NEAR(lc_sng(flows, sng, 0.08), 15.185220882315062, 1e-12);
}

TEST(LcSng, ElectricityCostGolden) {
    CostScenario s = plain_scenario();
    AnnualAccounts a;
    a.surplus_energy_mwh = 100.0;
    a.deficit_energy_mwh = 10.0;
    a.sng_mwh = 50.0;
    EXPECT_DOUBLE_EQ(annual_cashflow(a, s, {}, 1).c_el, 2100.0);
    EXPECT_EQ(annual_cashflow(a, s, {}, 0).c_el, 0.0);
}

TEST(LcSng, CapexOnlyInYearZeroAndReplacementSchedule) {
    const CostScenario s = cost_scenario_2030();
    const p2g::plant::CapexSizing z;
    const AnnualAccounts a{100, 10, 50, 1, 2, 3};
    EXPECT_DOUBLE_EQ(annual_cashflow(a, s, z, 0).capex, total_capex(s, z));
    EXPECT_DOUBLE_EQ(annual_cashflow(a, s, z, 0).net(), total_capex(s, z));
    for (int i = 1; i <= s.plant_lifetime_y; ++i) {
        const auto cf = annual_cashflow(a, s, z, i);
        EXPECT_EQ(cf.capex, 0.0);
        const bool replaced = (i == 5 || i == 10 || i == 15);
        EXPECT_EQ(cf.c_r > 0.0, replaced) << "year " << i;
    }
    EXPECT_DOUBLE_EQ(annual_cashflow(a, s, z, 5).c_r, 0.35 * 650.0 * 1200.0);
    EXPECT_THROW(annual_cashflow(a, s, z, 21), std::out_of_range);
}

TEST(LcSng, ZeroWaccIsSimpleRatio) {
    CostScenario s = plain_scenario();
    s.wacc = 0.0;
    s.capex = {100.0, 0.0, 0.0};
    p2g::plant::CapexSizing z{10.0, 0.0, 0.0};
    AnnualAccounts a;
    a.surplus_energy_mwh = 4.0;
    a.sng_mwh = 2.0;
    EXPECT_EQ(lc_sng(a, s, z), (1000.0 + 20.0 * 4.0 * 15.0) / (20.0 * 2.0));
}

TEST(LcSng, HomogeneousInProductionScale) {
    const CostScenario s = cost_scenario_2030();
    const p2g::plant::CapexSizing z;
    const AnnualAccounts a{1860, 170, 870, 179.2, 267.9, 260};
    const double base = lc_sng(a, s, z);
    const double doubled = lc_sng(a.scaled(2.0), s, z);
    EXPECT_LT(doubled, base);
    const double fixed = lc_sng(AnnualAccounts{0, 0, 870, 0, 0, 0}, s, z);
    EXPECT_NEAR(doubled - (fixed / 2.0), base - fixed, 1e-9 * base);
}

TEST(LcSng, SlopeAndByproductIdentities) {
    CostScenario s = cost_scenario_2050();
    const p2g::plant::CapexSizing z;
    const AnnualAccounts a{1300, 180, 590, 123.2, 185.2, 180};
    const double lo = lc_sng(a, s, z);
    s.surplus_price_eur_per_mwh += 10.0;
    EXPECT_NEAR(lc_sng(a, s, z) - lo, 10.0 * surplus_price_slope(a, s), 1e-9 * lo);
    const double with = lc_sng(a, s, z);
    CostScenario zeroed = s;
    zeroed.o2_revenue_eur_per_t = 0.0;
    zeroed.heat_revenue_eur_per_mwh = 0.0;
    EXPECT_NEAR(lc_sng(a, zeroed, z) - with, byproduct_credit(a, s), 1e-9 * with);
}

TEST(LcSng, NoProductionIsAnError) {
    EXPECT_THROW(lc_sng(AnnualAccounts{}, cost_scenario_2030(), {}), std::domain_error);
    std::vector<CashFlow> f(2);
    std::vector<double> e(3);
    EXPECT_THROW(lc_sng(f, e, 0.08), std::invalid_argument);
}

TEST(Sweep, NestingOrder) {
    const std::vector<CostScenario> sc{cost_scenario_2030(), cost_scenario_2050()};
    const std::vector<double> prices{0.0, 30.0};
    const std::vector<PlantEconomics> plants{{"A", {10, 1, 5, 1, 1, 1}, {}}, {"B", {20, 1, 9, 1, 1, 1}, {}}};
    const auto cells = sensitivity_sweep(sc, prices, plants);
    ASSERT_EQ(cells.size(), 8u);
    EXPECT_EQ(cells[0].plant, "A");
    EXPECT_EQ(cells[1].plant, "B");
    EXPECT_EQ(cells[2].surplus_price_eur_per_mwh, 30.0);
    EXPECT_EQ(cells[4].year_label, 2050);
}

TEST(Json, RoundTripAndStrictKeys) {
    const CostScenario s = cost_scenario_2050();
    nlohmann::json j;
    to_json(j, s);
    CostScenario back;
    from_json(j, back);
    EXPECT_EQ(back, s);

    const AnnualAccounts a{1, 2, 3, 4, 5, 6};
    nlohmann::json ja;
    to_json(ja, a);
    AnnualAccounts ab;
    from_json(ja, ab);
    EXPECT_EQ(ab, a);

    j["discount"] = 0.1;
    EXPECT_THROW(from_json(j, back), std::invalid_argument);
    j.erase("discount");
    j["wacc"] = -0.1;
    EXPECT_THROW(from_json(j, back), std::invalid_argument);
}

TEST(Defaults, YearScenariosDiffer) {
    const auto a = cost_scenario_2030();
    const auto b = cost_scenario_2050();
    EXPECT_LT(b.capex.electrolyzer, a.capex.electrolyzer);
    EXPECT_EQ(b.year_label, 2050);
    EXPECT_NO_THROW(validate(a));
    CostScenario bad = a;
    bad.plant_lifetime_y = 0;
    EXPECT_THROW(validate(bad), std::invalid_argument);
}
