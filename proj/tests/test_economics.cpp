#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spraysim/economics.hpp"

using namespace spraysim;

TEST_CASE("spray delta") {
    CHECK(spray_delta(89.9, 6.9) == doctest::Approx(83.0));
    CHECK(spray_delta(5.0, 5.0) == 0.0);
    CHECK_THROWS_AS(spray_delta(-1.0, 0.0), EconomicsError);
}

TEST_CASE("cost delta per litre") {
    CostParams p;  // 30 EUR/l chemical, 0.002 water, 99% water
    CHECK(cost_delta(1.0, p) == doctest::Approx(0.30198));
    CostParams all_water = p;
    all_water.water_ratio = 1.0;
    CHECK(cost_delta(10.0, all_water) == doctest::Approx(10.0 * 0.002));
}

TEST_CASE("field-run counts until ASC pays off on an 83 litre saving") {
    CostParams p;
    double per_run = cost_delta(83.0, p);
    CHECK(per_run == doctest::Approx(25.064).epsilon(1e-4));
    double runs = p.asc_premium / per_run;
    CHECK(runs == doctest::Approx(3990.0).epsilon(0.002));

    CostParams cheap = p;
    cheap.chemical_cost = 10.0;
    double runs_cheap = cheap.asc_premium / cost_delta(83.0, cheap);
    CHECK(runs_cheap == doctest::Approx(11814.0).epsilon(0.002));
}

TEST_CASE("break-even volumes") {
    CostParams p;
    CHECK(breakeven_volume(p) == doctest::Approx(331147.0).epsilon(1e-4));
    CostParams cheap = p;
    cheap.chemical_cost = 10.0;
    CHECK(breakeven_volume(cheap) == doctest::Approx(980584.0).epsilon(1e-4));
    CostParams zero = p;
    zero.asc_premium = 0.0;
    CHECK(breakeven_volume(zero) == 0.0);
    CostParams free_mix = p;
    free_mix.chemical_cost = 0.0;
    free_mix.water_cost = 0.0;
    CHECK_THROWS_AS(breakeven_volume(free_mix), EconomicsError);
}

TEST_CASE("break-even volume times per-litre cost recovers the premium exactly") {
    for (double chem : {10.0, 30.0, 55.0}) {
        CostParams p;
        p.chemical_cost = chem;
        CHECK(breakeven_volume(p) * per_litre_cost(p) == doctest::Approx(p.asc_premium));
    }
}

TEST_CASE("years to profitability") {
    CostParams p;  // 100k premium, 30 ha, 8 runs
    CHECK(years_to_profit(18.6, p) == doctest::Approx(74.2).epsilon(0.001));
    CostParams cheap = p;
    cheap.chemical_cost = 10.0;
    CHECK(years_to_profit(18.6, cheap) == doctest::Approx(219.7).epsilon(0.001));
    CostParams big = p;
    big.total_area_ha = 1000.0;
    CHECK(years_to_profit(18.6, big) == doctest::Approx(2.2).epsilon(0.01));
    CHECK(std::isinf(years_to_profit(0.0, p)));
}

TEST_CASE("years scale inversely with area and runs, linearly with premium") {
    CostParams p;
    double base = years_to_profit(20.0, p);
    CostParams double_area = p;
    double_area.total_area_ha *= 2.0;
    CHECK(years_to_profit(20.0, double_area) == doctest::Approx(base / 2.0));
    CostParams double_runs = p;
    double_runs.runs_per_year *= 2.0;
    CHECK(years_to_profit(20.0, double_runs) == doctest::Approx(base / 2.0));
    CostParams double_premium = p;
    double_premium.asc_premium *= 2.0;
    CHECK(years_to_profit(20.0, double_premium) == doctest::Approx(base * 2.0));
}

TEST_CASE("dropping the water ratio to 98% roughly halves the years") {
    CostParams p;
    CostParams stronger = p;
    stronger.water_ratio = 0.98;
    double ratio = years_to_profit(18.6, stronger) / years_to_profit(18.6, p);
    CHECK(ratio > 0.45);
    CHECK(ratio < 0.55);
}

TEST_CASE("cost table covers the full grid and matches direct evaluation") {
    CostParams base;
    auto table = cost_table({18.6, 16.7, 22.5, 18.7}, {100000.0, 200000.0},
                            {30.0, 100.0, 300.0, 600.0, 1000.0}, {30.0, 10.0}, base);
    CHECK(table.size() == 4 * 2 * 5 * 2);
    for (const auto& e : table) {
        CostParams p = base;
        p.asc_premium = e.asc_premium;
        p.total_area_ha = e.total_area_ha;
        p.chemical_cost = e.chemical_cost;
        CHECK(e.years == doctest::Approx(years_to_profit(e.ds_per_ha, p)));
    }
    std::string csv = cost_table_csv(table);
    CHECK(csv.rfind("dS_per_ha,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 81);
}

TEST_CASE("selected table entries match the reference evaluation") {
    CostParams p;
    p.asc_premium = 200000.0;
    CHECK(years_to_profit(18.6, p) == doctest::Approx(148.4).epsilon(0.001));
    p.asc_premium = 100000.0;
    p.total_area_ha = 1000.0;
    CHECK(years_to_profit(22.5, p) == doctest::Approx(1.8).epsilon(0.02));
}
