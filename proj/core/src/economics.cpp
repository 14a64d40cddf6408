#include "spraysim/economics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace spraysim {

double spray_delta(double s_simple, double s_multi) {
    if (s_simple < 0 || s_multi < 0) throw EconomicsError("spray volumes must be non-negative");
    return s_simple - s_multi;
}

double per_litre_cost(const CostParams& p) {
    if (p.water_ratio < 0 || p.water_ratio > 1)
        throw EconomicsError("water ratio must be within [0, 1]");
    if (p.chemical_cost < 0 || p.water_cost < 0)
        throw EconomicsError("costs must be non-negative");
    return (1.0 - p.water_ratio) * p.chemical_cost + p.water_ratio * p.water_cost;
}

double cost_delta(double spray_delta_l, const CostParams& p) {
    return per_litre_cost(p) * spray_delta_l;
}

double breakeven_volume(const CostParams& p) {
    double c = per_litre_cost(p);
    if (c <= 0) throw EconomicsError("per-litre cost must be positive for a break-even");
    return p.asc_premium / c;
}

double years_to_profit(double spray_delta_l_per_ha, const CostParams& p) {
    if (p.total_area_ha <= 0 || p.runs_per_year <= 0)
        throw EconomicsError("area and run count must be positive");
    double savings_per_year =
        cost_delta(spray_delta_l_per_ha, p) * p.total_area_ha * p.runs_per_year;
    if (savings_per_year <= 0) return std::numeric_limits<double>::infinity();
    return p.asc_premium / savings_per_year;
}

CostResult evaluate_costs(double spray_delta_l_per_ha, const CostParams& p) {
    CostResult r;
    r.spray_delta_l = spray_delta_l_per_ha * p.total_area_ha;
    r.cost_delta_eur = cost_delta(r.spray_delta_l, p);
    r.breakeven_volume_l = breakeven_volume(p);
    r.years_to_profit = years_to_profit(spray_delta_l_per_ha, p);
    return r;
}

std::vector<CostTableEntry> cost_table(const std::vector<double>& ds_per_ha,
                                       const std::vector<double>& premiums,
                                       const std::vector<double>& areas,
                                       const std::vector<double>& chemical_costs,
                                       const CostParams& base) {
    std::vector<CostTableEntry> out;
    out.reserve(ds_per_ha.size() * premiums.size() * areas.size() * chemical_costs.size());
    for (double ds : ds_per_ha) {
        for (double premium : premiums) {
            for (double area : areas) {
                for (double chem : chemical_costs) {
                    CostParams p = base;
                    p.asc_premium = premium;
                    p.total_area_ha = area;
                    p.chemical_cost = chem;
                    CostTableEntry e;
                    e.ds_per_ha = ds;
                    e.asc_premium = premium;
                    e.total_area_ha = area;
                    e.chemical_cost = chem;
                    e.years = years_to_profit(ds, p);
                    out.push_back(e);
                }
            }
        }
    }
    return out;
}

std::string cost_table_csv(const std::vector<CostTableEntry>& table) {
    std::ostringstream out;
    out << "dS_per_ha,dK_ASC,A_total,C_chemical,N_years\n";
    char buf[128];
    for (const CostTableEntry& e : table) {
        std::snprintf(buf, sizeof(buf), "%.1f,%.0f,%.0f,%.0f,%.1f\n", e.ds_per_ha,
                      e.asc_premium, e.total_area_ha, e.chemical_cost, e.years);
        out << buf;
    }
    return out.str();
}

}  // namespace spraysim
