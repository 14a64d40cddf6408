#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spraysim {

class EconomicsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Inputs of the break-even analysis. The spray mixture is water_ratio
/// water and (1 - water_ratio) chemical by volume.
struct CostParams {
    double chemical_cost = 30.0;    // EUR/l
    double water_cost = 0.002;      // EUR/l
    double water_ratio = 0.99;      // fraction
    double asc_premium = 100000.0;  // EUR purchase-price difference
    double total_area_ha = 30.0;    // farm-wide sprayed area
    double runs_per_year = 8.0;     // field runs per crop cycle
};

struct CostResult {
    double spray_delta_l = 0.0;       // extra volume of the simple setup, l
    double cost_delta_eur = 0.0;      // mixture cost of that volume
    double breakeven_volume_l = 0.0;  // volume at which the premium is recovered
    double years_to_profit = 0.0;     // years until savings match the premium
};

/// Extra spray volume a 1- or 2-section run needs over the multi-section run.
double spray_delta(double s_simple, double s_multi);

/// Mixture cost of one litre: (1 - water_ratio)*C_chemical + water_ratio*C_water.
double per_litre_cost(const CostParams& p);

/// Cost of an extra spray volume (EUR).
double cost_delta(double spray_delta_l, const CostParams& p);

/// Spray-volume difference at which the ASC premium is recovered. Throws on
/// a non-positive per-litre cost.
double breakeven_volume(const CostParams& p);

/// Years until the farm-wide savings of the per-hectare spray delta equal
/// the ASC premium. Returns +inf when the savings rate is zero (never
/// profitable).
double years_to_profit(double spray_delta_l_per_ha, const CostParams& p);

CostResult evaluate_costs(double spray_delta_l_per_ha, const CostParams& p);

struct CostTableEntry {
    double ds_per_ha = 0.0;      // l/ha
    double asc_premium = 0.0;    // EUR
    double total_area_ha = 0.0;  // ha
    double chemical_cost = 0.0;  // EUR/l
    double years = 0.0;
};

/// Full years-to-profit matrix over the given parameter grids.
std::vector<CostTableEntry> cost_table(const std::vector<double>& ds_per_ha,
                                       const std::vector<double>& premiums,
                                       const std::vector<double>& areas,
                                       const std::vector<double>& chemical_costs,
                                       const CostParams& base);

std::string cost_table_csv(const std::vector<CostTableEntry>& table);

}  // namespace spraysim
