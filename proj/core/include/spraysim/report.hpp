#pragma once

#include <string>
#include <vector>

#include "spraysim/economics.hpp"
#include "spraysim/field.hpp"
#include "spraysim/planner.hpp"
#include "spraysim/simulator.hpp"

namespace spraysim {

/// One field's six-setup outcome, rows ordered M1 x {one,two,multi} then
/// M2 x {one,two,multi}.
struct FieldResult {
    std::string id;
    double area_ha = 0.0;
    std::vector<MatrixRow> rows;
};

/// Pathlength table: A_field, L_M1, L_M2 and the M2 savings.
std::string pathlengths_csv(const std::vector<FieldResult>& results);

/// Spray-volume table: the six setup volumes plus their deviations from the
/// uniform reference application.
std::string volumes_csv(const std::vector<FieldResult>& results);

/// Per-hectare extra volumes of the simple setups over the multi-section
/// run, their batch averages, and the years-to-profit matrix evaluated on
/// those averages.
std::string economics_csv(const std::vector<FieldResult>& results, const CostParams& params);

/// Coverage map: cells painted on a white background with blackness
/// proportional to applied rate (solid black at twice the reference rate,
/// mid-gray at the reference), stacked overlaps darker; field contour and
/// obstacles stroked; optionally the path polyline on top. North is up.
std::string render_svg(const SprayMap& map, const FieldSpec& field,
                       const PathPlan* plan = nullptr);

struct FilterVariant {
    std::string name;
    double d_g = 0.0;  // 0 for the polygon-based variant
    double gap_area = 0.0;
    double overlap_area = 0.0;
    double swath_area = 0.0;
    SprayMap map;
};

/// Serpentine filter benchmark: a small boom drives three adjacent passes
/// joined by fold turns; cell candidates are filtered by the occupancy grid
/// at each threshold and by the sprayed-polygon approach, and gap/overlap
/// areas are measured against the swept reference region.
std::vector<FilterVariant> filter_benchmark(const std::vector<double>& d_g_values);

std::string filter_benchmark_csv(const std::vector<FilterVariant>& variants);

}  // namespace spraysim
