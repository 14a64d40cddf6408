#pragma once

#include <utility>
#include <vector>

#include "spraysim/field.hpp"
#include "spraysim/geometry.hpp"
#include "spraysim/planner.hpp"
#include "spraysim/switching.hpp"

namespace spraysim {

class SimulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SprayCell {
    QuadCell cell;
    double applied_volume = 0.0;  // litres
    double applied_rate = 0.0;    // l/ha, volume over the cell's own area
};

/// Simulation output: every sprayed ground patch plus the bookkeeping needed
/// to evaluate it against the reference application.
struct SprayMap {
    std::vector<SprayCell> cells;
    double s_volume_ref = 0.0;        // l/ha the run targeted
    double path_length = 0.0;         // m
    double flow_time_integral = 0.0;  // sum of f_i * dt over the traversal, litres

    double total_volume() const;
    double union_area() const;  // m^2, overlaps counted once
};

struct CoverageMetrics {
    double S = 0.0;            // applied volume, l
    double S_field_ref = 0.0;  // A_field * s_ref, l
    double dS_m = 0.0;         // S - S_field_ref, l
    double dS_pct = 0.0;       // dS_m / S_field_ref
    double gap_area = 0.0;     // m^2 never covered
    double overlap_area = 0.0; // m^2 covered at least twice
    double L = 0.0;            // path length, m
};

/// Traverses the plan sample by sample: builds the per-section ground cells
/// (straight rectangles plus turn wedges), applies the method's block
/// switching and the mode's overlap suppression, and deposits volume at the
/// reference rate on every kept cell.
SprayMap simulate(const FieldSpec& field, const PathPlan& plan, const RunConfig& cfg);

/// Gap/overlap accounting by 0.05 m rasterization plus the volume balance.
CoverageMetrics coverage_metrics(const SprayMap& map, const FieldSpec& field);

struct MatrixRow {
    Method method = Method::m1;
    SectionMode mode = SectionMode::multi;
    CoverageMetrics metrics;
};

/// The six-setup comparison: methods M1/M2 crossed with one/two/multi
/// section control. Plans are computed once per method, so L is identical
/// across the three section modes of a method.
std::vector<MatrixRow> run_matrix(const FieldSpec& field, const RunConfig& base);

inline constexpr double kMetricsRasterResolution = 0.05;  // m

}  // namespace spraysim
