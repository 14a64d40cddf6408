#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "spraysim/field.hpp"
#include "spraysim/geometry.hpp"
#include "spraysim/planner.hpp"

namespace spraysim {

/// Boom discretization: N sections per side of width w, addressed by signed
/// indices {-N..-1, 1..N} (negative left of travel, positive right). The
/// lateral centroid offset of section i is sign(i)*(|i|-0.5)*w.
struct SectionLayout {
    int per_side = 0;
    double section_width = 0.0;
    SectionMode mode = SectionMode::multi;

    static SectionLayout from_config(const RunConfig& cfg);

    std::vector<int> indices() const;
    double offset(int index) const;
    double working_width() const { return 2.0 * per_side * section_width; }
    /// Control group of a section: one group in mode one, left/right halves
    /// in mode two, one group per section in mode multi.
    int group_of(int index) const;
    int group_count() const;
};

/// Per-section ground speeds v_i = v_ref + l_i * yaw_rate, in indices() order.
std::vector<double> section_velocities(double v_ref, double yaw_rate,
                                       const SectionLayout& layout);

/// Nominal section flow rates (l/s): f_i = s_ref * v_i * w with s_ref taken
/// in l/ha, zeroed where v_i < 0 (backwards motion shut-off).
std::vector<double> nominal_flows(const std::vector<double>& velocities,
                                  double s_volume_ref_l_ha, double section_width);

struct BoomState {
    std::vector<double> velocity;
    std::vector<double> flow;
    std::vector<char> on;
    bool block_on = false;
};

/// Occupancy-grid baseline: a cell candidate counts as already sprayed when
/// its centroid lies within d_G of any recorded sprayed centroid.
class OccupancyTracker {
  public:
    explicit OccupancyTracker(double d_g);

    double threshold() const { return d_g_; }
    bool near_sprayed(Point p) const;
    void record(Point p);
    std::size_t recorded() const { return count_; }

  private:
    long long key(long long ix, long long iy) const { return (ix << 24) ^ (iy & 0xffffff); }
    double d_g_;
    double cell_;  // d_G/2 bucketing
    std::unordered_map<long long, std::vector<Point>> buckets_;
    std::size_t count_ = 0;
};

/// Keeps exactly the cells whose centroids are not yet inside the sprayed
/// polygon state. Cells of one sampling step must be filtered before any of
/// them is added to the state.
std::vector<QuadCell> filter_overlap_polygon(std::vector<QuadCell> cells,
                                             const SprayedPolygonState& state);

/// Grid baseline: drops a cell iff its centroid is within d_G of a recorded
/// centroid; kept centroids are recorded.
std::vector<QuadCell> filter_overlap_grid(std::vector<QuadCell> cells,
                                          OccupancyTracker& tracker);

/// Static region knowledge used by the switching rules: the headland band is
/// everything between the field boundary and the mainfield (plus the bands
/// around obstacles).
struct SprayZones {
    Polygon contour;
    Polygon mainfield_boundary;
    std::vector<Polygon> obstacles;
    std::vector<Polygon> obstacle_boundaries;
    std::vector<Polygon> headland_rings;  // outer ring first, then obstacle rings
    double boom_half_width = 0.0;

    static SprayZones from_grid(const FieldSpec& field, const LaneGrid& grid);

    bool in_field(Point p) const;
    bool in_mainfield(Point p) const;
    bool in_band(Point p) const;
    /// Band ground within boom reach of a headland ring path, i.e. ground
    /// the headland passes cover. Corner pockets outside boom reach stay
    /// uncovered and must be sprayed by whoever actually drives there.
    bool band_covered(Point p) const;
};

/// Reactive block state for M1 plans: on along the initial headland passes
/// and along lanes, off on transitions; at lane ends the block drops out
/// once every section centroid sits in already-sprayed headland area.
bool block_state_m1(const PathPlan& plan, std::size_t sample_index,
                    std::span<const Point> section_centroids,
                    const SprayedPolygonState& state, const SprayZones& zones);

/// Predictive block state for M2 plans: a pure lookup of the sample's
/// plan-time label. Throws PlanningError on unlabelled samples.
bool block_state_m2(const PathPlan& plan, std::size_t sample_index);

}  // namespace spraysim
