#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spraysim/field.hpp"
#include "spraysim/geometry.hpp"

namespace spraysim {

class PlanningError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A closed polyline with arclength addressing, used for headland rings.
struct RingPath {
    Polygon ring;               // CCW
    std::vector<double> cum;    // cumulative arclength at each vertex
    double length = 0.0;

    static RingPath from_polygon(Polygon p);
    Point at(double s) const;                    // position at arclength (wraps)
    double project(Point p) const;               // arclength of the closest ring point
    /// Polyline from s0 to s1 including intermediate corners; forward walks
    /// CCW. s1 == s0 with full_loop yields the whole ring.
    std::vector<Point> walk(double s0, double s1, bool forward, bool full_loop = false) const;
    /// Arc distance from s0 to s1 in the given direction.
    double walk_length(double s0, double s1, bool forward) const;
};

/// One end of a mainfield lane piece: the sprayable chord stops at `chord`
/// (on the mainfield or an obstacle boundary) and the travel path continues
/// to `ring_pt` on the enclosing headland ring.
struct LaneEnd {
    Point chord;
    Point ring_pt;
    int ring_id = 0;      // 0 = outer headland ring, 1 + k = obstacle k ring
    double ring_s = 0.0;  // arclength on that ring
};

struct Lane {
    int id = 0;
    double lateral = 0.0;  // sweep coordinate of the lane line
    LaneEnd lo, hi;        // ends at decreasing / increasing position along the lane axis
};

struct LaneGrid {
    Polygon contour;              // the field outline the grid was built from
    Point entry;
    Polygon headland_path;        // contour offset inward by W/2
    Polygon mainfield_boundary;   // contour offset inward by W (the intersection line)
    std::vector<Polygon> obstacle_headlands;   // obstacle offset outward by W/2
    std::vector<Polygon> obstacle_boundaries;  // obstacle offset outward by W
    std::vector<Lane> lanes;
    Point lane_dir;               // unit vector along the lanes
    double lane_spacing = 0.0;    // W
    RingPath outer_ring;
    std::vector<RingPath> obstacle_rings;

    const Polygon& intersection_line() const { return mainfield_boundary; }
};

enum class SegmentKind { headland, lane, transition };

std::string to_string(SegmentKind k);

struct PathSample {
    Point position;
    double heading = 0.0;   // rad, CCW from +x
    double yaw_rate = 0.0;  // rad/s at v_ref
    SegmentKind kind = SegmentKind::transition;
    int lane_id = -1;
    /// Predictive spray label; set on every sample of an M2 plan, absent on
    /// M1 plans where switching is reactive.
    std::optional<bool> spray_label;
};

struct PathPlan {
    std::vector<PathSample> samples;
    double total_length = 0.0;
    Method method = Method::m1;
};

/// Fits the headland ring, mainfield boundary, obstacle rings and the lane
/// set. Lanes run along the longest contour edge at spacing W; a non-integer
/// mainfield width is absorbed by insetting the last lane (overlap, never a
/// gap).
LaneGrid build_lane_grid(const FieldSpec& field, const RunConfig& cfg);

/// Full headland laps first, then lanes in adjacent order with U-turns
/// (omega turns where the remaining gap is below 2*r_min).
PathPlan plan_m1(const LaneGrid& grid, const RunConfig& cfg);

/// Interleaved lane/headland tour: an Euler walk over the lane-grid graph in
/// which headland arcs double as lane transits. Each lane and each headland
/// arc is sprayed exactly once; re-driven arcs carry a switch-off label.
/// Falls back to the M1 traversal (with predictive labels) for fields where
/// the tour construction does not apply (obstacles, split lanes, one lane).
PathPlan plan_m2(const LaneGrid& grid, const RunConfig& cfg);

/// Lane ids sorted by accumulated |heading change| over the lane's samples,
/// ascending; ties break on the lower lane id.
std::vector<int> lane_priority(const LaneGrid& grid, const PathPlan& plan);

/// CSV export: x,y,heading,yaw_rate,segment_kind,lane_id
std::string plan_to_csv(const PathPlan& plan);

}  // namespace spraysim
