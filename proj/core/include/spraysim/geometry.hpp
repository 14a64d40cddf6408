#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

namespace spraysim {

/// Planar metric coordinates, x east / y north, in metres.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline Point operator*(double s, Point a) { return a * s; }

double dot(Point a, Point b);
double cross(Point a, Point b);
double norm(Point a);
double distance(Point a, Point b);
Point normalized(Point a);
/// Unit normal pointing to the right of direction `d`.
Point right_normal(Point d);

/// Simple closed ring; the first vertex is not repeated at the end.
/// Outer rings are counter-clockwise, holes clockwise.
struct Polygon {
    std::vector<Point> vertices;

    Polygon() = default;
    explicit Polygon(std::vector<Point> v) : vertices(std::move(v)) {}
    std::size_t size() const { return vertices.size(); }
};

enum class CellKind { straight, wedge };

/// One sprayed ground patch: a quadrilateral swept by a boom section over
/// one sampling step (straight) or fanned out at a heading change (wedge).
/// section_index is negative left of the path, positive right; |i| counts
/// outward from the path centreline starting at 1.
struct QuadCell {
    std::array<Point, 4> corners{};
    double area = 0.0;
    CellKind kind = CellKind::straight;
    int section_index = 0;

    Point centroid() const;
};

class GeometryError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Points closer than this to a ring edge are classified as inside, which
/// keeps overlap suppression conservative on shared cell borders.
inline constexpr double kBoundaryEps = 1e-9;

/// Signed shoelace area; positive for counter-clockwise rings.
/// Throws GeometryError for rings with fewer than 3 vertices.
double polygon_area(const Polygon& poly);

double polygon_perimeter(const Polygon& poly);
Point polygon_centroid(const Polygon& poly);
bool polygon_is_ccw(const Polygon& poly);
Polygon reversed(const Polygon& poly);

double distance_point_segment(Point p, Point a, Point b);
/// Distance from p to the closest edge of the ring.
double distance_to_ring(Point p, const Polygon& poly);

/// Even-odd containment test for a single ring, boundary-inclusive within
/// kBoundaryEps.
bool point_in_ring(Point p, const Polygon& ring);

/// True iff p lies inside `outer` and outside every hole. Boundary points
/// (within kBoundaryEps of an outer edge) count as inside; points on a hole
/// boundary count as inside the hole, hence outside.
bool point_in_polygon(Point p, const Polygon& outer, std::span<const Polygon> holes = {});

/// First pair of properly crossing edge indices, or {-1,-1} if the ring is
/// simple. Shared endpoints of consecutive edges are not crossings.
std::pair<int, int> find_self_intersection(const Polygon& poly);

/// Inward offset of a CCW ring by d metres using mitred joins (mitre limit
/// 2*d, bevelled beyond). Throws GeometryError("field too small...") when
/// the offset annihilates the polygon. If the offset splits the polygon the
/// largest piece is returned.
Polygon offset_inward(const Polygon& poly, double d);

/// Outward offset of a CCW ring by d metres, mitred as above.
Polygon offset_outward(const Polygon& poly, double d);

/// Area of the union of a set of rings (overlaps counted once).
double union_area(std::span<const Polygon> polys);
double union_area_cells(std::span<const QuadCell> cells);
/// Union of the rings as a multi-polygon (outer rings only; interior spray
/// gaps would surface as holes and are dropped from this view).
std::vector<Polygon> union_polygons(std::span<const Polygon> polys);

Polygon cell_ring(const QuadCell& cell);

/// Rolling record of the recently sprayed area: cells are appended one
/// sampling step at a time and evicted once they fall out of the window,
/// mirroring a sprayed-area polygon that only remembers the last few steps.
/// Membership is order-insensitive within a step because a step's cells are
/// committed as one group.
class SprayedPolygonState {
  public:
    explicit SprayedPolygonState(int window = 10);

    int window() const { return window_; }
    std::size_t step_count() const { return steps_.size(); }
    std::size_t live_cell_count() const;

    /// Append the cells sprayed during one sampling step and evict steps
    /// older than the window. Empty steps still advance the window.
    void add_step(std::vector<QuadCell> cells);

    /// True iff p lies in some cell still inside the window.
    bool contains(Point p) const;

    /// Union area of the live cells.
    double area() const;
    std::vector<Polygon> polygons() const;

  private:
    struct Step {
        std::vector<QuadCell> cells;
        std::vector<std::array<double, 4>> bounds;  // xmin,ymin,xmax,ymax per cell
        std::array<double, 4> bbox{0, 0, 0, 0};
    };
    int window_;
    std::deque<Step> steps_;
};

/// Functional form of the rolling-union update: returns the state advanced
/// by one step holding `new_cells`, with the window adjusted to `window`.
SprayedPolygonState sprayed_union_windowed(SprayedPolygonState history,
                                           std::vector<QuadCell> new_cells,
                                           int window);

}  // namespace spraysim
