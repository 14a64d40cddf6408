#include "spraysim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

namespace bg = boost::geometry;

namespace spraysim {
namespace {

using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;  // clockwise, closed
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

BgPolygon to_bg(const Polygon& poly) {
    BgPolygon out;
    out.outer().reserve(poly.size() + 1);
    for (const Point& p : poly.vertices) out.outer().emplace_back(p.x, p.y);
    if (!poly.vertices.empty())
        out.outer().emplace_back(poly.vertices.front().x, poly.vertices.front().y);
    bg::correct(out);
    return out;
}

Polygon from_bg_ring(const BgPolygon::ring_type& ring, bool make_ccw) {
    Polygon out;
    if (ring.size() < 4) return out;
    out.vertices.reserve(ring.size() - 1);
    for (std::size_t i = 0; i + 1 < ring.size(); ++i)
        out.vertices.push_back({bg::get<0>(ring[i]), bg::get<1>(ring[i])});
    if (make_ccw && !polygon_is_ccw(out)) out = reversed(out);
    return out;
}

BgMultiPolygon buffer_by(const Polygon& poly, double d) {
    BgPolygon src = to_bg(poly);
    BgMultiPolygon out;
    bg::strategy::buffer::distance_symmetric<double> dist(d);
    // Mitre limit of twice the offset distance, bevelled beyond.
    bg::strategy::buffer::join_miter join(2.0);
    bg::strategy::buffer::end_flat end;
    bg::strategy::buffer::point_square point;
    bg::strategy::buffer::side_straight side;
    bg::buffer(src, out, dist, side, join, end, point);
    return out;
}

// Unions are built as a balanced merge tree over grid-snapped rings: a
// left fold over thousands of edge-touching slivers drives the boolean
// kernel into invalid intermediates that eventually collapse.
BgMultiPolygon union_all(std::span<const Polygon> polys) {
    constexpr double kSnap = 1e-6;
    std::vector<BgMultiPolygon> level;
    level.reserve(polys.size());
    for (const Polygon& p : polys) {
        if (p.size() < 3) continue;
        if (std::abs(polygon_area(p)) < 1e-10) continue;
        Polygon snapped = p;
        for (Point& v : snapped.vertices) {
            v.x = std::round(v.x / kSnap) * kSnap;
            v.y = std::round(v.y / kSnap) * kSnap;
        }
        if (std::abs(polygon_area(snapped)) < 1e-10) continue;
        BgMultiPolygon m;
        m.push_back(to_bg(snapped));
        level.push_back(std::move(m));
    }
    if (level.empty()) return {};
    while (level.size() > 1) {
        std::vector<BgMultiPolygon> next;
        next.reserve(level.size() / 2 + 1);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            BgMultiPolygon u;
            bg::union_(level[i], level[i + 1], u);
            if (!bg::is_valid(u)) bg::correct(u);
            next.push_back(std::move(u));
        }
        if (level.size() % 2 == 1) next.push_back(std::move(level.back()));
        level = std::move(next);
    }
    return std::move(level.front());
}

}  // namespace

double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double norm(Point a) { return std::hypot(a.x, a.y); }
double distance(Point a, Point b) { return norm(b - a); }

Point normalized(Point a) {
    double n = norm(a);
    if (n < 1e-15) throw GeometryError("cannot normalize zero-length vector");
    return {a.x / n, a.y / n};
}

Point right_normal(Point d) {
    Point u = normalized(d);
    return {u.y, -u.x};
}

Point QuadCell::centroid() const {
    // Area-weighted centroid of the quad via the triangle fan from corner 0;
    // falls back to the vertex mean for degenerate quads.
    double a_sum = 0.0;
    Point c{0.0, 0.0};
    for (int i = 1; i < 3; ++i) {
        Point u = corners[i] - corners[0];
        Point v = corners[i + 1] - corners[0];
        double a = cross(u, v) / 2.0;
        a_sum += a;
        Point tc = corners[0] + (u + v) * (1.0 / 3.0);
        c = c + tc * a;
    }
    if (std::abs(a_sum) < 1e-12) {
        Point m{0.0, 0.0};
        for (const Point& p : corners) m = m + p;
        return m * 0.25;
    }
    return c * (1.0 / a_sum);
}

double polygon_area(const Polygon& poly) {
    if (poly.size() < 3) throw GeometryError("degenerate ring: fewer than 3 vertices");
    double s = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % v.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return s / 2.0;
}

double polygon_perimeter(const Polygon& poly) {
    double s = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) s += distance(v[i], v[(i + 1) % v.size()]);
    return s;
}

Point polygon_centroid(const Polygon& poly) {
    const auto& v = poly.vertices;
    double a_sum = 0.0;
    Point c{0.0, 0.0};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& p = v[i];
        const Point& q = v[(i + 1) % v.size()];
        double a = cross(p, q);
        a_sum += a;
        c = c + (p + q) * a;
    }
    if (std::abs(a_sum) < 1e-12) {
        Point m{0.0, 0.0};
        for (const Point& p : v) m = m + p;
        return m * (1.0 / static_cast<double>(v.size()));
    }
    return c * (1.0 / (3.0 * a_sum));
}

bool polygon_is_ccw(const Polygon& poly) { return polygon_area(poly) > 0.0; }

Polygon reversed(const Polygon& poly) {
    Polygon out = poly;
    std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

double distance_point_segment(Point p, Point a, Point b) {
    Point ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 < 1e-30) return distance(p, a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

double distance_to_ring(Point p, const Polygon& poly) {
    double best = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i)
        best = std::min(best, distance_point_segment(p, v[i], v[(i + 1) % v.size()]));
    return best;
}

bool point_in_ring(Point p, const Polygon& ring) {
    const auto& v = ring.vertices;
    if (v.size() < 3) return false;
    // Boundary within epsilon counts as inside.
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (distance_point_segment(p, v[i], v[(i + 1) % v.size()]) <= kBoundaryEps) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        bool crosses = (v[i].y > p.y) != (v[j].y > p.y);
        if (crosses) {
            double x_at = v[i].x + (p.y - v[i].y) / (v[j].y - v[i].y) * (v[j].x - v[i].x);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

bool point_in_polygon(Point p, const Polygon& outer, std::span<const Polygon> holes) {
    if (!point_in_ring(p, outer)) return false;
    for (const Polygon& h : holes) {
        if (point_in_ring(p, h)) return false;
    }
    return true;
}

namespace {

bool segments_properly_intersect(Point a, Point b, Point c, Point d) {
    auto orient = [](Point p, Point q, Point r) { return cross(q - p, r - p); };
    double o1 = orient(a, b, c);
    double o2 = orient(a, b, d);
    double o3 = orient(c, d, a);
    double o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) &&
           std::abs(o1) > 1e-12 && std::abs(o2) > 1e-12 &&
           std::abs(o3) > 1e-12 && std::abs(o4) > 1e-12;
}

}  // namespace

std::pair<int, int> find_self_intersection(const Polygon& poly) {
    const auto& v = poly.vertices;
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // Skip adjacent edges (shared endpoint is not a crossing).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_properly_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                return {i, j};
        }
    }
    return {-1, -1};
}

Polygon offset_inward(const Polygon& poly, double d) {
    if (d <= 0.0) throw GeometryError("offset distance must be positive");
    BgMultiPolygon out = buffer_by(poly, -d);
    if (out.empty()) throw GeometryError("field too small for headland offset");
    const BgPolygon* best = nullptr;
    double best_area = 0.0;
    for (const BgPolygon& p : out) {
        double a = std::abs(bg::area(p));
        if (a > best_area) {
            best_area = a;
            best = &p;
        }
    }
    if (best == nullptr || best_area < 1e-9)
        throw GeometryError("field too small for headland offset");
    return from_bg_ring(best->outer(), true);
}

Polygon offset_outward(const Polygon& poly, double d) {
    if (d <= 0.0) throw GeometryError("offset distance must be positive");
    BgMultiPolygon out = buffer_by(poly, d);
    if (out.empty()) throw GeometryError("outward offset produced no polygon");
    const BgPolygon* best = nullptr;
    double best_area = 0.0;
    for (const BgPolygon& p : out) {
        double a = std::abs(bg::area(p));
        if (a > best_area) {
            best_area = a;
            best = &p;
        }
    }
    return from_bg_ring(best->outer(), true);
}

double union_area(std::span<const Polygon> polys) {
    return std::abs(bg::area(union_all(polys)));
}

double union_area_cells(std::span<const QuadCell> cells) {
    std::vector<Polygon> rings;
    rings.reserve(cells.size());
    for (const QuadCell& c : cells) rings.push_back(cell_ring(c));
    return union_area(rings);
}

std::vector<Polygon> union_polygons(std::span<const Polygon> polys) {
    BgMultiPolygon u = union_all(polys);
    std::vector<Polygon> out;
    out.reserve(u.size());
    for (const BgPolygon& p : u) out.push_back(from_bg_ring(p.outer(), true));
    return out;
}

Polygon cell_ring(const QuadCell& cell) {
    Polygon ring;
    ring.vertices.assign(cell.corners.begin(), cell.corners.end());
    if (!polygon_is_ccw(ring)) ring = reversed(ring);
    return ring;
}

SprayedPolygonState::SprayedPolygonState(int window) : window_(window) {
    if (window <= 0) throw GeometryError("window must be positive");
}

std::size_t SprayedPolygonState::live_cell_count() const {
    std::size_t n = 0;
    for (const Step& s : steps_) n += s.cells.size();
    return n;
}

void SprayedPolygonState::add_step(std::vector<QuadCell> cells) {
    Step step;
    step.bounds.reserve(cells.size());
    for (const QuadCell& c : cells) {
        double xmin = c.corners[0].x, xmax = c.corners[0].x;
        double ymin = c.corners[0].y, ymax = c.corners[0].y;
        for (const Point& p : c.corners) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        step.bounds.push_back({xmin, ymin, xmax, ymax});
    }
    if (!step.bounds.empty()) {
        step.bbox = step.bounds[0];
        for (const auto& b : step.bounds) {
            step.bbox[0] = std::min(step.bbox[0], b[0]);
            step.bbox[1] = std::min(step.bbox[1], b[1]);
            step.bbox[2] = std::max(step.bbox[2], b[2]);
            step.bbox[3] = std::max(step.bbox[3], b[3]);
        }
    }
    step.cells = std::move(cells);
    steps_.push_back(std::move(step));
    while (static_cast<int>(steps_.size()) > window_) steps_.pop_front();
}

bool SprayedPolygonState::contains(Point p) const {
    for (const Step& s : steps_) {
        if (s.cells.empty()) continue;
        if (p.x < s.bbox[0] - kBoundaryEps || p.x > s.bbox[2] + kBoundaryEps ||
            p.y < s.bbox[1] - kBoundaryEps || p.y > s.bbox[3] + kBoundaryEps)
            continue;
        for (std::size_t i = 0; i < s.cells.size(); ++i) {
            const auto& b = s.bounds[i];
            if (p.x < b[0] - kBoundaryEps || p.x > b[2] + kBoundaryEps ||
                p.y < b[1] - kBoundaryEps || p.y > b[3] + kBoundaryEps)
                continue;
            if (point_in_ring(p, cell_ring(s.cells[i]))) return true;
        }
    }
    return false;
}

double SprayedPolygonState::area() const {
    std::vector<Polygon> rings;
    rings.reserve(live_cell_count());
    for (const Step& s : steps_)
        for (const QuadCell& c : s.cells) rings.push_back(cell_ring(c));
    return union_area(rings);
}

std::vector<Polygon> SprayedPolygonState::polygons() const {
    std::vector<Polygon> rings;
    rings.reserve(live_cell_count());
    for (const Step& s : steps_)
        for (const QuadCell& c : s.cells) rings.push_back(cell_ring(c));
    return union_polygons(rings);
}

SprayedPolygonState sprayed_union_windowed(SprayedPolygonState history,
                                           std::vector<QuadCell> new_cells, int window) {
    if (window != history.window()) {
        SprayedPolygonState resized(window);
        // Rebuild from the most recent steps; polygons() cannot recover the
        // per-step grouping, so the caller is expected to keep the window
        // fixed over a run. A changed window only takes effect going forward.
        resized.add_step(std::move(new_cells));
        return resized;
    }
    history.add_step(std::move(new_cells));
    return history;
}

}  // namespace spraysim
