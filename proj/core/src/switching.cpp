#include "spraysim/switching.hpp"

#include <cmath>
#include <stdexcept>

namespace spraysim {

SectionLayout SectionLayout::from_config(const RunConfig& cfg) {
    SectionLayout l;
    l.section_width = cfg.nozzle_spacing;
    l.per_side = section_count(cfg) / 2;
    l.mode = cfg.section_mode;
    if (l.per_side <= 0) throw std::invalid_argument("config yields no sections");
    return l;
}

std::vector<int> SectionLayout::indices() const {
    std::vector<int> out;
    out.reserve(2 * per_side);
    for (int i = -per_side; i <= per_side; ++i)
        if (i != 0) out.push_back(i);
    return out;
}

double SectionLayout::offset(int index) const {
    double mag = (std::abs(index) - 0.5) * section_width;
    return index < 0 ? -mag : mag;
}

int SectionLayout::group_of(int index) const {
    switch (mode) {
        case SectionMode::one: return 0;
        case SectionMode::two: return index < 0 ? 0 : 1;
        case SectionMode::multi: return index < 0 ? index + per_side : index + per_side - 1;
    }
    return 0;
}

int SectionLayout::group_count() const {
    switch (mode) {
        case SectionMode::one: return 1;
        case SectionMode::two: return 2;
        case SectionMode::multi: return 2 * per_side;
    }
    return 1;
}

std::vector<double> section_velocities(double v_ref, double yaw_rate,
                                       const SectionLayout& layout) {
    std::vector<double> out;
    out.reserve(2 * layout.per_side);
    for (int i : layout.indices()) out.push_back(v_ref + layout.offset(i) * yaw_rate);
    return out;
}

std::vector<double> nominal_flows(const std::vector<double>& velocities,
                                  double s_volume_ref_l_ha, double section_width) {
    if (s_volume_ref_l_ha <= 0 || section_width <= 0)
        throw std::invalid_argument("flow law needs positive reference rate and width");
    const double s_ref = s_volume_ref_l_ha / 10000.0;  // l/ha -> l/m^2
    std::vector<double> out;
    out.reserve(velocities.size());
    for (double v : velocities) out.push_back(v < 0.0 ? 0.0 : s_ref * v * section_width);
    return out;
}

OccupancyTracker::OccupancyTracker(double d_g) : d_g_(d_g), cell_(d_g / 2.0) {
    if (d_g <= 0) throw std::invalid_argument("occupancy threshold must be positive");
}

bool OccupancyTracker::near_sprayed(Point p) const {
    long long ix = static_cast<long long>(std::floor(p.x / cell_));
    long long iy = static_cast<long long>(std::floor(p.y / cell_));
    for (long long dx = -2; dx <= 2; ++dx) {
        for (long long dy = -2; dy <= 2; ++dy) {
            auto it = buckets_.find(key(ix + dx, iy + dy));
            if (it == buckets_.end()) continue;
            for (const Point& q : it->second) {
                if (distance(p, q) <= d_g_) return true;
            }
        }
    }
    return false;
}

void OccupancyTracker::record(Point p) {
    long long ix = static_cast<long long>(std::floor(p.x / cell_));
    long long iy = static_cast<long long>(std::floor(p.y / cell_));
    buckets_[key(ix, iy)].push_back(p);
    ++count_;
}

std::vector<QuadCell> filter_overlap_polygon(std::vector<QuadCell> cells,
                                             const SprayedPolygonState& state) {
    std::vector<QuadCell> kept;
    kept.reserve(cells.size());
    for (QuadCell& c : cells) {
        if (!state.contains(c.centroid())) kept.push_back(std::move(c));
    }
    return kept;
}

std::vector<QuadCell> filter_overlap_grid(std::vector<QuadCell> cells,
                                          OccupancyTracker& tracker) {
    std::vector<QuadCell> kept;
    kept.reserve(cells.size());
    for (QuadCell& c : cells) {
        Point g = c.centroid();
        if (!tracker.near_sprayed(g)) {
            tracker.record(g);
            kept.push_back(std::move(c));
        }
    }
    return kept;
}

SprayZones SprayZones::from_grid(const FieldSpec& field, const LaneGrid& grid) {
    SprayZones z;
    z.contour = field.contour;
    z.mainfield_boundary = grid.mainfield_boundary;
    z.obstacles = field.obstacles;
    z.obstacle_boundaries = grid.obstacle_boundaries;
    z.headland_rings.push_back(grid.headland_path);
    for (const Polygon& r : grid.obstacle_headlands) z.headland_rings.push_back(r);
    z.boom_half_width = grid.lane_spacing / 2.0;
    return z;
}

bool SprayZones::in_field(Point p) const {
    if (!point_in_ring(p, contour)) return false;
    for (const Polygon& o : obstacles)
        if (point_in_ring(p, o)) return false;
    return true;
}

bool SprayZones::in_mainfield(Point p) const {
    if (!point_in_ring(p, mainfield_boundary)) return false;
    for (const Polygon& ob : obstacle_boundaries)
        if (point_in_ring(p, ob)) return false;
    return true;
}

bool SprayZones::in_band(Point p) const { return in_field(p) && !in_mainfield(p); }

bool SprayZones::band_covered(Point p) const {
    if (!in_band(p)) return false;
    for (const Polygon& r : headland_rings) {
        if (distance_to_ring(p, r) <= boom_half_width + 1e-9) return true;
    }
    return false;
}

bool block_state_m1(const PathPlan& plan, std::size_t sample_index,
                    std::span<const Point> section_centroids,
                    const SprayedPolygonState& state, const SprayZones& zones) {
    const PathSample& s = plan.samples.at(sample_index);
    switch (s.kind) {
        case SegmentKind::headland: return true;
        case SegmentKind::transition: return false;
        case SegmentKind::lane: break;
    }
    // Reactive lane rule: keep spraying while any section is still over
    // fresh ground; the sprayed headland band and the recent spray window
    // both count as covered.
    for (const Point& g : section_centroids) {
        if (!zones.band_covered(g) && !state.contains(g)) return true;
    }
    return false;
}

bool block_state_m2(const PathPlan& plan, std::size_t sample_index) {
    const PathSample& s = plan.samples.at(sample_index);
    if (plan.method != Method::m2 || !s.spray_label.has_value())
        throw PlanningError("predictive switching queried on an unlabelled sample");
    return *s.spray_label;
}

}  // namespace spraysim
