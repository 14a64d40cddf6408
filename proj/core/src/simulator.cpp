#include "spraysim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spraysim/raster.hpp"

namespace spraysim {

double SprayMap::total_volume() const {
    double s = 0.0;
    for (const SprayCell& c : cells) s += c.applied_volume;
    return s;
}

double SprayMap::union_area() const {
    std::vector<QuadCell> qs;
    qs.reserve(cells.size());
    for (const SprayCell& c : cells) qs.push_back(c.cell);
    return union_area_cells(qs);
}

namespace {

struct LaneSwath {
    int id = 0;
    std::array<Point, 4> quad{};
    std::array<double, 4> bbox{};
    std::size_t last_sample = 0;  // traversal completion marker
    int priority_rank = 0;

    bool contains(Point p) const {
        if (p.x < bbox[0] || p.x > bbox[2] || p.y < bbox[1] || p.y > bbox[3]) return false;
        Polygon ring;
        ring.vertices.assign(quad.begin(), quad.end());
        return point_in_ring(p, ring);
    }
};

std::vector<LaneSwath> lane_swaths(const LaneGrid& grid, const PathPlan& plan) {
    std::vector<LaneSwath> out;
    Point nrm = right_normal(grid.lane_dir);
    const double half = grid.lane_spacing / 2.0;
    std::map<int, std::size_t> last_sample;
    for (std::size_t k = 0; k < plan.samples.size(); ++k) {
        const PathSample& s = plan.samples[k];
        if (s.kind == SegmentKind::lane && s.lane_id >= 0) last_sample[s.lane_id] = k;
    }
    std::vector<int> prio = lane_priority(grid, plan);
    std::map<int, int> rank;
    for (std::size_t i = 0; i < prio.size(); ++i) rank[prio[i]] = static_cast<int>(i);

    for (const Lane& l : grid.lanes) {
        LaneSwath sw;
        sw.id = l.id;
        sw.quad = {l.lo.chord + nrm * -half, l.lo.chord + nrm * half, l.hi.chord + nrm * half,
                   l.hi.chord + nrm * -half};
        sw.bbox = {sw.quad[0].x, sw.quad[0].y, sw.quad[0].x, sw.quad[0].y};
        for (const Point& p : sw.quad) {
            sw.bbox[0] = std::min(sw.bbox[0], p.x);
            sw.bbox[1] = std::min(sw.bbox[1], p.y);
            sw.bbox[2] = std::max(sw.bbox[2], p.x);
            sw.bbox[3] = std::max(sw.bbox[3], p.y);
        }
        sw.last_sample = last_sample.count(l.id) ? last_sample[l.id] : plan.samples.size();
        sw.priority_rank = rank.count(l.id) ? rank[l.id] : static_cast<int>(prio.size());
        out.push_back(sw);
    }
    return out;
}

struct SectionSpan {
    int index = 0;
    double lo = 0.0;  // signed lateral bounds, positive right of travel
    double hi = 0.0;
};

}  // namespace

SprayMap simulate(const FieldSpec& field, const PathPlan& plan, const RunConfig& cfg) {
    if (plan.samples.size() < 2) throw SimulationError("plan has no samples");
    {
        auto v = validate_config(cfg);
        if (!v.empty()) throw SimulationError("invalid config: " + v.front());
    }
    const LaneGrid grid = build_lane_grid(field, cfg);
    const SprayZones zones = SprayZones::from_grid(field, grid);
    const SectionLayout layout = SectionLayout::from_config(cfg);
    const std::vector<LaneSwath> swaths = lane_swaths(grid, plan);
    const bool predictive = plan.method == Method::m2;

    const double s_ref = cfg.s_volume_ref / 10000.0;  // l/m^2
    const double w = layout.section_width;
    const double v_ref = cfg.v_ref;

    std::vector<SectionSpan> spans;
    for (int i : layout.indices()) {
        double lo = (std::abs(i) - 1) * w;
        double hi = std::abs(i) * w;
        if (i < 0) spans.push_back({i, -hi, -lo});
        else spans.push_back({i, lo, hi});
    }
    const int n_sections = static_cast<int>(spans.size());
    const int n_groups = layout.group_count();

    SprayedPolygonState state(10);
    SprayMap map;
    map.s_volume_ref = cfg.s_volume_ref;
    map.path_length = plan.total_length;
    map.cells.reserve(plan.samples.size() * n_sections / 2);

    // A cell over a lane swath is suppressed in multi mode when that swath
    // belongs to an earlier-finished lane (reactive, M1) or a
    // higher-priority lane (predictive, M2).
    auto swath_precedence = [&](Point p, int own_lane, std::size_t k, int own_rank) {
        for (const LaneSwath& sw : swaths) {
            if (sw.id == own_lane) continue;
            bool precedes = predictive ? sw.priority_rank < own_rank : sw.last_sample < k;
            if (precedes && sw.contains(p)) return true;
        }
        return false;
    };
    std::map<int, int> rank_of;
    for (const LaneSwath& sw : swaths) rank_of[sw.id] = sw.priority_rank;

    const auto& sp = plan.samples;
    Point prev_nrm{0, 0};
    bool have_prev = false;

    for (std::size_t k = 0; k + 1 < sp.size(); ++k) {
        const PathSample& a = sp[k];
        const PathSample& b = sp[k + 1];
        Point delta = b.position - a.position;
        double d = norm(delta);
        if (d < 1e-12) continue;
        Point dir = delta * (1.0 / d);
        Point nrm = right_normal(dir);
        const double dt = d / v_ref;
        const double yaw = b.yaw_rate;

        // Candidate cells for this step: one rectangle per section, plus the
        // outer-side wedges fanned open at the junction with the previous
        // segment.
        struct Candidate {
            QuadCell cell;
            int section = 0;
        };
        std::vector<Candidate> cands;
        cands.reserve(n_sections + 8);
        for (const SectionSpan& s : spans) {
            QuadCell c;
            c.kind = CellKind::straight;
            c.section_index = s.index;
            c.corners = {a.position + nrm * s.lo, a.position + nrm * s.hi,
                         b.position + nrm * s.hi, b.position + nrm * s.lo};
            c.area = d * w;
            cands.push_back({c, s.index});
        }
        if (have_prev) {
            double turn = std::atan2(cross(prev_nrm, nrm), dot(prev_nrm, nrm));
            if (std::abs(turn) > 1e-9) {
                for (const SectionSpan& s : spans) {
                    // Wedges open on the outer side of the turn.
                    if (turn > 0 && s.index < 0) continue;
                    if (turn < 0 && s.index > 0) continue;
                    QuadCell c;
                    c.kind = CellKind::wedge;
                    c.section_index = s.index;
                    c.corners = {a.position + prev_nrm * s.lo, a.position + prev_nrm * s.hi,
                                 a.position + nrm * s.hi, a.position + nrm * s.lo};
                    Polygon ring;
                    ring.vertices.assign(c.corners.begin(), c.corners.end());
                    c.area = std::abs(polygon_area(ring));
                    if (c.area < 1e-6) continue;  // degenerate wedge
                    cands.push_back({c, s.index});
                }
            }
        }
        prev_nrm = nrm;
        have_prev = true;

        // Block state per control group.
        std::vector<char> group_on(n_groups, 0);
        const bool lane_sample = a.kind == SegmentKind::lane;
        if (predictive) {
            bool label = block_state_m2(plan, k);
            if (label) {
                if (lane_sample && layout.mode != SectionMode::multi) {
                    // Intersection-line rule: the group switches only when
                    // the whole group has crossed, evaluated on fresh ground.
                    for (const Candidate& c : cands) {
                        if (c.cell.kind != CellKind::straight) continue;
                        if (!zones.band_covered(c.cell.centroid()))
                            group_on[layout.group_of(c.section)] = 1;
                    }
                } else {
                    std::fill(group_on.begin(), group_on.end(), 1);
                }
            }
        } else {
            if (a.kind == SegmentKind::headland) {
                std::fill(group_on.begin(), group_on.end(), 1);
            } else if (a.kind == SegmentKind::lane) {
                if (layout.mode == SectionMode::multi) {
                    std::fill(group_on.begin(), group_on.end(), 1);  // per-cell filter decides
                } else {
                    std::vector<Point> centroids;
                    std::vector<int> groups;
                    for (const Candidate& c : cands) {
                        if (c.cell.kind != CellKind::straight) continue;
                        centroids.push_back(c.cell.centroid());
                        groups.push_back(layout.group_of(c.section));
                    }
                    for (std::size_t i = 0; i < centroids.size(); ++i) {
                        if (!zones.band_covered(centroids[i]) && !state.contains(centroids[i]))
                            group_on[groups[i]] = 1;
                    }
                }
            }  // transitions stay off
        }

        // Per-section speeds for the backwards-motion shut-off (multi only).
        std::vector<double> vels = section_velocities(v_ref, yaw, layout);
        std::map<int, double> vel_of;
        {
            auto idx = layout.indices();
            for (std::size_t i = 0; i < idx.size(); ++i) vel_of[idx[i]] = vels[i];
        }
        const int own_rank = (a.lane_id >= 0 && rank_of.count(a.lane_id))
                                 ? rank_of.at(a.lane_id)
                                 : static_cast<int>(swaths.size());

        std::vector<QuadCell> kept;
        double step_volume = 0.0;
        for (Candidate& c : cands) {
            if (!group_on[layout.group_of(c.section)]) continue;
            if (layout.mode == SectionMode::multi) {
                if (vel_of[c.section] < 0.0) continue;  // backwards motion
                // Already-covered ground: recent spray window, the sprayed
                // headland band (outside headland passes), or a lane swath
                // with precedence. Gaps cost more than overlaps, so a cell
                // is only suppressed when it sits entirely on covered
                // ground; boundary-straddling cells spray.
                auto covered = [&](Point g) {
                    if (state.contains(g)) return true;
                    if (a.kind != SegmentKind::headland && zones.band_covered(g)) return true;
                    return lane_sample && swath_precedence(g, a.lane_id, k, own_rank);
                };
                bool all_covered = covered(c.cell.centroid());
                for (int ci = 0; all_covered && ci < 4; ++ci)
                    all_covered = covered(c.cell.corners[ci]);
                if (all_covered) continue;
            }
            double volume = s_ref * c.cell.area;
            step_volume += volume;
            SprayCell out;
            out.cell = c.cell;
            out.applied_volume = volume;
            out.applied_rate = volume / (c.cell.area / 10000.0);
            map.cells.push_back(out);
            kept.push_back(c.cell);
        }
        map.flow_time_integral += step_volume;  // = sum_i f_i * dt by Eq. (3)/(5)
        state.add_step(std::move(kept));
    }
    return map;
}

CoverageMetrics coverage_metrics(const SprayMap& map, const FieldSpec& field) {
    CoverageMetrics m;
    m.S = map.total_volume();
    m.S_field_ref = field.net_area_m2() * map.s_volume_ref / 10000.0;
    m.dS_m = m.S - m.S_field_ref;
    m.dS_pct = m.S_field_ref > 0 ? m.dS_m / m.S_field_ref : 0.0;
    m.L = map.path_length;
    std::vector<QuadCell> qs;
    qs.reserve(map.cells.size());
    for (const SprayCell& c : map.cells) qs.push_back(c.cell);
    RasterCoverage rc =
        rasterize_coverage(qs, field.contour, field.obstacles, kMetricsRasterResolution);
    m.gap_area = rc.gap_area;
    m.overlap_area = rc.overlap_area;
    return m;
}

std::vector<MatrixRow> run_matrix(const FieldSpec& field, const RunConfig& base) {
    std::vector<MatrixRow> rows;
    for (Method method : {Method::m1, Method::m2}) {
        RunConfig cfg = base;
        cfg.method = method;
        LaneGrid grid = build_lane_grid(field, cfg);
        PathPlan plan = method == Method::m1 ? plan_m1(grid, cfg) : plan_m2(grid, cfg);
        for (SectionMode mode : {SectionMode::one, SectionMode::two, SectionMode::multi}) {
            cfg.section_mode = mode;
            SprayMap map = simulate(field, plan, cfg);
            MatrixRow row;
            row.method = method;
            row.mode = mode;
            row.metrics = coverage_metrics(map, field);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace spraysim
