#include "spraysim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace spraysim {

namespace {

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a < -M_PI) a += 2.0 * M_PI;
    return a;
}

Point left_normal(Point d) {
    Point u = normalized(d);
    return {-u.y, u.x};
}

/// Smallest t >= -1e-9 with origin + t*dir on the ring, or nullopt.
std::optional<double> ray_ring_first_hit(Point origin, Point dir, const Polygon& ring) {
    std::optional<double> best;
    const auto& v = ring.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point a = v[i];
        Point e = v[(i + 1) % v.size()] - a;
        double denom = cross(dir, e);
        if (std::abs(denom) < 1e-14) continue;
        Point d = a - origin;
        double t = cross(d, e) / denom;
        double u = cross(d, dir) / denom;
        if (t >= -1e-9 && u >= -1e-9 && u <= 1.0 + 1e-9) {
            if (!best || t < *best) best = t;
        }
    }
    return best;
}

/// Chord intervals of the line origin + t*dir inside the ring (even-odd).
/// Throws when the line grazes a vertex; callers nudge and retry.
std::vector<std::pair<double, double>> line_ring_intervals(Point origin, Point dir,
                                                           const Polygon& ring) {
    Point nrm = left_normal(dir);
    const auto& v = ring.vertices;
    std::vector<double> side(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        side[i] = dot(v[i] - origin, nrm);
        if (std::abs(side[i]) < 1e-9) throw PlanningError("lane line through vertex");
    }
    std::vector<double> ts;
    Point u = normalized(dir);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::size_t j = (i + 1) % v.size();
        if ((side[i] > 0) != (side[j] > 0)) {
            double f = side[i] / (side[i] - side[j]);
            Point p = v[i] + (v[j] - v[i]) * f;
            ts.push_back(dot(p - origin, u));
        }
    }
    std::sort(ts.begin(), ts.end());
    if (ts.size() % 2 != 0) throw PlanningError("odd crossing count on lane line");
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < ts.size(); i += 2) out.push_back({ts[i], ts[i + 1]});
    return out;
}

std::vector<std::pair<double, double>> subtract_intervals(
    std::vector<std::pair<double, double>> base,
    const std::vector<std::pair<double, double>>& cut) {
    for (const auto& c : cut) {
        std::vector<std::pair<double, double>> next;
        for (const auto& b : base) {
            if (c.second <= b.first || c.first >= b.second) {
                next.push_back(b);
                continue;
            }
            if (c.first > b.first) next.push_back({b.first, c.first});
            if (c.second < b.second) next.push_back({c.second, b.second});
        }
        base = std::move(next);
    }
    return base;
}

}  // namespace

RingPath RingPath::from_polygon(Polygon p) {
    RingPath r;
    if (!polygon_is_ccw(p)) p = reversed(p);
    r.ring = std::move(p);
    r.cum.resize(r.ring.size() + 1);
    r.cum[0] = 0.0;
    for (std::size_t i = 0; i < r.ring.size(); ++i) {
        const Point& a = r.ring.vertices[i];
        const Point& b = r.ring.vertices[(i + 1) % r.ring.size()];
        r.cum[i + 1] = r.cum[i] + distance(a, b);
    }
    r.length = r.cum.back();
    return r;
}

Point RingPath::at(double s) const {
    s = std::fmod(s, length);
    if (s < 0) s += length;
    std::size_t i = std::upper_bound(cum.begin(), cum.end(), s) - cum.begin();
    i = i > 0 ? i - 1 : 0;
    if (i >= ring.size()) i = ring.size() - 1;
    const Point& a = ring.vertices[i];
    const Point& b = ring.vertices[(i + 1) % ring.size()];
    double seg = cum[i + 1] - cum[i];
    double f = seg > 1e-12 ? (s - cum[i]) / seg : 0.0;
    return a + (b - a) * f;
}

double RingPath::project(Point p) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point& a = ring.vertices[i];
        Point e = ring.vertices[(i + 1) % ring.size()] - a;
        double len2 = dot(e, e);
        double t = len2 > 1e-18 ? std::clamp(dot(p - a, e) / len2, 0.0, 1.0) : 0.0;
        Point q = a + e * t;
        double d = distance(p, q);
        if (d < best_d) {
            best_d = d;
            best_s = cum[i] + t * std::sqrt(len2);
        }
    }
    return best_s;
}

std::vector<Point> RingPath::walk(double s0, double s1, bool forward, bool full_loop) const {
    auto norm_s = [&](double s) {
        s = std::fmod(s, length);
        return s < 0 ? s + length : s;
    };
    s0 = norm_s(s0);
    double span = full_loop ? length : (forward ? norm_s(s1 - s0) : norm_s(s0 - s1));
    // Vertex offsets from s0 in the walking direction.
    std::vector<double> offs;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        double rel = forward ? norm_s(cum[i] - s0) : norm_s(s0 - cum[i]);
        if (rel > 1e-9 && rel < span - 1e-9) offs.push_back(rel);
    }
    std::sort(offs.begin(), offs.end());
    std::vector<Point> pts;
    pts.push_back(at(s0));
    for (double rel : offs) pts.push_back(at(forward ? s0 + rel : s0 - rel));
    pts.push_back(at(forward ? s0 + span : s0 - span));
    return pts;
}

double RingPath::walk_length(double s0, double s1, bool forward) const {
    auto norm_s = [&](double s) {
        s = std::fmod(s, length);
        return s < 0 ? s + length : s;
    };
    return forward ? norm_s(s1 - s0) : norm_s(s0 - s1);
}

std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::headland: return "headland";
        case SegmentKind::lane: return "lane";
        case SegmentKind::transition: return "transition";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Lane grid
// ---------------------------------------------------------------------------

LaneGrid build_lane_grid(const FieldSpec& field, const RunConfig& cfg) {
    auto violations = validate_config(cfg);
    if (!violations.empty()) throw PlanningError("invalid config: " + violations.front());
    const double W = cfg.working_width;

    LaneGrid grid;
    grid.contour = field.contour;
    grid.entry = field.entry;
    try {
        grid.headland_path = offset_inward(field.contour, W / 2.0);
        grid.mainfield_boundary = offset_inward(field.contour, W);
    } catch (const GeometryError&) {
        throw PlanningError("field too small for one headland pass");
    }
    grid.lane_spacing = W;
    grid.outer_ring = RingPath::from_polygon(grid.headland_path);

    for (const Polygon& o : field.obstacles) {
        Polygon ccw = polygon_is_ccw(o) ? o : reversed(o);
        grid.obstacle_headlands.push_back(offset_outward(ccw, W / 2.0));
        grid.obstacle_boundaries.push_back(offset_outward(ccw, W));
        grid.obstacle_rings.push_back(RingPath::from_polygon(grid.obstacle_headlands.back()));
    }

    // Lanes run along the longest contour edge.
    const auto& cv = field.contour.vertices;
    double best_len = -1.0;
    Point dir{1, 0};
    for (std::size_t i = 0; i < cv.size(); ++i) {
        Point e = cv[(i + 1) % cv.size()] - cv[i];
        if (norm(e) > best_len) {
            best_len = norm(e);
            dir = normalized(e);
        }
    }
    grid.lane_dir = dir;
    Point nrm = right_normal(dir);

    double smin = std::numeric_limits<double>::infinity();
    double smax = -std::numeric_limits<double>::infinity();
    for (const Point& p : grid.mainfield_boundary.vertices) {
        smin = std::min(smin, dot(p, nrm));
        smax = std::max(smax, dot(p, nrm));
    }
    double extent = smax - smin;
    int n_lines = std::max(1, static_cast<int>(std::ceil(extent / W - 1e-6)));
    std::vector<double> laterals;
    if (n_lines == 1) {
        laterals.push_back((smin + smax) / 2.0);
    } else {
        for (int k = 0; k < n_lines - 1; ++k) laterals.push_back(smin + W / 2.0 + k * W);
        laterals.push_back(smax - W / 2.0);  // inset last lane: overlap, never a gap
        if (laterals.back() - laterals[laterals.size() - 2] < 1e-3) laterals.pop_back();
    }

    // Outer chord ends must reach the mainfield extent over the whole
    // W-wide slab, not just on the lane line: along oblique boundary edges
    // the machine keeps driving until the full boom has crossed.
    const double hw = W / 2.0 - 1e-6;
    auto slab_extent = [&](double s_lat, double t_lo_seed, double t_hi_seed) {
        double lo = t_lo_seed, hi = t_hi_seed;
        for (int pass = 0; pass < 2; ++pass) {
            for (double off : {-hw, -hw / 2.0, hw / 2.0, hw}) {
                Point origin2 = nrm * (s_lat + off);
                std::vector<std::pair<double, double>> iv;
                try {
                    iv = line_ring_intervals(origin2, dir, grid.mainfield_boundary);
                } catch (const PlanningError&) {
                    continue;
                }
                for (const auto& [a, b] : iv) {
                    if (b < lo - 1e-9 || a > hi + 1e-9) continue;  // disconnected piece
                    lo = std::min(lo, a);
                    hi = std::max(hi, b);
                }
            }
            for (const Point& v : grid.mainfield_boundary.vertices) {
                if (std::abs(dot(v, nrm) - s_lat) >= hw) continue;
                double t = dot(v, dir);
                if (t >= lo - W && t <= hi + W) {
                    lo = std::min(lo, t);
                    hi = std::max(hi, t);
                }
            }
        }
        return std::pair<double, double>{lo, hi};
    };

    int next_id = 0;
    for (double s : laterals) {
        std::vector<std::pair<double, double>> pieces;
        double s_used = s;
        for (int attempt = 0;; ++attempt) {
            try {
                Point origin = nrm * s_used;
                pieces = line_ring_intervals(origin, dir, grid.mainfield_boundary);
                // Obstacles block the machine within boom clearance (W/2);
                // the outer half of the obstacle band is sprayed by the lane
                // passing beside it.
                for (const Polygon& oh : grid.obstacle_headlands)
                    pieces = subtract_intervals(std::move(pieces),
                                                line_ring_intervals(origin, dir, oh));
                break;
            } catch (const PlanningError&) {
                if (attempt >= 4) throw;
                s_used += 1e-5;
            }
        }
        Point origin = nrm * s_used;
        std::sort(pieces.begin(), pieces.end());
        for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
            auto [t0, t1] = pieces[pi];
            if (t1 - t0 < 2.0) continue;  // corner sliver
            Lane lane;
            lane.id = next_id++;
            lane.lateral = s_used;
            auto classify = [&](Point p) {
                for (std::size_t k = 0; k < grid.obstacle_headlands.size(); ++k) {
                    if (distance_to_ring(p, grid.obstacle_headlands[k]) < 1e-6)
                        return static_cast<int>(k) + 1;
                }
                return 0;
            };
            lane.lo.chord = origin + dir * t0;
            lane.hi.chord = origin + dir * t1;
            lane.lo.ring_id = classify(lane.lo.chord);
            lane.hi.ring_id = classify(lane.hi.chord);
            if (lane.lo.ring_id == 0 || lane.hi.ring_id == 0) {
                auto [lo_ext, hi_ext] = slab_extent(s_used, t0, t1);
                if (lane.lo.ring_id == 0) lane.lo.chord = origin + dir * lo_ext;
                if (lane.hi.ring_id == 0) lane.hi.chord = origin + dir * hi_ext;
            }
            auto extend = [&](LaneEnd& end, Point away) {
                const RingPath& ring =
                    end.ring_id == 0 ? grid.outer_ring : grid.obstacle_rings[end.ring_id - 1];
                auto t = ray_ring_first_hit(end.chord, away, ring.ring);
                if (t) {
                    end.ring_pt = end.chord + away * *t;
                    // Keep the chord end clear of the travel ring.
                    if (*t < 0.5) end.chord = end.ring_pt + away * -0.5;
                } else {
                    // Near ring corners the lane axis can miss the ring;
                    // dock at the closest ring point instead.
                    end.ring_pt = ring.at(ring.project(end.chord));
                }
                end.ring_s = ring.project(end.ring_pt);
            };
            extend(lane.lo, dir * -1.0);
            extend(lane.hi, dir);
            grid.lanes.push_back(lane);
        }
    }
    if (grid.lanes.empty()) throw PlanningError("no usable lanes in mainfield");
    return grid;
}

// ---------------------------------------------------------------------------
// Path assembly: legs -> filleted chain -> resampled plan
// ---------------------------------------------------------------------------

namespace {

struct Leg {
    std::vector<Point> pts;
    SegmentKind kind = SegmentKind::transition;
    int lane_id = -1;
    bool spray = false;
};

struct ChainSeg {
    Point a, b;
    int leg = 0;
};

// Removes `trim` metres from the tail of a polyline, dropping points as
// needed. Throws when the polyline is consumed.
void trim_polyline_tail(std::vector<Point>& pts, double trim) {
    while (pts.size() >= 2 && trim > 1e-12) {
        double seg = distance(pts[pts.size() - 2], pts.back());
        if (seg > trim + 1e-9) {
            pts.back() = pts.back() + normalized(pts[pts.size() - 2] - pts.back()) * trim;
            return;
        }
        trim -= seg;
        pts.pop_back();
    }
    if (trim > 1e-9) throw PlanningError("lane too short for turn insertion");
}

void trim_polyline_head(std::vector<Point>& pts, double trim) {
    std::reverse(pts.begin(), pts.end());
    trim_polyline_tail(pts, trim);
    std::reverse(pts.begin(), pts.end());
}

void append_leg(std::vector<Leg>& legs, Leg leg) {
    std::vector<Point> clean;
    for (const Point& p : leg.pts) {
        if (clean.empty() || distance(clean.back(), p) > 1e-9) clean.push_back(p);
    }
    if (clean.size() < 2) return;
    leg.pts = std::move(clean);
    if (!legs.empty()) {
        const Point& tail = legs.back().pts.back();
        if (distance(tail, leg.pts.front()) > 1e-5)
            throw PlanningError("discontinuous path legs");
        leg.pts.front() = tail;
    }
    legs.push_back(std::move(leg));
}

std::vector<ChainSeg> fillet_chain(const std::vector<Leg>& legs, double r_min) {
    // Corners are crawled at a tight radius; the minimum turning radius
    // constrains the lane-end turn maneuvers, not slow corner pivots, and a
    // small fillet keeps the unreachable pocket at sharp contour corners
    // close to its geometric floor.
    r_min = std::min(r_min, 1.4);
    struct Edge {
        Point a, b;
        int leg;
    };
    std::vector<Edge> edges;
    for (std::size_t li = 0; li < legs.size(); ++li) {
        const auto& pts = legs[li].pts;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            if (distance(pts[i], pts[i + 1]) > 1e-9)
                edges.push_back({pts[i], pts[i + 1], static_cast<int>(li)});
        }
    }
    if (edges.empty()) throw PlanningError("empty path");

    const double kMinFilletAngle = 0.2;  // rad; milder corners stay sharp
    std::vector<double> trim_end(edges.size(), 0.0), trim_start(edges.size(), 0.0);
    struct Fillet {
        std::vector<Point> pts;
        int split = 0;
    };
    std::vector<std::optional<Fillet>> fillets(edges.size());

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Point d1 = normalized(edges[i].b - edges[i].a);
        Point d2 = normalized(edges[i + 1].b - edges[i + 1].a);
        double delta = wrap_angle(std::atan2(cross(d1, d2), dot(d1, d2)));
        double mag = std::abs(delta);
        if (mag < kMinFilletAngle) continue;
        // Near-reversals are capped so tan() stays finite; the resulting arc
        // still spreads the heading change over several samples.
        double mag_eff = std::min(mag, M_PI - 0.15);
        double tn = std::tan(mag_eff / 2.0);
        double len1 = distance(edges[i].a, edges[i].b);
        double len2 = distance(edges[i + 1].a, edges[i + 1].b);
        double r = std::min({r_min, 0.45 * len1 / tn, 0.45 * len2 / tn});
        if (r < 0.02) continue;
        double td = r * tn;
        Point corner = edges[i].b;
        Point t1 = corner - d1 * td;
        Point t2 = corner + d2 * td;
        double side = delta > 0 ? 1.0 : -1.0;
        Point n1 = side > 0 ? left_normal(d1) : right_normal(d1);
        Point centre = t1 + n1 * r;
        double a1 = std::atan2(t1.y - centre.y, t1.x - centre.x);
        int steps = std::max(2, static_cast<int>(std::ceil(r * mag / 0.25)));
        Fillet f;
        f.pts.push_back(t1);
        for (int k = 1; k < steps; ++k) {
            double phi = a1 + side * mag_eff * (static_cast<double>(k) / steps);
            f.pts.push_back({centre.x + r * std::cos(phi), centre.y + r * std::sin(phi)});
        }
        f.pts.push_back(t2);
        f.split = steps / 2;
        fillets[i] = std::move(f);
        trim_end[i] = td;
        trim_start[i + 1] = td;
    }

    std::vector<ChainSeg> chain;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        Point d = normalized(edges[i].b - edges[i].a);
        Point a = edges[i].a + d * trim_start[i];
        Point b = edges[i].b - d * trim_end[i];
        if (distance(a, b) > 1e-9) chain.push_back({a, b, edges[i].leg});
        if (fillets[i]) {
            const auto& f = *fillets[i];
            for (std::size_t k = 0; k + 1 < f.pts.size(); ++k) {
                int leg = (static_cast<int>(k) < f.split) ? edges[i].leg : edges[i + 1].leg;
                if (distance(f.pts[k], f.pts[k + 1]) > 1e-9)
                    chain.push_back({f.pts[k], f.pts[k + 1], leg});
            }
        }
    }
    return chain;
}

PathPlan sample_chain(const std::vector<ChainSeg>& chain, const std::vector<Leg>& legs,
                      const RunConfig& cfg, Method method, bool labelled) {
    std::vector<double> cum(chain.size() + 1, 0.0);
    for (std::size_t i = 0; i < chain.size(); ++i)
        cum[i + 1] = cum[i] + distance(chain[i].a, chain[i].b);
    double total = cum.back();
    if (total < cfg.sample_spacing) throw PlanningError("path shorter than sample spacing");

    int n_int = std::max(1, static_cast<int>(std::llround(total / cfg.sample_spacing)));
    double ds = total / n_int;

    PathPlan plan;
    plan.method = method;
    plan.total_length = total;
    plan.samples.reserve(n_int + 1);

    std::size_t seg = 0;
    for (int k = 0; k <= n_int; ++k) {
        double s = std::min(total, k * ds);
        while (seg + 1 < chain.size() && cum[seg + 1] < s - 1e-12) ++seg;
        const ChainSeg& c = chain[seg];
        double seg_len = cum[seg + 1] - cum[seg];
        double f = seg_len > 1e-12 ? (s - cum[seg]) / seg_len : 0.0;
        PathSample sm;
        sm.position = c.a + (c.b - c.a) * std::clamp(f, 0.0, 1.0);
        const Leg& leg = legs[c.leg];
        sm.kind = leg.kind;
        sm.lane_id = leg.lane_id;
        if (labelled) sm.spray_label = leg.spray;
        plan.samples.push_back(sm);
    }

    auto& sp = plan.samples;
    for (std::size_t k = 0; k + 1 < sp.size(); ++k) {
        Point d = sp[k + 1].position - sp[k].position;
        sp[k].heading = std::atan2(d.y, d.x);
    }
    if (sp.size() >= 2) sp.back().heading = sp[sp.size() - 2].heading;
    for (std::size_t k = 1; k < sp.size(); ++k) {
        double dh = wrap_angle(sp[k].heading - sp[k - 1].heading);
        sp[k].yaw_rate = dh * cfg.v_ref / ds;
    }
    return plan;
}

/// Turn maneuver between lane ends: departs `from` heading +u, arrives `to`
/// heading -u, arcs at radius r, staying inside the contour. When no
/// candidate fits, both anchors are pulled back down the lanes; the caller
/// trims the adjoining lane legs by trim_from / trim_to.
struct TurnPath {
    std::vector<Point> pts;
    double trim_from = 0.0;
    double trim_to = 0.0;
};

namespace turns {

double mod2pi(double a) {
    a = std::fmod(a, 2.0 * M_PI);
    return a < 0 ? a + 2.0 * M_PI : a;
}

struct Candidate {
    double length = 0.0;
    std::vector<Point> pts;
};

void emit_arc(std::vector<Point>& pts, Point& pos, double& heading, double angle, int sense,
              double r) {
    if (angle < 1e-12) return;
    Point centre{pos.x - sense * r * std::sin(heading), pos.y + sense * r * std::cos(heading)};
    double a0 = std::atan2(pos.y - centre.y, pos.x - centre.x);
    int steps = std::max(2, static_cast<int>(std::ceil(r * angle / 0.25)));
    for (int k = 1; k <= steps; ++k) {
        double phi = a0 + sense * angle * (static_cast<double>(k) / steps);
        pts.push_back({centre.x + r * std::cos(phi), centre.y + r * std::sin(phi)});
    }
    heading += sense * angle;
    pos = pts.back();
}

/// The four CSC Dubins words from pose (pa,ha) to (pb,hb).
std::vector<Candidate> dubins_csc(Point pa, double ha, Point pb, double hb, double r) {
    Point dvec = pb - pa;
    double D = norm(dvec);
    double theta = std::atan2(dvec.y, dvec.x);
    double d = D / r;
    double alpha = mod2pi(ha - theta);
    double beta = mod2pi(hb - theta);
    double sa = std::sin(alpha), ca = std::cos(alpha);
    double sb = std::sin(beta), cb = std::cos(beta);
    double c_ab = std::cos(alpha - beta);

    struct Word {
        double t, p, q;
        int s1, s2;  // arc senses: +1 left, -1 right
        bool ok;
    };
    std::vector<Word> words;
    {  // LSL
        double p_sq = 2 + d * d - 2 * c_ab + 2 * d * (sa - sb);
        if (p_sq >= 0) {
            double tmp = std::atan2(cb - ca, d + sa - sb);
            words.push_back({mod2pi(-alpha + tmp), std::sqrt(p_sq), mod2pi(beta - tmp), 1, 1, true});
        }
    }
    {  // RSR
        double p_sq = 2 + d * d - 2 * c_ab + 2 * d * (sb - sa);
        if (p_sq >= 0) {
            double tmp = std::atan2(ca - cb, d - sa + sb);
            words.push_back(
                {mod2pi(alpha - tmp), std::sqrt(p_sq), mod2pi(-beta + tmp), -1, -1, true});
        }
    }
    {  // LSR
        double p_sq = -2 + d * d + 2 * c_ab + 2 * d * (sa + sb);
        if (p_sq >= 0) {
            double p = std::sqrt(p_sq);
            double tmp = std::atan2(-ca - cb, d + sa + sb) - std::atan2(-2.0, p);
            words.push_back({mod2pi(-alpha + tmp), p, mod2pi(-mod2pi(beta) + tmp), 1, -1, true});
        }
    }
    {  // RSL
        double p_sq = -2 + d * d + 2 * c_ab - 2 * d * (sa + sb);
        if (p_sq >= 0) {
            double p = std::sqrt(p_sq);
            double tmp = std::atan2(ca + cb, d - sa - sb) - std::atan2(2.0, p);
            words.push_back({mod2pi(alpha - tmp), p, mod2pi(beta - tmp), -1, 1, true});
        }
    }

    std::vector<Candidate> out;
    for (const Word& w : words) {
        Candidate c;
        c.length = (w.t + w.q + w.p) * r;
        // Swollen near-2pi arcs are legal but never the turn we want.
        if (w.t > 1.95 * M_PI || w.q > 1.95 * M_PI) continue;
        Point pos = pa;
        double heading = ha;
        c.pts.push_back(pos);
        emit_arc(c.pts, pos, heading, w.t, w.s1, r);
        if (w.p * r > 1e-9) {
            pos = pos + Point{std::cos(heading), std::sin(heading)} * (w.p * r);
            c.pts.push_back(pos);
        }
        emit_arc(c.pts, pos, heading, w.q, w.s2, r);
        c.pts.back() = pb;  // snap the numeric tail
        out.push_back(std::move(c));
    }
    return out;
}

/// Three-arc omega turn for level anchors closer than 2r apart.
std::optional<Candidate> omega(Point pa, Point pb, Point u, double r) {
    Point w = pb - pa;
    double along = dot(w, u);
    if (std::abs(along) > 0.05) return std::nullopt;
    Point nvec = w - u * along;
    double g = norm(nvec);
    if (g < 1e-9 || g >= 2.0 * r) return std::nullopt;
    Point nrm = nvec * (1.0 / g);
    double h = std::sqrt(std::max(0.0, 4.0 * r * r - (g / 2.0 + r) * (g / 2.0 + r)));
    double theta = std::atan2(h, g / 2.0 + r);
    auto emit = [&](double sigma, double ups) { return pa + nrm * sigma + u * ups; };
    Candidate c;
    auto arc = [&](double cs, double cu, double phi0, double phi1, int steps) {
        for (int k = 0; k <= steps; ++k) {
            double phi = phi0 + (phi1 - phi0) * (static_cast<double>(k) / steps);
            c.pts.push_back(emit(cs + r * std::cos(phi), cu + r * std::sin(phi)));
        }
    };
    int s1 = std::max(3, static_cast<int>(std::ceil(r * std::max(theta, 0.1) / 0.25)));
    int s2 = std::max(6, static_cast<int>(std::ceil(r * (M_PI + 2 * theta) / 0.25)));
    c.pts.push_back(pa);
    arc(-r, 0.0, 0.0, theta, s1);
    arc(g / 2.0, h, M_PI + theta, -theta, s2);
    arc(g + r, 0.0, M_PI - theta, M_PI, s1);
    c.pts.push_back(pb);
    c.length = r * (2 * theta + M_PI + 2 * theta);
    return c;
}

}  // namespace turns

TurnPath make_turn(Point from, Point to, Point u, double r, const Polygon& contour) {
    double ha = std::atan2(u.y, u.x);
    double hb = std::atan2(-u.y, -u.x);
    for (double pull = 0.0; pull <= 14.1; pull += 2.0) {
        Point pa = from - u * pull;
        Point pb = to - u * pull;
        std::vector<turns::Candidate> cands = turns::dubins_csc(pa, ha, pb, hb, r);
        if (auto om = turns::omega(pa, pb, u, r)) cands.push_back(std::move(*om));
        std::sort(cands.begin(), cands.end(),
                  [](const auto& a, const auto& b) { return a.length < b.length; });
        for (auto& c : cands) {
            bool inside = true;
            for (const Point& p : c.pts) {
                if (!point_in_ring(p, contour)) {
                    inside = false;
                    break;
                }
            }
            if (!inside) continue;
            TurnPath turn;
            turn.pts = std::move(c.pts);
            turn.trim_from = pull;
            turn.trim_to = pull;
            return turn;
        }
    }
    throw PlanningError("no feasible turn between lane ends");
}

struct LineGroup {
    double lateral = 0.0;
    std::vector<const Lane*> pieces;
};

std::vector<LineGroup> group_lines(const LaneGrid& grid) {
    std::map<long long, LineGroup> by_lat;
    for (const Lane& l : grid.lanes) {
        long long key = static_cast<long long>(std::llround(l.lateral * 1000.0));
        auto& g = by_lat[key];
        g.lateral = l.lateral;
        g.pieces.push_back(&l);
    }
    std::vector<LineGroup> out;
    for (auto& [k, g] : by_lat) {
        std::sort(g.pieces.begin(), g.pieces.end(), [&](const Lane* a, const Lane* b) {
            return dot(a->lo.chord, grid.lane_dir) < dot(b->lo.chord, grid.lane_dir);
        });
        out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(),
              [](const LineGroup& a, const LineGroup& b) { return a.lateral < b.lateral; });
    return out;
}

// A lap that starts exactly on a ring corner never turns that corner (the
// chain is open at the closure); nudge the start onto the following edge.
double away_from_corners(const RingPath& ring, double s) {
    for (double c : ring.cum) {
        double d = std::remainder(s - c, ring.length);
        if (std::abs(d) < 2.5) return std::fmod(c + 2.5, ring.length);
    }
    return s;
}

std::vector<Leg> m1_legs(const LaneGrid& grid, const RunConfig& cfg) {
    std::vector<Leg> legs;
    const Point u = grid.lane_dir;
    const double r = cfg.min_turn_radius;

    // Full outer headland lap from the entry.
    double s_e = away_from_corners(grid.outer_ring, grid.outer_ring.project(grid.entry));
    append_leg(legs,
               {grid.outer_ring.walk(s_e, s_e, true, true), SegmentKind::headland, -1, true});

    // Obstacle headland laps, reached by straight transits.
    for (const RingPath& ring : grid.obstacle_rings) {
        Point cur = legs.back().pts.back();
        double s0 = away_from_corners(ring, ring.project(cur));
        append_leg(legs, {{cur, ring.at(s0)}, SegmentKind::transition, -1, false});
        append_leg(legs, {ring.walk(s0, s0, true, true), SegmentKind::headland, -1, true});
    }

    auto lines = group_lines(grid);

    // Serpentine parity: enter the first line at whichever end is nearer the
    // lap end, so the plan does not depend on the lane axis sign.
    bool up0;
    {
        Point cur = legs.back().pts.back();
        Point lo_entry = lines.front().pieces.front()->lo.ring_pt;
        Point hi_entry = lines.front().pieces.back()->hi.ring_pt;
        up0 = distance(cur, lo_entry) <= distance(cur, hi_entry);
    }

    // Transit to the first lane entry.
    {
        Point cur = legs.back().pts.back();
        const Lane* first =
            up0 ? lines.front().pieces.front() : lines.front().pieces.back();
        const LaneEnd& target = up0 ? first->lo : first->hi;
        if (grid.obstacle_rings.empty()) {
            double s_from = grid.outer_ring.project(cur);
            double s_to = target.ring_s;
            bool fwd = grid.outer_ring.walk_length(s_from, s_to, true) <=
                       grid.outer_ring.walk_length(s_from, s_to, false);
            append_leg(legs, {grid.outer_ring.walk(s_from, s_to, fwd), SegmentKind::transition,
                              -1, false});
        } else {
            append_leg(legs, {{cur, target.ring_pt}, SegmentKind::transition, -1, false});
        }
    }

    double pending_head_trim = 0.0;
    std::optional<Point> pending_entry;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        bool up = (li % 2 == 0) == up0;
        Point dir = up ? u : u * -1.0;
        std::vector<const Lane*> pieces = lines[li].pieces;
        if (!up) std::reverse(pieces.begin(), pieces.end());

        for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
            const Lane* piece = pieces[pi];
            const LaneEnd& in = up ? piece->lo : piece->hi;
            const LaneEnd& out = up ? piece->hi : piece->lo;
            Leg lane_leg{{in.ring_pt, in.chord, out.chord, out.ring_pt},
                         SegmentKind::lane,
                         piece->id,
                         true};
            if (pi == 0 && pending_head_trim > 1e-9) {
                trim_polyline_head(lane_leg.pts, pending_head_trim);
                pending_head_trim = 0.0;
                if (pending_entry) lane_leg.pts.front() = *pending_entry;
                pending_entry.reset();
            }
            append_leg(legs, std::move(lane_leg));
            if (pi + 1 < pieces.size()) {
                const Lane* next = pieces[pi + 1];
                const LaneEnd& nin = up ? next->lo : next->hi;
                if (out.ring_id != nin.ring_id || out.ring_id == 0)
                    throw PlanningError("inconsistent lane split around obstacle");
                const RingPath& ring = grid.obstacle_rings[out.ring_id - 1];
                bool fwd = ring.walk_length(out.ring_s, nin.ring_s, true) <=
                           ring.walk_length(out.ring_s, nin.ring_s, false);
                append_leg(legs, {ring.walk(out.ring_s, nin.ring_s, fwd),
                                  SegmentKind::transition, -1, false});
            }
        }

        if (li + 1 < lines.size()) {
            const Lane* exit_piece = pieces.back();
            const LaneEnd& exit_end = up ? exit_piece->hi : exit_piece->lo;
            std::vector<const Lane*> next_pieces = lines[li + 1].pieces;
            bool next_up = !up;
            if (!next_up) std::reverse(next_pieces.begin(), next_pieces.end());
            const Lane* entry_piece = next_pieces.front();
            const LaneEnd& entry_end = next_up ? entry_piece->lo : entry_piece->hi;

            TurnPath turn =
                make_turn(exit_end.ring_pt, entry_end.ring_pt, dir, r, grid.contour);
            if (turn.trim_from > 1e-9) {
                trim_polyline_tail(legs.back().pts, turn.trim_from);
                turn.pts.front() = legs.back().pts.back();
            }
            if (turn.trim_to > 1e-9) {
                pending_head_trim = turn.trim_to;
                pending_entry = turn.pts.back();
            }
            append_leg(legs, {std::move(turn.pts), SegmentKind::transition, -1, false});
        }
    }
    return legs;
}

/// The alternative tour for obstacle-free fields whose headland ring is
/// crossed by each lane exactly twice: a serpentine over the lanes that
/// rides the direct headland arcs between lane ends (switched off), then one
/// closing ring lap from the final lane end that sprays the whole headland.
/// The lap passes straight through every lane junction, so the band around
/// the junctions is covered without relying on the junction fillets; every
/// lane and every headland arc ends up sprayed exactly once.
std::optional<std::vector<Leg>> m2_tour_legs(const LaneGrid& grid, const RunConfig&) {
    if (!grid.obstacle_rings.empty()) return std::nullopt;
    auto lines = group_lines(grid);
    const int n = static_cast<int>(lines.size());
    if (n < 2) return std::nullopt;
    for (const auto& g : lines)
        if (g.pieces.size() != 1) return std::nullopt;

    const RingPath& ring = grid.outer_ring;
    double s_entry = ring.project(grid.entry);

    // Pick the traversal orientation whose first node is nearest the entry.
    std::optional<std::pair<bool, bool>> best;  // {reverse lane order, B side is lo}
    double best_cost = std::numeric_limits<double>::infinity();
    for (bool rev : {false, true}) {
        for (bool b_lo : {true, false}) {
            const Lane* first = rev ? lines.back().pieces[0] : lines.front().pieces[0];
            double s0 = b_lo ? first->lo.ring_s : first->hi.ring_s;
            double cost = std::min(ring.walk_length(s_entry, s0, true),
                                   ring.walk_length(s_entry, s0, false));
            if (cost < best_cost - 1e-9) {
                best_cost = cost;
                best = {rev, b_lo};
            }
        }
    }
    std::vector<const Lane*> lanes;
    for (const auto& g : lines) lanes.push_back(g.pieces[0]);
    if (best->first) std::reverse(lanes.begin(), lanes.end());
    auto b_end = [&](int j) -> const LaneEnd& {
        return best->second ? lanes[j]->lo : lanes[j]->hi;
    };
    auto t_end = [&](int j) -> const LaneEnd& {
        return best->second ? lanes[j]->hi : lanes[j]->lo;
    };

    // Node cycle around the ring must read B0..B_{n-1}, T_{n-1}..T0 in one
    // ring direction; otherwise the tour construction does not apply.
    // Cycle position p: 0..n-1 hold B_p, position n+j holds T_{n-1-j}.
    const int m = 2 * n;
    auto node_at_pos = [&](int p) -> const LaneEnd& {
        return p < n ? b_end(p) : t_end(2 * n - 1 - p);
    };
    {
        std::vector<int> order(m);
        for (int i = 0; i < m; ++i) order[i] = i;
        auto ring_s_of = [&](int p) { return node_at_pos(p).ring_s; };
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return ring_s_of(a) < ring_s_of(b); });
        auto it = std::find(order.begin(), order.end(), 0);
        std::rotate(order.begin(), it, order.end());
        bool fwd_ok = true, bwd_ok = true;
        for (int i = 0; i < m; ++i) {
            if (order[i] != i) fwd_ok = false;
            if (order[i] != (m - i) % m) bwd_ok = false;
        }
        if (!fwd_ok && !bwd_ok) return std::nullopt;
    }

    // Walking from cycle position p to p+1: determine the ring direction by
    // picking the shorter of the two walks (positions are ring-adjacent, so
    // the direct arc is unambiguous).
    auto arc_leg = [&](int p_from, int p_to, bool spray) {
        const LaneEnd& a = node_at_pos((p_from % m + m) % m);
        const LaneEnd& b = node_at_pos((p_to % m + m) % m);
        bool fwd = ring.walk_length(a.ring_s, b.ring_s, true) <=
                   ring.walk_length(a.ring_s, b.ring_s, false);
        return Leg{ring.walk(a.ring_s, b.ring_s, fwd), SegmentKind::headland, -1, spray};
    };
    auto pos_of_b = [&](int j) { return j; };
    auto pos_of_t = [&](int j) { return 2 * n - 1 - j; };

    std::vector<bool> arc_sprayed(m, false);  // arc i sits between positions i and i+1
    auto arc_index = [&](int p1, int p2) {
        int lo = std::min(p1, p2), hi = std::max(p1, p2);
        if (hi == lo + 1) return lo;
        if (lo == 0 && hi == m - 1) return m - 1;  // wrap arc
        throw PlanningError("non-adjacent tour arc");
    };

    std::vector<Leg> legs;
    {
        double s0 = b_end(0).ring_s;
        bool fw = ring.walk_length(s_entry, s0, true) <= ring.walk_length(s_entry, s0, false);
        if (ring.walk_length(s_entry, s0, fw) > 1e-6)
            append_leg(legs, {ring.walk(s_entry, s0, fw), SegmentKind::transition, -1, false});
    }

    // Phase 1: serpentine. Lane j even runs B->T, odd runs T->B; the
    // connecting arc joins equal sides of lanes j and j+1.
    for (int j = 0; j < n; ++j) {
        bool up = (j % 2 == 0);
        const LaneEnd& in = up ? b_end(j) : t_end(j);
        const LaneEnd& out = up ? t_end(j) : b_end(j);
        Point lead_in = legs.empty() ? in.ring_pt : legs.back().pts.back();
        append_leg(legs, {{lead_in, in.chord, out.chord, out.ring_pt},
                          SegmentKind::lane,
                          lanes[j]->id,
                          true});
        if (j + 1 < n) {
            int p_from = up ? pos_of_t(j) : pos_of_b(j);
            int p_to = up ? pos_of_t(j + 1) : pos_of_b(j + 1);
            arc_index(p_from, p_to);  // adjacency sanity check
            append_leg(legs, arc_leg(p_from, p_to, false));
        }
    }

    // Phase 2: one closing ring lap from the final lane end, first across
    // the far-end arc, spraying the full headland in one pass.
    bool last_up = ((n - 1) % 2 == 0);
    int p = last_up ? pos_of_t(n - 1) : pos_of_b(n - 1);
    int step = (p == n - 1) ? +1 : -1;  // first arc is the far-end arc (index n-1)
    for (int k = 0; k < m; ++k) {
        int p_next = ((p + step) % m + m) % m;
        int ai = arc_index(p, p_next);
        if (arc_sprayed[ai]) throw PlanningError("closing lap revisited a headland arc");
        arc_sprayed[ai] = true;
        append_leg(legs, arc_leg(p, p_next, true));
        p = p_next;
    }
    for (bool sprayed : arc_sprayed)
        if (!sprayed) throw PlanningError("tour left a headland arc uncovered");
    return legs;
}

}  // namespace

PathPlan plan_m1(const LaneGrid& grid, const RunConfig& cfg) {
    auto legs = m1_legs(grid, cfg);
    auto chain = fillet_chain(legs, cfg.min_turn_radius);
    return sample_chain(chain, legs, cfg, Method::m1, false);
}

PathPlan plan_m2(const LaneGrid& grid, const RunConfig& cfg) {
    auto tour = m2_tour_legs(grid, cfg);
    std::vector<Leg> legs;
    if (tour) {
        legs = std::move(*tour);
    } else {
        // Fallback: the M1 traversal with predictive labels.
        legs = m1_legs(grid, cfg);
        for (Leg& l : legs) l.spray = l.kind != SegmentKind::transition;
    }
    auto chain = fillet_chain(legs, cfg.min_turn_radius);
    return sample_chain(chain, legs, cfg, Method::m2, true);
}

std::vector<int> lane_priority(const LaneGrid& grid, const PathPlan& plan) {
    std::map<int, double> accum;
    for (const Lane& l : grid.lanes) accum[l.id] = 0.0;
    const auto& sp = plan.samples;
    for (std::size_t k = 1; k < sp.size(); ++k) {
        if (sp[k].lane_id >= 0 && sp[k].lane_id == sp[k - 1].lane_id &&
            sp[k].kind == SegmentKind::lane && sp[k - 1].kind == SegmentKind::lane) {
            accum[sp[k].lane_id] += std::abs(wrap_angle(sp[k].heading - sp[k - 1].heading));
        }
    }
    std::vector<int> order;
    order.reserve(accum.size());
    for (const auto& [id, a] : accum) order.push_back(id);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (accum[a] != accum[b]) return accum[a] < accum[b];
        return a < b;
    });
    return order;
}

std::string plan_to_csv(const PathPlan& plan) {
    std::ostringstream out;
    out << "x,y,heading,yaw_rate,segment_kind,lane_id\n";
    char buf[160];
    for (const PathSample& s : plan.samples) {
        std::snprintf(buf, sizeof(buf), "%.4f,%.4f,%.6f,%.6f,%s,%d\n", s.position.x,
                      s.position.y, s.heading, s.yaw_rate, to_string(s.kind).c_str(), s.lane_id);
        out << buf;
    }
    return out.str();
}

}  // namespace spraysim
