#include "spraysim/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace spraysim {

namespace {

constexpr double kEarthRadius = 6371000.0;

bool rings_cross(const Polygon& a, const Polygon& b) {
    auto orient = [](Point p, Point q, Point r) { return cross(q - p, r - p); };
    const auto& va = a.vertices;
    const auto& vb = b.vertices;
    for (std::size_t i = 0; i < va.size(); ++i) {
        Point p1 = va[i], p2 = va[(i + 1) % va.size()];
        for (std::size_t j = 0; j < vb.size(); ++j) {
            Point q1 = vb[j], q2 = vb[(j + 1) % vb.size()];
            double o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
            double o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
            if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return true;
        }
    }
    return false;
}

Polygon ring_from_json(const json& arr, const std::string& what) {
    Polygon p;
    if (!arr.is_array()) throw FieldError(what + ": expected an array of [x,y] pairs");
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 2)
            throw FieldError(what + ": vertex " + std::to_string(p.size()) +
                             " is not an [x,y] pair");
        p.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    // Tolerate an explicitly closed ring.
    if (p.size() >= 2 && distance(p.vertices.front(), p.vertices.back()) < 1e-12)
        p.vertices.pop_back();
    return p;
}

void project_equirectangular(FieldSpec& f) {
    // Local tangent plane anchored at the contour centroid; adequate below
    // a couple of kilometres of extent.
    Point c = polygon_centroid(f.contour);
    const double lat0 = c.y * M_PI / 180.0;
    const double kx = kEarthRadius * std::cos(lat0) * M_PI / 180.0;
    const double ky = kEarthRadius * M_PI / 180.0;
    auto proj = [&](Point p) { return Point{(p.x - c.x) * kx, (p.y - c.y) * ky}; };
    for (Point& p : f.contour.vertices) p = proj(p);
    for (Polygon& o : f.obstacles)
        for (Point& p : o.vertices) p = proj(p);
    f.entry = proj(f.entry);
}

}  // namespace

std::string to_string(SectionMode m) {
    switch (m) {
        case SectionMode::one: return "one";
        case SectionMode::two: return "two";
        case SectionMode::multi: return "multi";
    }
    return "?";
}

std::string to_string(Method m) { return m == Method::m1 ? "M1" : "M2"; }

SectionMode section_mode_from_string(const std::string& s) {
    if (s == "one" || s == "1") return SectionMode::one;
    if (s == "two" || s == "2") return SectionMode::two;
    if (s == "multi" || s == "48") return SectionMode::multi;
    throw FieldError("unknown section_mode '" + s + "' (expected one|two|multi)");
}

Method method_from_string(const std::string& s) {
    if (s == "M1" || s == "m1") return Method::m1;
    if (s == "M2" || s == "m2") return Method::m2;
    throw FieldError("unknown method '" + s + "' (expected M1|M2)");
}

double FieldSpec::net_area_m2() const {
    double a = std::abs(polygon_area(contour));
    for (const Polygon& o : obstacles) a -= std::abs(polygon_area(o));
    return a;
}

double FieldSpec::area_ha() const { return net_area_m2() / 10000.0; }

void validate_field(FieldSpec& field) {
    if (field.contour.size() < 3)
        throw FieldError("contour: fewer than 3 vertices");
    auto [ci, cj] = find_self_intersection(field.contour);
    if (ci >= 0)
        throw FieldError("contour self-intersects: edges " + std::to_string(ci) + " and " +
                         std::to_string(cj));
    if (!polygon_is_ccw(field.contour)) field.contour = reversed(field.contour);

    for (std::size_t k = 0; k < field.obstacles.size(); ++k) {
        Polygon& o = field.obstacles[k];
        std::string name = "obstacle " + std::to_string(k);
        if (o.size() < 3) throw FieldError(name + ": fewer than 3 vertices");
        auto [oi, oj] = find_self_intersection(o);
        if (oi >= 0)
            throw FieldError(name + " self-intersects: edges " + std::to_string(oi) + " and " +
                             std::to_string(oj));
        if (polygon_is_ccw(o)) o = reversed(o);  // holes stored clockwise
        for (std::size_t v = 0; v < o.size(); ++v) {
            if (!point_in_ring(o.vertices[v], field.contour) ||
                distance_to_ring(o.vertices[v], field.contour) < 1e-9)
                throw FieldError(name + " outside contour at vertex " + std::to_string(v));
        }
        if (rings_cross(o, field.contour))
            throw FieldError(name + " crosses the contour");
    }
    for (std::size_t a = 0; a < field.obstacles.size(); ++a) {
        for (std::size_t b = a + 1; b < field.obstacles.size(); ++b) {
            const Polygon& pa = field.obstacles[a];
            const Polygon& pb = field.obstacles[b];
            bool overlap = rings_cross(pa, pb);
            for (const Point& p : pa.vertices) overlap = overlap || point_in_ring(p, pb);
            for (const Point& p : pb.vertices) overlap = overlap || point_in_ring(p, pa);
            if (overlap)
                throw FieldError("obstacles " + std::to_string(a) + " and " + std::to_string(b) +
                                 " overlap");
        }
    }
    if (distance_to_ring(field.entry, field.contour) > 1.0)
        throw FieldError("entry point farther than 1 m from the contour");
}

FieldSpec field_from_json(const std::string& text, const std::string& fallback_id) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FieldError(std::string("field file parse error: ") + e.what());
    }
    FieldSpec f;
    f.id = j.value("id", fallback_id);
    if (!j.contains("contour")) throw FieldError("field file missing 'contour'");
    f.contour = ring_from_json(j["contour"], "contour");
    if (j.contains("obstacles")) {
        int k = 0;
        for (const auto& o : j["obstacles"])
            f.obstacles.push_back(ring_from_json(o, "obstacle " + std::to_string(k++)));
    }
    if (j.contains("entry")) {
        const auto& e = j["entry"];
        if (!e.is_array() || e.size() != 2) throw FieldError("entry: expected an [x,y] pair");
        f.entry = {e[0].get<double>(), e[1].get<double>()};
    } else if (!f.contour.vertices.empty()) {
        f.entry = f.contour.vertices.front();
    }
    std::string crs = j.value("crs", "local");
    if (crs == "wgs84" || crs == "geodetic") {
        project_equirectangular(f);
    } else if (crs != "local") {
        throw FieldError("unknown crs '" + crs + "' (expected local|wgs84)");
    }
    validate_field(f);
    return f;
}

std::string field_to_json(const FieldSpec& field) {
    json j;
    j["id"] = field.id;
    j["crs"] = "local";
    auto ring_to_json = [](const Polygon& p) {
        json arr = json::array();
        for (const Point& v : p.vertices) arr.push_back({v.x, v.y});
        return arr;
    };
    j["contour"] = ring_to_json(field.contour);
    json obs = json::array();
    for (const Polygon& o : field.obstacles) obs.push_back(ring_to_json(o));
    j["obstacles"] = obs;
    j["entry"] = {field.entry.x, field.entry.y};
    return j.dump(2);
}

FieldSpec load_field(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FieldError("cannot open field file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return field_from_json(ss.str(), path.stem().string());
}

void save_field(const FieldSpec& field, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FieldError("cannot write field file: " + path.string());
    out << field_to_json(field) << "\n";
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> v;
    if (cfg.working_width <= 0) v.push_back("working_width must be > 0");
    if (cfg.nozzle_spacing <= 0) v.push_back("nozzle_spacing must be > 0");
    if (cfg.working_width > 0 && cfg.nozzle_spacing > 0) {
        double ratio = cfg.working_width / cfg.nozzle_spacing;
        double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 || static_cast<long long>(rounded) % 2 != 0 ||
            rounded <= 0)
            v.push_back("W/w_nozzle not an even integer");
    }
    if (cfg.v_ref <= 0) v.push_back("v_ref must be > 0");
    if (cfg.s_volume_ref <= 0) v.push_back("s_volume_ref must be > 0");
    if (cfg.sample_spacing <= 0) v.push_back("sample_spacing must be > 0");
    if (cfg.min_turn_radius < 0) v.push_back("min_turn_radius must be >= 0");
    return v;
}

int section_count(const RunConfig& cfg) {
    return static_cast<int>(std::round(cfg.working_width / cfg.nozzle_spacing));
}

RunConfig parse_config(const std::string& text, RunConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FieldError("config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r\n");
            auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "working_width") base.working_width = std::stod(val);
            else if (key == "nozzle_spacing") base.nozzle_spacing = std::stod(val);
            else if (key == "section_mode") base.section_mode = section_mode_from_string(val);
            else if (key == "v_ref") base.v_ref = std::stod(val);
            else if (key == "s_volume_ref") base.s_volume_ref = std::stod(val);
            else if (key == "sample_spacing") base.sample_spacing = std::stod(val);
            else if (key == "min_turn_radius") base.min_turn_radius = std::stod(val);
            else if (key == "method") base.method = method_from_string(val);
            else throw FieldError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw FieldError("config line " + std::to_string(lineno) + ": bad number '" + val +
                             "'");
        }
    }
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw FieldError("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), base);
}

std::string config_to_string(const RunConfig& cfg) {
    std::ostringstream out;
    out << "working_width = " << cfg.working_width << "\n";
    out << "nozzle_spacing = " << cfg.nozzle_spacing << "\n";
    out << "section_mode = " << to_string(cfg.section_mode) << "\n";
    out << "v_ref = " << cfg.v_ref << "\n";
    out << "s_volume_ref = " << cfg.s_volume_ref << "\n";
    out << "sample_spacing = " << cfg.sample_spacing << "\n";
    out << "min_turn_radius = " << cfg.min_turn_radius << "\n";
    out << "method = " << to_string(cfg.method) << "\n";
    return out.str();
}

namespace {

Polygon rect_ring(double x0, double y0, double w, double h) {
    return Polygon{{{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}}};
}

// Cut 45-degree chamfers into convex right-angle corners; field boundaries
// are rarely square and a blunt corner is what a headland pass can cover.
Polygon chamfer_convex_corners(const Polygon& poly, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> uc(lo, hi);
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    Polygon out;
    for (std::size_t i = 0; i < n; ++i) {
        Point prev = v[(i + n - 1) % n];
        Point cur = v[i];
        Point next = v[(i + 1) % n];
        Point din = cur - prev;
        Point dout = next - cur;
        bool convex = cross(din, dout) > 0;  // CCW ring
        double ang = std::abs(std::atan2(cross(din, dout), dot(din, dout)));
        if (!convex || ang < M_PI / 3.0) {
            out.vertices.push_back(cur);
            continue;
        }
        double c = uc(rng);
        c = std::min({c, 0.35 * norm(din), 0.35 * norm(dout)});
        out.vertices.push_back(cur - normalized(din) * c);
        out.vertices.push_back(cur + normalized(dout) * c);
    }
    return out;
}

}  // namespace

std::vector<FieldSpec> generate_fields(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<FieldSpec> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        std::uniform_real_distribution<double> uw(200.0, 330.0);
        std::uniform_real_distribution<double> uh(180.0, 300.0);
        FieldSpec f;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "synth-%03d", k + 1);
        f.id = idbuf;
        switch (k % 4) {
            case 0: {  // rectangle with blunted corners
                f.contour = chamfer_convex_corners(rect_ring(0, 0, uw(rng), uh(rng)), rng,
                                                   8.0, 16.0);
                break;
            }
            case 1: {  // convex polygon via hull of ring-sampled points;
                       // the tight radius band keeps every corner obtuse
                std::uniform_int_distribution<int> un(7, 9);
                std::uniform_real_distribution<double> ur(140.0, 168.0);
                int n = un(rng);
                std::vector<Point> pts;
                for (int i = 0; i < n; ++i) {
                    double ang = 2.0 * M_PI * i / n;
                    double r = ur(rng);
                    pts.push_back({170 + r * std::cos(ang), 170 + r * std::sin(ang)});
                }
                std::sort(pts.begin(), pts.end(), [](Point a, Point b) {
                    return a.x < b.x || (a.x == b.x && a.y < b.y);
                });
                std::vector<Point> hull;
                auto build = [&](auto begin, auto end) {
                    std::size_t base = hull.size();
                    for (auto it = begin; it != end; ++it) {
                        while (hull.size() >= base + 2 &&
                               cross(hull.back() - hull[hull.size() - 2],
                                     *it - hull[hull.size() - 2]) <= 0)
                            hull.pop_back();
                        hull.push_back(*it);
                    }
                };
                build(pts.begin(), pts.end());
                hull.pop_back();
                build(pts.rbegin(), pts.rend());
                hull.pop_back();
                f.contour = Polygon{std::move(hull)};
                break;
            }
            case 2: {  // L-shape with arms several working widths wide
                double w = std::max(uw(rng), 270.0), h = std::max(uh(rng), 250.0);
                double nx = 0.45 * w, ny = 0.45 * h;
                f.contour = chamfer_convex_corners(Polygon{{{0, 0},
                                                            {w, 0},
                                                            {w, h - ny},
                                                            {w - nx, h - ny},
                                                            {w - nx, h},
                                                            {0, h}}},
                                                   rng, 8.0, 16.0);
                break;
            }
            default: {  // rectangle with 1-3 obstacle holes
                double w = std::max(uw(rng), 260.0), h = std::max(uh(rng), 240.0);
                f.contour = chamfer_convex_corners(rect_ring(0, 0, w, h), rng, 8.0, 16.0);
                std::uniform_int_distribution<int> uo(1, 3);
                int n_obs = uo(rng);
                std::uniform_real_distribution<double> us(14.0, 26.0);
                for (int i = 0; i < n_obs; ++i) {
                    double s = us(rng);
                    // Keep obstacle rings clear of the outer headland band.
                    double margin = 60.0 + s;
                    std::uniform_real_distribution<double> ux(margin, w - margin);
                    std::uniform_real_distribution<double> uy(margin, h - margin);
                    for (int attempt = 0; attempt < 40; ++attempt) {
                        double cx = ux(rng), cy = uy(rng);
                        bool clear = true;
                        for (const Polygon& prev : f.obstacles) {
                            Point pc = polygon_centroid(prev);
                            if (std::hypot(pc.x - cx, pc.y - cy) < 2.0 * (s + 50.0)) {
                                clear = false;
                                break;
                            }
                        }
                        if (clear) {
                            f.obstacles.push_back(
                                reversed(rect_ring(cx - s / 2, cy - s / 2, s, s)));
                            break;
                        }
                    }
                }
                break;
            }
        }
        f.entry = f.contour.vertices.front();
        validate_field(f);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace spraysim
