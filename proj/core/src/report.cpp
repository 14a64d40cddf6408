#include "spraysim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spraysim/raster.hpp"
#include "spraysim/switching.hpp"

namespace spraysim {

namespace {

const char* kSetupNames[6] = {"M1_1", "M1_2", "M1_48", "M2_1", "M2_2", "M2_48"};

std::string fmt(double v, int decimals = 1) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string pathlengths_csv(const std::vector<FieldResult>& results) {
    std::ostringstream out;
    out << "field,A_field_ha,L_M1,L_M2,dL_m,dL_pct\n";
    for (const FieldResult& r : results) {
        double l1 = r.rows[0].metrics.L;
        double l2 = r.rows[3].metrics.L;
        out << r.id << ',' << fmt(r.area_ha, 2) << ',' << fmt(l1) << ',' << fmt(l2) << ','
            << fmt(l2 - l1) << ',' << fmt(100.0 * (l2 - l1) / l1) << "\n";
    }
    return out.str();
}

std::string volumes_csv(const std::vector<FieldResult>& results) {
    std::ostringstream out;
    out << "field,A_field_ha,S_field_ref";
    for (const char* n : kSetupNames) out << ",S_" << n;
    for (const char* n : kSetupNames) out << ",dS_m_" << n;
    for (const char* n : kSetupNames) out << ",dS_pct_" << n;
    out << "\n";
    for (const FieldResult& r : results) {
        out << r.id << ',' << fmt(r.area_ha, 2) << ',' << fmt(r.rows[0].metrics.S_field_ref);
        for (int i = 0; i < 6; ++i) out << ',' << fmt(r.rows[i].metrics.S);
        for (int i = 0; i < 6; ++i) out << ',' << fmt(r.rows[i].metrics.dS_m);
        for (int i = 0; i < 6; ++i) out << ',' << fmt(100.0 * r.rows[i].metrics.dS_pct);
        out << "\n";
    }
    return out.str();
}

std::string economics_csv(const std::vector<FieldResult>& results, const CostParams& params) {
    std::ostringstream out;
    // Per-hectare extra volume of the 1- and 2-section setups over the
    // multi-section run, per field and averaged over the batch.
    out << "field,A_field_ha,dS_M1_1,dS_M1_2,dS_M2_1,dS_M2_2\n";
    double avg[4] = {0, 0, 0, 0};
    for (const FieldResult& r : results) {
        double ds[4] = {
            spray_delta(r.rows[0].metrics.S, r.rows[2].metrics.S) / r.area_ha,
            spray_delta(r.rows[1].metrics.S, r.rows[2].metrics.S) / r.area_ha,
            spray_delta(r.rows[3].metrics.S, r.rows[5].metrics.S) / r.area_ha,
            spray_delta(r.rows[4].metrics.S, r.rows[5].metrics.S) / r.area_ha,
        };
        out << r.id << ',' << fmt(r.area_ha, 2);
        for (int i = 0; i < 4; ++i) {
            out << ',' << fmt(ds[i]);
            avg[i] += ds[i] / results.size();
        }
        out << "\n";
    }
    out << "average,";
    {
        double a = 0;
        for (const FieldResult& r : results) a += r.area_ha / results.size();
        out << fmt(a, 2);
    }
    for (int i = 0; i < 4; ++i) out << ',' << fmt(avg[i]);
    out << "\n\n";

    auto table = cost_table({avg[0], avg[1], avg[2], avg[3]},
                            {params.asc_premium, 2.0 * params.asc_premium},
                            {30.0, 100.0, 300.0, 600.0, 1000.0},
                            {params.chemical_cost, 10.0}, params);
    out << cost_table_csv(table);
    return out.str();
}

std::string render_svg(const SprayMap& map, const FieldSpec& field, const PathPlan* plan) {
    double xmin = field.contour.vertices[0].x, xmax = xmin;
    double ymin = field.contour.vertices[0].y, ymax = ymin;
    for (const Point& p : field.contour.vertices) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    for (const SprayCell& c : map.cells) {
        for (const Point& p : c.cell.corners) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    const double pad = 2.0;
    xmin -= pad;
    ymin -= pad;
    xmax += pad;
    ymax += pad;

    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"%.2f %.2f %.2f %.2f\" "
                  "width=\"%d\" height=\"%d\">\n",
                  xmin, -ymax, xmax - xmin, ymax - ymin,
                  static_cast<int>(std::lround(3 * (xmax - xmin))),
                  static_cast<int>(std::lround(3 * (ymax - ymin))));
    out << buf;
    out << "<rect x=\"" << fmt(xmin, 2) << "\" y=\"" << fmt(-ymax, 2) << "\" width=\""
        << fmt(xmax - xmin, 2) << "\" height=\"" << fmt(ymax - ymin, 2)
        << "\" fill=\"white\"/>\n";
    // North up: flip the y axis.
    out << "<g transform=\"scale(1,-1)\">\n";

    const double s_ref = map.s_volume_ref;
    for (const SprayCell& c : map.cells) {
        double opacity = s_ref > 0 ? std::clamp(c.applied_rate / (2.0 * s_ref), 0.0, 1.0) : 0.0;
        out << "<polygon class=\"cell\" points=\"";
        for (const Point& p : c.cell.corners) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", p.x, p.y);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "\" fill=\"black\" fill-opacity=\"%.4f\"/>\n", opacity);
        out << buf;
    }

    auto ring_svg = [&](const Polygon& poly, const char* stroke, double width) {
        out << "<polygon points=\"";
        for (const Point& p : poly.vertices) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", p.x, p.y);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "\" fill=\"none\" stroke=\"%s\" stroke-width=\"%.2f\"/>\n",
                      stroke, width);
        out << buf;
    };
    ring_svg(field.contour, "#202020", 0.6);
    for (const Polygon& o : field.obstacles) ring_svg(o, "#202020", 0.5);

    if (plan != nullptr && !plan->samples.empty()) {
        out << "<polyline points=\"";
        for (const PathSample& s : plan->samples) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", s.position.x, s.position.y);
            out << buf;
        }
        out << "\" fill=\"none\" stroke=\"#2060c0\" stroke-width=\"0.25\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Filter benchmark scenario
// ---------------------------------------------------------------------------

namespace {

struct ScenarioStep {
    Point pos;
    Point dir;
};

/// Filter benchmark path: four coarsely sampled passes of a 2 m boom at
/// pitches 1.0/0.33 m (the second pair grazing the first), then a hook that
/// re-crosses the freshly sprayed rows. Coarse sampling keeps the whole
/// revisit inside the sprayed-polygon window while leaving the occupancy
/// trackers with sparse centroid records.
std::vector<ScenarioStep> scenario_path() {
    const double L = 4.3, pitch3 = 0.33;
    std::vector<ScenarioStep> pts;
    auto add_line = [&](Point a, Point b, double step) {
        double len = distance(a, b);
        Point d = normalized(b - a);
        for (double s = 0.0; s < len - 1e-9; s += step) pts.push_back({a + d * s, d});
        pts.push_back({b, d});
    };
    add_line({0, 0}, {L, 0}, 2.0);
    add_line({L, 1.0}, {0, 1.0}, 2.0);
    add_line({0, 1.0 + pitch3}, {L, 1.0 + pitch3}, 2.0);
    add_line({L, 1.0 + pitch3}, {2.75, 2.125}, 2.5);
    add_line({2.75, 2.125}, {1.65, 1.275}, 1.6);
    return pts;
}

std::vector<std::vector<QuadCell>> scenario_cells(const std::vector<ScenarioStep>& path,
                                                  double boom_w, double section_w) {
    const int n_side = static_cast<int>(std::lround(boom_w / section_w)) / 2;
    std::vector<std::vector<QuadCell>> steps;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        Point a = path[k].pos;
        Point b = path[k + 1].pos;
        double d = distance(a, b);
        if (d < 1e-9) continue;
        Point dir = normalized(b - a);
        Point nrm = right_normal(dir);
        std::vector<QuadCell> cells;
        for (int i = -n_side; i <= n_side; ++i) {
            if (i == 0) continue;
            double lo = (std::abs(i) - 1) * section_w * (i < 0 ? -1 : 1);
            double hi = std::abs(i) * section_w * (i < 0 ? -1 : 1);
            if (i < 0) std::swap(lo, hi);
            QuadCell c;
            c.kind = CellKind::straight;
            c.section_index = i;
            c.corners = {a + nrm * lo, a + nrm * hi, b + nrm * hi, b + nrm * lo};
            c.area = d * section_w;
            cells.push_back(c);
        }
        steps.push_back(std::move(cells));
    }
    return steps;
}

}  // namespace

std::vector<FilterVariant> filter_benchmark(const std::vector<double>& d_g_values) {
    const double boom_w = 2.0, section_w = 0.5;
    const double s_ref = 46.78;
    auto path = scenario_path();
    auto steps = scenario_cells(path, boom_w, section_w);

    // Gap/overlap are judged against the pass strips proper; the off-swath
    // turn-around ground does not count.
    const Polygon reference{{{0, -1}, {4.3, -1}, {4.3, 2.33}, {0, 2.33}}};
    const double swath_area = polygon_area(reference);

    auto finish = [&](std::string name, double d_g, std::vector<QuadCell> kept) {
        FilterVariant v;
        v.name = std::move(name);
        v.d_g = d_g;
        v.swath_area = swath_area;
        RasterCoverage rc = rasterize_coverage(kept, reference, {}, 0.01);
        v.gap_area = rc.gap_area;
        v.overlap_area = rc.overlap_area;
        v.map.s_volume_ref = s_ref;
        for (QuadCell& c : kept) {
            SprayCell sc;
            sc.applied_volume = s_ref / 10000.0 * c.area;
            sc.applied_rate = s_ref;
            sc.cell = std::move(c);
            v.map.cells.push_back(std::move(sc));
        }
        return v;
    };

    std::vector<FilterVariant> out;
    for (double d_g : d_g_values) {
        OccupancyTracker tracker(d_g);
        std::vector<QuadCell> kept;
        for (const auto& st : steps) {
            auto k = filter_overlap_grid(st, tracker);
            kept.insert(kept.end(), k.begin(), k.end());
        }
        char name[48];
        std::snprintf(name, sizeof(name), "grid dG=%.3f", d_g);
        out.push_back(finish(name, d_g, std::move(kept)));
    }
    {
        SprayedPolygonState state(10);
        std::vector<QuadCell> kept;
        for (const auto& st : steps) {
            auto k = filter_overlap_polygon(st, state);
            state.add_step(k);
            kept.insert(kept.end(), k.begin(), k.end());
        }
        out.push_back(finish("polygon", 0.0, std::move(kept)));
    }
    return out;
}

std::string filter_benchmark_csv(const std::vector<FilterVariant>& variants) {
    std::ostringstream out;
    out << "variant,d_G,gap_area_m2,overlap_area_m2,swath_area_m2\n";
    for (const FilterVariant& v : variants) {
        out << v.name << ',' << fmt(v.d_g, 3) << ',' << fmt(v.gap_area, 3) << ','
            << fmt(v.overlap_area, 3) << ',' << fmt(v.swath_area, 3) << "\n";
    }
    return out.str();
}

}  // namespace spraysim
