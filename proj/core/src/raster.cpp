#include "spraysim/raster.hpp"

#include <algorithm>
#include <cmath>

namespace spraysim {

namespace {

// Sorted x-crossings of a ring with the horizontal line y.
void ring_crossings(const Polygon& ring, double y, std::vector<double>& xs) {
    const auto& v = ring.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % v.size()];
        if ((a.y > y) == (b.y > y)) continue;
        xs.push_back(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
    }
}

}  // namespace

RasterCoverage rasterize_coverage(std::span<const QuadCell> cells, const Polygon& contour,
                                  std::span<const Polygon> obstacles, double resolution) {
    RasterCoverage out;
    double xmin = contour.vertices[0].x, xmax = xmin;
    double ymin = contour.vertices[0].y, ymax = ymin;
    for (const Point& p : contour.vertices) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    const double res = resolution;
    const int nx = std::max(1, static_cast<int>(std::ceil((xmax - xmin) / res)));
    const int ny = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / res)));
    std::vector<std::uint8_t> count(static_cast<std::size_t>(nx) * ny, 0);

    // Paint cells: per row, even-odd x-intervals of the quad.
    std::vector<double> xs;
    for (const QuadCell& c : cells) {
        Polygon q;
        q.vertices.assign(c.corners.begin(), c.corners.end());
        double cy0 = q.vertices[0].y, cy1 = cy0;
        for (const Point& p : q.vertices) {
            cy0 = std::min(cy0, p.y);
            cy1 = std::max(cy1, p.y);
        }
        int iy0 = std::max(0, static_cast<int>(std::floor((cy0 - ymin) / res)));
        int iy1 = std::min(ny - 1, static_cast<int>(std::floor((cy1 - ymin) / res)));
        for (int iy = iy0; iy <= iy1; ++iy) {
            double y = ymin + (iy + 0.5) * res;
            xs.clear();
            ring_crossings(q, y, xs);
            std::sort(xs.begin(), xs.end());
            for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
                int ix0 = std::max(0, static_cast<int>(std::ceil((xs[k] - xmin) / res - 0.5)));
                int ix1 =
                    std::min(nx - 1, static_cast<int>(std::floor((xs[k + 1] - xmin) / res - 0.5)));
                std::uint8_t* row = count.data() + static_cast<std::size_t>(iy) * nx;
                for (int ix = ix0; ix <= ix1; ++ix) {
                    if (row[ix] < 255) ++row[ix];
                }
            }
        }
    }

    // Tally pixels inside the field (contour minus obstacle interiors).
    const double px_area = res * res;
    std::vector<double> field_xs, hole_xs;
    for (int iy = 0; iy < ny; ++iy) {
        double y = ymin + (iy + 0.5) * res;
        field_xs.clear();
        ring_crossings(contour, y, field_xs);
        std::sort(field_xs.begin(), field_xs.end());
        hole_xs.clear();
        for (const Polygon& o : obstacles) ring_crossings(o, y, hole_xs);
        std::sort(hole_xs.begin(), hole_xs.end());
        const std::uint8_t* row = count.data() + static_cast<std::size_t>(iy) * nx;
        for (std::size_t k = 0; k + 1 < field_xs.size(); k += 2) {
            int ix0 = std::max(0, static_cast<int>(std::ceil((field_xs[k] - xmin) / res - 0.5)));
            int ix1 = std::min(
                nx - 1, static_cast<int>(std::floor((field_xs[k + 1] - xmin) / res - 0.5)));
            for (int ix = ix0; ix <= ix1; ++ix) {
                double x = xmin + (ix + 0.5) * res;
                bool in_hole = false;
                for (std::size_t h = 0; h + 1 < hole_xs.size(); h += 2) {
                    if (x >= hole_xs[h] && x <= hole_xs[h + 1]) {
                        in_hole = true;
                        break;
                    }
                }
                if (in_hole) continue;
                out.field_area += px_area;
                std::uint8_t c = row[ix];
                if (c == 0) out.gap_area += px_area;
                if (c >= 1) out.covered_area += px_area;
                if (c >= 2) out.overlap_area += px_area;
            }
        }
    }
    return out;
}

}  // namespace spraysim
