#pragma once

// Independent reference implementations used only by tests. These must stay
// decoupled from the library's own geometry paths: containment is computed
// via winding numbers, areas via rejection sampling or brute-force pixel
// rasterization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "spraysim/geometry.hpp"

namespace oracles {

using spraysim::Point;
using spraysim::Polygon;
using spraysim::QuadCell;

// Winding-number containment, strictly positive winding = inside.
inline int winding_number(Point p, const Polygon& ring) {
    int wn = 0;
    const auto& v = ring.vertices;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = v[i];
        const Point& b = v[(i + 1) % n];
        double is_left = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if (a.y <= p.y) {
            if (b.y > p.y && is_left > 0) ++wn;
        } else {
            if (b.y <= p.y && is_left < 0) --wn;
        }
    }
    return wn;
}

inline bool winding_inside(Point p, const Polygon& outer, std::span<const Polygon> holes = {}) {
    if (winding_number(p, outer) == 0) return false;
    for (const Polygon& h : holes)
        if (winding_number(p, h) != 0) return false;
    return true;
}

struct Bounds {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
};

inline Bounds bounds_of(const Polygon& poly) {
    Bounds b{poly.vertices[0].x, poly.vertices[0].y, poly.vertices[0].x, poly.vertices[0].y};
    for (const Point& p : poly.vertices) {
        b.xmin = std::min(b.xmin, p.x);
        b.xmax = std::max(b.xmax, p.x);
        b.ymin = std::min(b.ymin, p.y);
        b.ymax = std::max(b.ymax, p.y);
    }
    return b;
}

inline Bounds bounds_of_cells(std::span<const QuadCell> cells) {
    Bounds b{cells[0].corners[0].x, cells[0].corners[0].y, cells[0].corners[0].x,
             cells[0].corners[0].y};
    for (const QuadCell& c : cells) {
        for (const Point& p : c.corners) {
            b.xmin = std::min(b.xmin, p.x);
            b.xmax = std::max(b.xmax, p.x);
            b.ymin = std::min(b.ymin, p.y);
            b.ymax = std::max(b.ymax, p.y);
        }
    }
    return b;
}

// Rejection-sampling area estimate over the bounding box.
inline double monte_carlo_area(const Polygon& poly, int samples, std::uint64_t seed) {
    Bounds b = bounds_of(poly);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(b.xmin, b.xmax);
    std::uniform_real_distribution<double> uy(b.ymin, b.ymax);
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        if (winding_number({ux(rng), uy(rng)}, poly) != 0) ++hits;
    }
    double box = (b.xmax - b.xmin) * (b.ymax - b.ymin);
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

// Pixel-counting union area of a set of quads at the given resolution.
inline double raster_union_area_cells(std::span<const QuadCell> cells, double res) {
    if (cells.empty()) return 0.0;
    Bounds b = bounds_of_cells(cells);
    b.xmin -= res;
    b.ymin -= res;
    b.xmax += res;
    b.ymax += res;
    const int nx = static_cast<int>(std::ceil((b.xmax - b.xmin) / res));
    const int ny = static_cast<int>(std::ceil((b.ymax - b.ymin) / res));
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(nx) * ny, 0);
    std::vector<Polygon> rings;
    rings.reserve(cells.size());
    for (const QuadCell& c : cells) {
        Polygon r;
        r.vertices.assign(c.corners.begin(), c.corners.end());
        rings.push_back(std::move(r));
    }
    for (const Polygon& r : rings) {
        Bounds rb = bounds_of(r);
        int ix0 = std::max(0, static_cast<int>((rb.xmin - b.xmin) / res) - 1);
        int ix1 = std::min(nx - 1, static_cast<int>((rb.xmax - b.xmin) / res) + 1);
        int iy0 = std::max(0, static_cast<int>((rb.ymin - b.ymin) / res) - 1);
        int iy1 = std::min(ny - 1, static_cast<int>((rb.ymax - b.ymin) / res) + 1);
        for (int iy = iy0; iy <= iy1; ++iy) {
            double py = b.ymin + (iy + 0.5) * res;
            for (int ix = ix0; ix <= ix1; ++ix) {
                double px = b.xmin + (ix + 0.5) * res;
                if (winding_number({px, py}, r) != 0)
                    hit[static_cast<std::size_t>(iy) * nx + ix] = 1;
            }
        }
    }
    std::size_t count = 0;
    for (std::uint8_t h : hit) count += h;
    return static_cast<double>(count) * res * res;
}

// Pixel coverage counts for gap/overlap oracles: returns {gap, overlap}
// areas inside the reference region (union of reference polygons), where
// coverage is counted over `cells`.
struct GapOverlap {
    double gap = 0;
    double overlap = 0;
};

inline GapOverlap raster_gap_overlap(std::span<const Polygon> reference,
                                     std::span<const QuadCell> cells, double res) {
    Bounds b = bounds_of(reference[0]);
    for (const Polygon& r : reference) {
        Bounds rb = bounds_of(r);
        b.xmin = std::min(b.xmin, rb.xmin);
        b.xmax = std::max(b.xmax, rb.xmax);
        b.ymin = std::min(b.ymin, rb.ymin);
        b.ymax = std::max(b.ymax, rb.ymax);
    }
    b.xmin -= res;
    b.ymin -= res;
    b.xmax += res;
    b.ymax += res;
    const int nx = static_cast<int>(std::ceil((b.xmax - b.xmin) / res));
    const int ny = static_cast<int>(std::ceil((b.ymax - b.ymin) / res));
    std::vector<std::uint8_t> cover(static_cast<std::size_t>(nx) * ny, 0);
    for (const QuadCell& c : cells) {
        Polygon r;
        r.vertices.assign(c.corners.begin(), c.corners.end());
        Bounds rb = bounds_of(r);
        int ix0 = std::max(0, static_cast<int>((rb.xmin - b.xmin) / res) - 1);
        int ix1 = std::min(nx - 1, static_cast<int>((rb.xmax - b.xmin) / res) + 1);
        int iy0 = std::max(0, static_cast<int>((rb.ymin - b.ymin) / res) - 1);
        int iy1 = std::min(ny - 1, static_cast<int>((rb.ymax - b.ymin) / res) + 1);
        for (int iy = iy0; iy <= iy1; ++iy) {
            double py = b.ymin + (iy + 0.5) * res;
            for (int ix = ix0; ix <= ix1; ++ix) {
                double px = b.xmin + (ix + 0.5) * res;
                if (winding_number({px, py}, r) != 0) {
                    auto& v = cover[static_cast<std::size_t>(iy) * nx + ix];
                    if (v < 255) ++v;
                }
            }
        }
    }
    GapOverlap go;
    for (int iy = 0; iy < ny; ++iy) {
        double py = b.ymin + (iy + 0.5) * res;
        for (int ix = 0; ix < nx; ++ix) {
            double px = b.xmin + (ix + 0.5) * res;
            bool in_ref = false;
            for (const Polygon& r : reference) {
                if (winding_number({px, py}, r) != 0) {
                    in_ref = true;
                    break;
                }
            }
            if (!in_ref) continue;
            std::uint8_t v = cover[static_cast<std::size_t>(iy) * nx + ix];
            if (v == 0) go.gap += res * res;
            if (v >= 2) go.overlap += res * res;
        }
    }
    return go;
}

}  // namespace oracles
