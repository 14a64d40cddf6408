#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spraysim/geometry.hpp"

namespace spraysim {

struct RasterCoverage {
    double gap_area = 0.0;      // field area never covered, m^2
    double overlap_area = 0.0;  // field area covered twice or more, m^2
    double covered_area = 0.0;  // field area covered at least once, m^2
    double field_area = 0.0;    // rasterized field reference area, m^2
};

/// Pixel-count coverage statistics of `cells` over the field (contour minus
/// obstacle interiors) at the given resolution. Pixels are classified by
/// their centres.
RasterCoverage rasterize_coverage(std::span<const QuadCell> cells, const Polygon& contour,
                                  std::span<const Polygon> obstacles, double resolution);

}  // namespace spraysim
