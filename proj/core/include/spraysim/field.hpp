#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spraysim/geometry.hpp"

namespace spraysim {

enum class SectionMode { one, two, multi };
enum class Method { m1, m2 };

std::string to_string(SectionMode m);
std::string to_string(Method m);
SectionMode section_mode_from_string(const std::string& s);
Method method_from_string(const std::string& s);

class FieldError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A field: CCW outer contour, CW obstacle holes, an entry point on the
/// contour. Coordinates are metric and planar; geodetic input is projected
/// at load time.
struct FieldSpec {
    std::string id;
    Polygon contour;
    std::vector<Polygon> obstacles;
    Point entry;

    double net_area_m2() const;
    double area_ha() const;
};

struct RunConfig {
    double working_width = 24.0;   // W, m
    double nozzle_spacing = 0.5;   // w_nozzle, m
    SectionMode section_mode = SectionMode::multi;
    double v_ref = 2.0;            // m/s
    double s_volume_ref = 46.78;   // l/ha
    double sample_spacing = 1.0;   // ds, m
    double min_turn_radius = 5.0;  // m
    Method method = Method::m1;
};

/// Normalizes orientations and checks all FieldSpec invariants; throws
/// FieldError naming the offending ring and vertex/edge index.
void validate_field(FieldSpec& field);

FieldSpec field_from_json(const std::string& text, const std::string& fallback_id);
std::string field_to_json(const FieldSpec& field);
FieldSpec load_field(const std::filesystem::path& path);
void save_field(const FieldSpec& field, const std::filesystem::path& path);

/// All violated RunConfig invariants, empty when the config is valid.
std::vector<std::string> validate_config(const RunConfig& cfg);
/// Total number of independently controllable sections (W / w_nozzle).
int section_count(const RunConfig& cfg);

RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
std::string config_to_string(const RunConfig& cfg);

/// Synthetic fields: rectangles, convex n-gons, L-shapes and rectangles
/// with 1-3 obstacle holes, sized so a 24 m machine fits comfortably.
std::vector<FieldSpec> generate_fields(int count, std::uint64_t seed);

}  // namespace spraysim
