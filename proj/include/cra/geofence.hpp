#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cra/model.hpp"
#include "cra/optimize.hpp"

namespace cra {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned obstacle, in meters.
struct Rect {
    double xmin, ymin, xmax, ymax;
};

/// Uniform cell grid over a rectangle; values live at cell centers.
struct GridSpec {
    double xmin, ymin, xmax, ymax;
    int nx = 0, ny = 0;

    double dx() const { return (xmax - xmin) / nx; }
    double dy() const { return (ymax - ymin) / ny; }
    Vec2 center(int ix, int iy) const {
        return {xmin + (ix + 0.5) * dx(), ymin + (iy + 0.5) * dy()};
    }
};

/// Planar radio scene: one transmitter, one legitimate receiver, rectangular
/// blockers, and the link parameters of the urban-micro propagation model.
struct Scene {
    Vec2 tx{0.0, 0.0};
    Vec2 bob{60.0, 0.0};
    std::vector<Rect> obstacles;
    GridSpec grid{-150.0, -150.0, 150.0, 150.0, 120, 120};
    double carrier_ghz = 3.5;
    double snr_threshold = 1.0;     // linear ratio
    double link_budget_db = 89.184; // transmit power minus noise floor
    std::optional<double> bob_ps_override;  // pin the legitimate channel if set
};

/// Success probabilities are clipped into this closed interval so the
/// downstream model parameters stay strictly inside (0,1).
inline constexpr double kSuccessFloor = 1e-4;
inline constexpr double kSuccessCeil = 1.0 - 1e-4;

/// Identifier expected in scene JSON documents.
inline constexpr const char* kSceneSchema = "cra-scene/1";

/// Built-in demonstration scene: four blocks around the transmitter with open
/// corridors, legitimate receiver in line of sight at 60 m.
Scene demo_scene(int nx = 120, int ny = 120);

/// Parses and validates a scene JSON document; throws std::runtime_error with
/// a human-readable message on malformed input.
Scene parse_scene(const std::string& json_text);

/// Canonical JSON form (fixed key order, 17-digit numbers); digest input.
std::string serialize_scene(const Scene& scene);

std::uint64_t scene_digest(const Scene& scene);

/// True when the open segment a-b passes through the interior of any obstacle.
bool segment_blocked(const Vec2& a, const Vec2& b, const std::vector<Rect>& obstacles);

/// Large-scale attenuation in dB at a point, selecting the line-of-sight or
/// blocked coefficient set by obstacle geometry. Throws std::domain_error at
/// the transmitter itself.
double path_loss(const Scene& scene, const Vec2& point);

/// Per-slot delivery probability at a point: exponential fading outage of the
/// mean SNR implied by the link budget, clipped into [kSuccessFloor, kSuccessCeil].
double success_probability(const Scene& scene, const Vec2& point);

struct SpatialMap {
    GridSpec grid;
    std::string quantity;
    std::string units;
    std::uint64_t scene_hash = 0;
    std::vector<double> values;  // row-major, row = iy

    double at(int ix, int iy) const { return values[std::size_t(iy) * grid.nx + ix]; }
};

struct GeofenceMaps {
    SpatialMap eve_success;
    SpatialMap cra;      // best achievable average metric per hypothetical position
    SpatialMap p_alpha;  // maximizing transmission probability per position
    long long holes = 0; // cells whose optimization failed (must stay 0)
};

/// Places the adversary at every cell center, keeps the legitimate channel
/// fixed from the scene, and optimizes the transmission policy pointwise.
GeofenceMaps build_maps(const Scene& scene, const SourceModel& src, Interval itv = {});

struct GeofenceContour {
    double threshold = 0.0;
    std::vector<std::vector<Vec2>> polylines;
    std::vector<bool> closed;          // one flag per polyline
    std::vector<std::uint8_t> inside_mask;  // per map cell: value < threshold
    int nx = 0, ny = 0;
};

/// Marching-squares level set of map = threshold over the cell-center lattice
/// with linear interpolation along lattice edges.
GeofenceContour extract_contour(const SpatialMap& map, double threshold);

/// CSV rows x,y,value over cell centers, row-major.
void write_map_csv(std::ostream& os, const SpatialMap& map);

/// Compact binary grid; layout documented in docs/formats.md.
void write_map_binary(std::ostream& os, const SpatialMap& map);

SpatialMap read_map_binary(std::istream& is);

/// GeoJSON FeatureCollection of LineString features in scene coordinates.
std::string contour_geojson(const GeofenceContour& contour);

}  // namespace cra
