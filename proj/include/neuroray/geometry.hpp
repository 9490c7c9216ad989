#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "neuroray/medium.hpp"

namespace neuroray {

// Geometry is two-dimensional: x runs along the array axis, h (or y) is the
// transverse coordinate. All lengths are in micrometres.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class ShapeKind { fusiform, spherical, pyramidal };

std::string_view to_string(ShapeKind kind);
std::optional<ShapeKind> parse_shape_kind(std::string_view name);

/// A neuron soma projected onto the propagation plane.
///
/// Fusiform: biconvex lens of transverse height h_c and axial thickness w_c,
/// both faces of curvature radius (h_c^2 + w_c^2) / (4 w_c).
/// Spherical: disk of radius r_c.
/// Pyramidal: isosceles triangle whose base (length w_c) lies along the axis
/// and whose apex points transversely, h_c above the base.
class CellShape {
 public:
  static CellShape fusiform(double height_um, double width_um);
  static CellShape spherical(double radius_um);
  static CellShape pyramidal(double height_um, double width_um);

  ShapeKind kind() const { return kind_; }
  bool is_radial() const { return kind_ != ShapeKind::pyramidal; }

  /// Transverse extent (2 r_c for a sphere).
  double height_um() const { return height_; }
  /// Axial extent (2 r_c for a sphere).
  double width_um() const { return width_; }
  /// Sphere radius, or the fusiform surface curvature radius. Throws for pyramidal.
  double radius_um() const;

  friend bool operator==(const CellShape&, const CellShape&) = default;

 private:
  CellShape(ShapeKind kind, double height, double width)
      : kind_(kind), height_(height), width_(width) {}

  ShapeKind kind_;
  double height_;
  double width_;
};

/// One-dimensional array of identical cells between a source plane (x = 0)
/// and a detector plane.
struct ArrayLayout {
  CellShape shape = CellShape::spherical(10.0);
  int n_cells = 0;
  double gap_um = 0.0;           // d_l, between consecutive cells
  double source_gap_um = 0.0;    // d_E, source plane to first cell
  double detector_gap_um = 0.0;  // d_R, last cell to detector plane

  void validate() const;

  double total_length_um() const;
  double cell_start_um(int index) const;
  double cell_end_um(int index) const { return cell_start_um(index) + shape.width_um(); }
};

struct AverageDistances {
  double in_cell_um = 0.0;        // aperture-averaged chord inside one cell
  double between_cells_um = 0.0;  // average gap path between consecutive cells
};

/// Closed-form aperture averages used by the aggregate path-loss model.
AverageDistances avg_distances(const CellShape& shape, double gap_um);

struct RayState {
  double x_um = 0.0;
  double h_um = 0.0;
  double theta_rad = 0.0;  // 0 is axis-parallel, positive towards +h
  double intensity_scale = 1.0;

  Vec2 position() const { return {x_um, h_um}; }
  Vec2 direction() const { return {std::cos(theta_rad), std::sin(theta_rad)}; }
};

enum class MediumTag { tissue, cell };

struct Segment {
  MediumTag medium = MediumTag::tissue;
  double length_um = 0.0;
};

enum class PathStatus { arrived, leaked, deviated };

std::string_view to_string(PathStatus status);

struct RayPath {
  std::vector<Segment> segments;
  PathStatus status = PathStatus::arrived;
  int loss_cell = -1;  // 0-based index of the cell where the ray was lost or left the line
  int cells_traversed = 0;
  double source_h_um = 0.0;
  RayState exit;                     // state at the detector plane, or where the ray was lost
  std::vector<RayState> cell_exits;  // outgoing state after each traversed cell
  std::vector<RayState> trace;       // source, entry/exit points, final point

  double length_um(MediumTag medium) const;
  bool reaches_detector_plane() const { return status != PathStatus::leaked; }
};

/// One refraction event, kept so Snell's law can be audited after the fact.
struct Refraction {
  Vec2 normal;  // unit, pointing against the incident direction
  Vec2 incident;
  Vec2 refracted;
  double n_in = 1.0;
  double n_out = 1.0;
};

/// Refracts unit direction `d` at a surface with unit normal `normal` (either
/// orientation). Returns nullopt on total internal reflection.
std::optional<Vec2> refract(Vec2 d, Vec2 normal, double n_in, double n_out);

enum class CrossingError { none, no_intersection, total_internal_reflection };

/// Result of sending an arbitrary ray through one cell.
struct CellCrossing {
  CrossingError error = CrossingError::none;
  Vec2 entry_point;
  Vec2 exit_point;
  Vec2 inside_direction;
  Vec2 exit_direction;
  double approach_um = 0.0;  // origin to entry point, through tissue
  double chord_um = 0.0;     // entry to exit point, inside the cell
  bool left_line = false;    // pyramidal ray that crossed the base instead of the exit face
  std::vector<Refraction> refractions;
};

/// Traces a ray from `origin` along unit `direction` through the cell whose
/// leading edge sits at `cell_start_um`. Works for any direction, so the
/// exit ray reversed retraces the entry.
CellCrossing cross_cell(const CellShape& shape, double cell_start_um, const MediaPair& media,
                        Vec2 origin, Vec2 direction);

/// Where an outgoing ray crosses the array axis (h = 0).
struct FocusPoint {
  double angle_rad = 0.0;
  double axial_um = 0.0;
};

struct CellTrace {
  CrossingError error = CrossingError::none;
  RayState outgoing;
  double chord_um = 0.0;
  double approach_um = 0.0;
  bool left_line = false;
  std::optional<FocusPoint> focus;  // radial shapes with a tilted outgoing ray
  std::vector<Refraction> refractions;
};

CellTrace trace_cell(const CellShape& shape, const MediaPair& media, const RayState& incoming,
                     double entry_x_um);

struct CellFocus {
  double illumination_radius_um = 0.0;  // half-span of in-line rays at the cell's exit plane
  std::optional<double> focus_angle_rad;
  std::optional<double> focus_distance_um;  // from the exit plane; negative is a virtual focus
  int rays_in_line = 0;
};

struct FocusReport {
  double source_radius_um = 0.0;
  std::vector<CellFocus> cells;  // stops at the last cell that still holds a ray
  double detector_radius_um = 0.0;
};

struct TraceResult {
  std::vector<RayPath> paths;
  FocusReport focus;

  std::size_t count(PathStatus status) const;
  /// Number of cells the last in-line ray crossed, or nullopt while some ray
  /// still runs the full line.
  std::optional<int> bundle_exit_cells() const;
};

/// K equal-intensity axis-parallel rays at x = 0, cell-centred across the
/// shape's transverse extent. K odd puts one ray on the axis.
std::vector<RayState> collimated_bundle(const CellShape& shape, std::size_t k);

TraceResult trace_array(const ArrayLayout& layout, const MediaPair& media,
                        std::span<const RayState> bundle);

}  // namespace neuroray
