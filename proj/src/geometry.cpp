#include "neuroray/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <string>

#include "neuroray/error.hpp"

namespace neuroray {

namespace {

constexpr double kOnSurface = 1e-9;   // um; origin this close to a boundary counts as on it
constexpr double kMinSegment = 1e-12;  // um; shorter ledger entries are dropped

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

// Convex cell boundary piece: a disk or a half-plane. The cell is the
// intersection of its pieces.
struct Boundary {
  enum class Kind { disk, half_plane } kind;
  Vec2 point;      // disk centre, or a point on the line
  Vec2 normal{};   // outward unit normal (half-plane only)
  double radius = 0.0;
  bool optical = true;  // false: crossing it leaves the line without refraction
};

// Parameter interval [enter, leave] of the ray inside one boundary piece.
struct Span {
  double enter = -std::numeric_limits<double>::infinity();
  double leave = std::numeric_limits<double>::infinity();
  bool empty = false;
};

Span span_of(const Boundary& b, Vec2 p, Vec2 d) {
  Span s;
  if (b.kind == Boundary::Kind::disk) {
    const Vec2 o = p - b.point;
    const double half_b = dot(o, d);
    const double c = dot(o, o) - b.radius * b.radius;
    const double disc = half_b * half_b - c;
    if (disc <= 0.0) {
      s.empty = true;
      return s;
    }
    const double root = std::sqrt(disc);
    // Numerically stable pair of roots.
    const double q = half_b > 0.0 ? -half_b - root : -half_b + root;
    double t0 = q;
    double t1 = q != 0.0 ? c / q : -q;
    if (t0 > t1) std::swap(t0, t1);
    s.enter = t0;
    s.leave = t1;
    return s;
  }
  const double den = dot(b.normal, d);
  const double num = dot(b.normal, p - b.point);
  if (den == 0.0) {
    if (num > 0.0) s.empty = true;
    return s;
  }
  const double t = -num / den;
  if (den < 0.0) {
    s.enter = t;
  } else {
    s.leave = t;
  }
  return s;
}

Vec2 outward_normal(const Boundary& b, Vec2 at) {
  if (b.kind == Boundary::Kind::disk) {
    const Vec2 r = at - b.point;
    return (1.0 / norm(r)) * r;
  }
  return b.normal;
}

std::vector<Boundary> boundaries_of(const CellShape& shape, double start) {
  const double h = shape.height_um();
  const double w = shape.width_um();
  switch (shape.kind()) {
    case ShapeKind::spherical: {
      const double r = w / 2.0;
      return {Boundary{Boundary::Kind::disk, {start + r, 0.0}, {}, r, true}};
    }
    case ShapeKind::fusiform: {
      const double r = shape.radius_um();
      // Upstream face belongs to the disk centred downstream, and vice versa.
      return {Boundary{Boundary::Kind::disk, {start + r, 0.0}, {}, r, true},
              Boundary{Boundary::Kind::disk, {start + w - r, 0.0}, {}, r, true}};
    }
    case ShapeKind::pyramidal: {
      const Vec2 left{start, -h / 2.0};
      const Vec2 right{start + w, -h / 2.0};
      const Vec2 apex{start + w / 2.0, h / 2.0};
      auto face = [](Vec2 a, Vec2 b, bool optical) {
        const Vec2 e = b - a;
        // Vertices run clockwise, so (-e.y, e.x) points out of the triangle.
        const Vec2 n = (1.0 / norm(e)) * Vec2{-e.y, e.x};
        return Boundary{Boundary::Kind::half_plane, a, n, 0.0, optical};
      };
      return {face(left, apex, true), face(apex, right, true), face(right, left, false)};
    }
  }
  return {};
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::fusiform:
      return "fusiform";
    case ShapeKind::spherical:
      return "spherical";
    case ShapeKind::pyramidal:
      return "pyramidal";
  }
  return "unknown";
}

std::optional<ShapeKind> parse_shape_kind(std::string_view name) {
  if (name == "fusiform") return ShapeKind::fusiform;
  if (name == "spherical") return ShapeKind::spherical;
  if (name == "pyramidal") return ShapeKind::pyramidal;
  return std::nullopt;
}

std::string_view to_string(PathStatus status) {
  switch (status) {
    case PathStatus::arrived:
      return "arrived";
    case PathStatus::leaked:
      return "leaked";
    case PathStatus::deviated:
      return "deviated";
  }
  return "unknown";
}

CellShape CellShape::fusiform(double height_um, double width_um) {
  require_positive(height_um, "fusiform h_c");
  require_positive(width_um, "fusiform w_c");
  if (width_um > height_um) {
    throw InvalidArgument("fusiform w_c must not exceed h_c");
  }
  return {ShapeKind::fusiform, height_um, width_um};
}

CellShape CellShape::spherical(double radius_um) {
  require_positive(radius_um, "spherical r_c");
  return {ShapeKind::spherical, 2.0 * radius_um, 2.0 * radius_um};
}

CellShape CellShape::pyramidal(double height_um, double width_um) {
  require_positive(height_um, "pyramidal h_c");
  require_positive(width_um, "pyramidal w_c");
  return {ShapeKind::pyramidal, height_um, width_um};
}

double CellShape::radius_um() const {
  switch (kind_) {
    case ShapeKind::spherical:
      return width_ / 2.0;
    case ShapeKind::fusiform:
      return (height_ * height_ + width_ * width_) / (4.0 * width_);
    case ShapeKind::pyramidal:
      break;
  }
  throw InvalidArgument("pyramidal cells have no curvature radius");
}

void ArrayLayout::validate() const {
  if (n_cells < 0) throw InvalidArgument("n_cells must be >= 0");
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument(std::string(what) + " must be >= 0");
    }
  };
  nonneg(gap_um, "d_l");
  nonneg(source_gap_um, "d_E");
  nonneg(detector_gap_um, "d_R");
}

double ArrayLayout::total_length_um() const {
  const double n = static_cast<double>(n_cells);
  return source_gap_um + n * shape.width_um() + std::max(n - 1.0, 0.0) * gap_um + detector_gap_um;
}

double ArrayLayout::cell_start_um(int index) const {
  return source_gap_um + static_cast<double>(index) * (shape.width_um() + gap_um);
}

AverageDistances avg_distances(const CellShape& shape, double gap_um) {
  using std::numbers::pi;
  const double h = shape.height_um();
  const double w = shape.width_um();
  switch (shape.kind()) {
    case ShapeKind::fusiform: {
      const double r = shape.radius_um();
      const double s = std::sqrt(3.0 * r * r + 2.0 * h * r - h * h);
      const double a = std::asin((r - h) / (2.0 * r));
      const double k = 2.0 * pi + std::sqrt(27.0);
      const double in_cell =
          (6.0 * h * w - 12.0 * r * r * a + 3.0 * (h - r) * s + k * r * r - 12.0 * h * r) /
          (6.0 * h);
      const double between =
          (-6.0 * h * w + 12.0 * r * r * a + (3.0 * r - 3.0 * h) * s - k * r * r + 24.0 * h * r) /
          (12.0 * h);
      return {in_cell, gap_um + between};
    }
    case ShapeKind::spherical: {
      const double r = shape.radius_um();
      return {pi * r / 2.0, gap_um + (1.0 - pi / 4.0) * r};
    }
    case ShapeKind::pyramidal:
      return {w / 2.0, gap_um + w / 4.0};
  }
  return {};
}

double RayPath::length_um(MediumTag medium) const {
  double total = 0.0;
  for (const Segment& s : segments) {
    if (s.medium == medium) total += s.length_um;
  }
  return total;
}

std::optional<Vec2> refract(Vec2 d, Vec2 normal, double n_in, double n_out) {
  if (dot(normal, d) > 0.0) normal = -normal;
  const double cos_i = -dot(normal, d);
  const double eta = n_in / n_out;
  const double k = 1.0 - eta * eta * (1.0 - cos_i * cos_i);
  if (k < 0.0) return std::nullopt;
  return Vec2{eta * d.x + (eta * cos_i - std::sqrt(k)) * normal.x,
              eta * d.y + (eta * cos_i - std::sqrt(k)) * normal.y};
}

CellCrossing cross_cell(const CellShape& shape, double cell_start_um, const MediaPair& media,
                        Vec2 origin, Vec2 direction) {
  CellCrossing out;
  const std::vector<Boundary> pieces = boundaries_of(shape, cell_start_um);

  // Entry: the latest entering parameter over all pieces (Cyrus-Beck).
  double enter = -std::numeric_limits<double>::infinity();
  double leave = std::numeric_limits<double>::infinity();
  std::size_t entry_piece = pieces.size();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Span s = span_of(pieces[i], origin, direction);
    if (s.empty) {
      out.error = CrossingError::no_intersection;
      return out;
    }
    if (s.enter > enter) {
      enter = s.enter;
      entry_piece = i;
    }
    leave = std::min(leave, s.leave);
  }
  if (entry_piece == pieces.size() || enter >= leave || enter < -kOnSurface ||
      !pieces[entry_piece].optical) {
    out.error = CrossingError::no_intersection;
    return out;
  }
  enter = std::max(enter, 0.0);
  out.approach_um = enter;
  out.entry_point = origin + enter * direction;

  const Boundary& in_piece = pieces[entry_piece];
  const Vec2 n_entry = outward_normal(in_piece, out.entry_point);
  const auto inside = refract(direction, n_entry, media.tissue.n, media.cell.n);
  if (!inside) {
    out.error = CrossingError::total_internal_reflection;
    return out;
  }
  Vec2 in_dir = *inside;
  in_dir = (1.0 / norm(in_dir)) * in_dir;
  out.refractions.push_back(
      {dot(n_entry, direction) > 0.0 ? -n_entry : n_entry, direction, in_dir, media.tissue.n,
       media.cell.n});
  out.inside_direction = in_dir;

  // Exit: the earliest leaving parameter from inside.
  double exit_t = std::numeric_limits<double>::infinity();
  std::size_t exit_piece = pieces.size();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Span s = span_of(pieces[i], out.entry_point, in_dir);
    if (s.empty) continue;
    if (s.leave > kOnSurface && s.leave < exit_t) {
      exit_t = s.leave;
      exit_piece = i;
    }
  }
  if (exit_piece == pieces.size()) {
    out.error = CrossingError::no_intersection;
    return out;
  }
  out.chord_um = exit_t;
  out.exit_point = out.entry_point + exit_t * in_dir;

  const Boundary& out_piece = pieces[exit_piece];
  if (!out_piece.optical) {
    out.left_line = true;
    out.exit_direction = in_dir;
    return out;
  }
  const Vec2 n_exit = outward_normal(out_piece, out.exit_point);
  const auto outgoing = refract(in_dir, n_exit, media.cell.n, media.tissue.n);
  if (!outgoing) {
    out.error = CrossingError::total_internal_reflection;
    return out;
  }
  Vec2 out_dir = (1.0 / norm(*outgoing)) * *outgoing;
  out.refractions.push_back({dot(n_exit, in_dir) > 0.0 ? -n_exit : n_exit, in_dir, out_dir,
                             media.cell.n, media.tissue.n});
  out.exit_direction = out_dir;
  return out;
}

CellTrace trace_cell(const CellShape& shape, const MediaPair& media, const RayState& incoming,
                     double entry_x_um) {
  CellTrace result;
  const CellCrossing c =
      cross_cell(shape, entry_x_um, media, incoming.position(), incoming.direction());
  result.error = c.error;
  result.refractions = c.refractions;
  if (c.error != CrossingError::none) return result;

  result.chord_um = c.chord_um;
  result.approach_um = c.approach_um;
  result.left_line = c.left_line;
  result.outgoing = RayState{c.exit_point.x, c.exit_point.y,
                             std::atan2(c.exit_direction.y, c.exit_direction.x),
                             incoming.intensity_scale};
  if (shape.is_radial() && c.exit_direction.y != 0.0) {
    const double slope = c.exit_direction.y / c.exit_direction.x;
    result.focus = FocusPoint{result.outgoing.theta_rad, c.exit_point.x - c.exit_point.y / slope};
  }
  return result;
}

std::size_t TraceResult::count(PathStatus status) const {
  return static_cast<std::size_t>(
      std::count_if(paths.begin(), paths.end(), [&](const RayPath& p) { return p.status == status; }));
}

std::optional<int> TraceResult::bundle_exit_cells() const {
  int deepest = 0;
  for (const RayPath& p : paths) {
    if (p.status == PathStatus::arrived) return std::nullopt;
    deepest = std::max(deepest, p.cells_traversed);
  }
  return deepest;
}

std::vector<RayState> collimated_bundle(const CellShape& shape, std::size_t k) {
  if (k == 0) throw InvalidArgument("bundle needs at least one ray");
  const double aperture = shape.height_um();
  std::vector<RayState> rays(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    rays[i] = RayState{0.0, aperture * (u - 0.5), 0.0, 1.0};
  }
  return rays;
}

namespace {

void push_segment(std::vector<Segment>& ledger, MediumTag medium, double length) {
  if (length <= kMinSegment) return;
  if (!ledger.empty() && ledger.back().medium == medium) {
    ledger.back().length_um += length;
    return;
  }
  ledger.push_back({medium, length});
}

double height_at(const RayState& s, double x) {
  return s.h_um + (x - s.x_um) * std::tan(s.theta_rad);
}

RayPath trace_one(const ArrayLayout& layout, const MediaPair& media, const RayState& start) {
  RayPath path;
  path.source_h_um = start.h_um;
  path.trace.push_back(start);
  RayState state = start;

  auto lose = [&](PathStatus status, int cell) {
    path.status = status;
    path.loss_cell = cell;
  };

  for (int i = 0; i < layout.n_cells; ++i) {
    const CellTrace t = trace_cell(layout.shape, media, state, layout.cell_start_um(i));
    if (t.error == CrossingError::no_intersection) {
      lose(layout.shape.is_radial() ? PathStatus::leaked : PathStatus::deviated, i);
      break;
    }
    if (t.error == CrossingError::total_internal_reflection) {
      lose(PathStatus::leaked, i);
      break;
    }
    push_segment(path.segments, MediumTag::tissue, t.approach_um);
    push_segment(path.segments, MediumTag::cell, t.chord_um);
    const Vec2 d = state.direction();
    path.trace.push_back(RayState{state.x_um + t.approach_um * d.x, state.h_um + t.approach_um * d.y,
                                  state.theta_rad, state.intensity_scale});
    path.trace.push_back(t.outgoing);
    state = t.outgoing;
    if (t.left_line) {
      lose(PathStatus::deviated, i);
      break;
    }
    path.cells_traversed = i + 1;
    path.cell_exits.push_back(state);
    if (!(std::abs(state.theta_rad) < std::numbers::pi / 2.0)) {
      lose(PathStatus::leaked, i);
      break;
    }
  }

  if (path.status != PathStatus::leaked) {
    const double detector = layout.total_length_um();
    const Vec2 d = state.direction();
    const double run = (detector - state.x_um) / d.x;
    if (!(d.x > 0.0) || run < -kOnSurface) {
      lose(PathStatus::leaked, path.loss_cell < 0 ? layout.n_cells : path.loss_cell);
    } else {
      push_segment(path.segments, MediumTag::tissue, std::max(run, 0.0));
      state = RayState{detector, state.h_um + std::max(run, 0.0) * d.y, state.theta_rad,
                       state.intensity_scale};
      path.trace.push_back(state);
    }
  }
  path.exit = state;
  return path;
}

double half_span(const std::vector<double>& hs) {
  if (hs.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(hs.begin(), hs.end());
  return (*hi - *lo) / 2.0;
}

}  // namespace

TraceResult trace_array(const ArrayLayout& layout, const MediaPair& media,
                        std::span<const RayState> bundle) {
  layout.validate();
  media.validate();
  if (bundle.empty()) throw InvalidArgument("bundle needs at least one ray");

  TraceResult result;
  result.paths.reserve(bundle.size());
  for (const RayState& ray : bundle) result.paths.push_back(trace_one(layout, media, ray));

  std::vector<double> hs;
  for (const RayState& ray : bundle) hs.push_back(ray.h_um);
  result.focus.source_radius_um = half_span(hs);

  for (int i = 0; i < layout.n_cells; ++i) {
    const double plane = layout.cell_end_um(i);
    hs.clear();
    const RayPath* marginal = nullptr;
    double marginal_h = -1.0;
    for (const RayPath& p : result.paths) {
      if (p.cells_traversed <= i) continue;
      const double h = height_at(p.cell_exits[static_cast<std::size_t>(i)], plane);
      hs.push_back(h);
      if (std::abs(h) > marginal_h) {
        marginal_h = std::abs(h);
        marginal = &p;
      }
    }
    if (hs.empty()) break;
    CellFocus cell;
    cell.rays_in_line = static_cast<int>(hs.size());
    cell.illumination_radius_um = half_span(hs);
    if (layout.shape.is_radial() && marginal != nullptr) {
      const RayState& s = marginal->cell_exits[static_cast<std::size_t>(i)];
      if (std::sin(s.theta_rad) != 0.0) {
        const double h = height_at(s, plane);
        cell.focus_angle_rad = s.theta_rad;
        cell.focus_distance_um = -h / std::tan(s.theta_rad);
      }
    }
    result.focus.cells.push_back(cell);
  }

  hs.clear();
  for (const RayPath& p : result.paths) {
    if (p.reaches_detector_plane()) hs.push_back(p.exit.h_um);
  }
  result.focus.detector_radius_um = half_span(hs);
  return result;
}

}  // namespace neuroray
