#include "neuroray/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace neuroray {

using nlohmann::json;

namespace {

std::string join_messages(const std::vector<Violation>& violations) {
  std::string text = "invalid scenario";
  for (const Violation& v : violations) text += "; " + v.field + ": " + v.message;
  return text;
}

// Walks one JSON object, copying typed values and recording every problem.
class Reader {
 public:
  Reader(const json& node, std::string prefix, std::vector<Violation>& out)
      : node_(node), prefix_(std::move(prefix)), out_(out) {
    if (!node_.is_object()) fail("", "expected an object");
  }

  ~Reader() {
    if (!node_.is_object()) return;
    for (const auto& item : node_.items()) {
      if (!seen_.contains(item.key())) fail(item.key(), "unknown key");
    }
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return nullptr;
    return &node_.at(key);
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  void number(const std::string& key, double& dst) {
    const json* v = child(key);
    if (v == nullptr) return;
    if (!v->is_number()) return fail(key, "expected a number");
    dst = v->get<double>();
  }

  void optional_number(const std::string& key, std::optional<double>& dst) {
    const json* v = child(key);
    if (v == nullptr) return;
    if (v->is_null()) {
      dst.reset();
      return;
    }
    if (!v->is_number()) return fail(key, "expected a number");
    dst = v->get<double>();
  }

  void integer(const std::string& key, int& dst) {
    const json* v = child(key);
    if (v == nullptr) return;
    if (!v->is_number()) return fail(key, "expected an integer");
    const double d = v->get<double>();
    if (d != std::floor(d) || std::abs(d) > 1e9) return fail(key, "expected an integer");
    dst = static_cast<int>(d);
  }

  void boolean(const std::string& key, bool& dst) {
    const json* v = child(key);
    if (v == nullptr) return;
    if (!v->is_boolean()) return fail(key, "expected true or false");
    dst = v->get<bool>();
  }

  void string(const std::string& key, std::string& dst) {
    const json* v = child(key);
    if (v == nullptr) return;
    if (!v->is_string()) return fail(key, "expected a string");
    dst = v->get<std::string>();
  }

  void fail(const std::string& key, std::string message) {
    out_.push_back({key.empty() ? prefix_ : path(key), std::move(message)});
  }

 private:
  const json& node_;
  std::string prefix_;
  std::vector<Violation>& out_;
  std::set<std::string> seen_;
};

void check_positive(std::vector<Violation>& out, const std::string& field, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) out.push_back({field, "must be positive"});
}

void check_non_negative(std::vector<Violation>& out, const std::string& field, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) out.push_back({field, "must be non-negative"});
}

void check_medium(std::vector<Violation>& out, const std::string& which, const Medium& m) {
  if (!(m.n >= 1.0) || !std::isfinite(m.n)) out.push_back({"media.n_" + which, "must be >= 1"});
  check_positive(out, "media.mu_a_" + which + "_per_mm", m.mu_a_per_mm);
  check_positive(out, "media.mu_s_prime_" + which + "_per_mm", m.mu_s_prime_per_mm);
}

double shape_width(const ShapeConfig& s) {
  return s.kind == ShapeKind::spherical ? 2.0 * s.r_c_um : s.w_c_um;
}

void set_path(json& doc, const std::string& key, json value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ScenarioError({{key, "malformed key"}});
    if (node->is_null()) *node = json::object();  // missing parents are created
    if (!node->is_object()) throw ScenarioError({{key, "parent is not an object"}});
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      // The detector gap has two spellings; setting one drops the other.
      if (key.rfind("layout.", 0) == 0) {
        if (part == "d_R_um") node->erase("total_distance_um");
        if (part == "total_distance_um") node->erase("d_R_um");
      }
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<Violation> violations)
    : InvalidArgument(join_messages(violations)), violations_(std::move(violations)) {}

bool operator==(const Scenario& a, const Scenario& b) {
  auto media_eq = [](const Medium& x, const Medium& y) {
    return x.n == y.n && x.mu_a_per_mm == y.mu_a_per_mm &&
           x.mu_s_prime_per_mm == y.mu_s_prime_per_mm;
  };
  const bool shape_eq =
      a.shape.kind == b.shape.kind &&
      (a.shape.kind == ShapeKind::spherical
           ? a.shape.r_c_um == b.shape.r_c_um
           : a.shape.h_c_um == b.shape.h_c_um && a.shape.w_c_um == b.shape.w_c_um);
  return shape_eq && a.layout == b.layout && media_eq(a.media.cell, b.media.cell) &&
         media_eq(a.media.tissue, b.media.tissue) && a.lambda_nm == b.lambda_nm &&
         a.pulse == b.pulse && a.rays == b.rays && a.cir_dt_fs == b.cir_dt_fs &&
         a.gamma_mode == b.gamma_mode && a.detector_extent_um == b.detector_extent_um &&
         a.deconvolution.eps_rel == b.deconvolution.eps_rel &&
         a.deconvolution.naive == b.deconvolution.naive && a.sweep == b.sweep &&
         a.output_dir == b.output_dir;
}

CellShape Scenario::cell_shape() const {
  switch (shape.kind) {
    case ShapeKind::fusiform: return CellShape::fusiform(shape.h_c_um, shape.w_c_um);
    case ShapeKind::spherical: return CellShape::spherical(shape.r_c_um);
    case ShapeKind::pyramidal: return CellShape::pyramidal(shape.h_c_um, shape.w_c_um);
  }
  throw InvalidArgument("unknown shape kind");
}

ArrayLayout Scenario::array_layout() const {
  ArrayLayout out;
  out.shape = cell_shape();
  out.n_cells = layout.n_cells;
  out.gap_um = layout.d_l_um;
  out.source_gap_um = layout.d_E_um;
  if (layout.d_R_um) {
    out.detector_gap_um = *layout.d_R_um;
  } else {
    out.detector_gap_um = 0.0;
    const double used = out.total_length_um();
    // Clamp rounding noise so an exactly filled line gives d_R = 0.
    const double rest = layout.total_distance_um.value_or(used) - used;
    out.detector_gap_um = std::abs(rest) < 1e-9 ? 0.0 : rest;
  }
  out.validate();
  return out;
}

ChannelOptions Scenario::channel_options() const {
  return {cir_dt_fs * 1e-15, gamma_mode, detector_half_extent_um()};
}

Scenario default_scenario(ShapeKind kind) {
  Scenario s;
  s.shape.kind = kind;
  switch (kind) {
    case ShapeKind::fusiform:
      s.detector_extent_um = 40.0;
      break;
    case ShapeKind::spherical:
      // 18 cells of diameter 20 with 5 um gaps fill 450 um exactly.
      s.shape.r_c_um = 10.0;
      s.detector_extent_um = 40.0;
      break;
    case ShapeKind::pyramidal:
      s.detector_extent_um = 30.0;
      break;
  }
  return s;
}

std::vector<Violation> validate(const Scenario& s) {
  std::vector<Violation> out;
  if (s.shape.kind == ShapeKind::spherical) {
    check_positive(out, "shape.r_c_um", s.shape.r_c_um);
  } else {
    check_positive(out, "shape.h_c_um", s.shape.h_c_um);
    check_positive(out, "shape.w_c_um", s.shape.w_c_um);
    if (s.shape.kind == ShapeKind::fusiform && s.shape.w_c_um > s.shape.h_c_um) {
      out.push_back({"shape.w_c_um", "fusiform width must not exceed its height"});
    }
  }

  const LayoutConfig& l = s.layout;
  if (l.n_cells < 0) out.push_back({"layout.n_cells", "must be non-negative"});
  check_non_negative(out, "layout.d_l_um", l.d_l_um);
  check_non_negative(out, "layout.d_E_um", l.d_E_um);
  if (l.d_R_um.has_value() == l.total_distance_um.has_value()) {
    out.push_back({"layout", "give exactly one of total_distance_um and d_R_um"});
  } else if (l.d_R_um) {
    check_non_negative(out, "layout.d_R_um", *l.d_R_um);
  } else if (out.empty()) {
    const double w = shape_width(s.shape);
    const double used = l.d_E_um + l.n_cells * w + std::max(l.n_cells - 1, 0) * l.d_l_um;
    if (!(*l.total_distance_um - used > -1e-9) || !std::isfinite(*l.total_distance_um)) {
      out.push_back({"layout.total_distance_um", "shorter than the source gap plus the cell line"});
    }
  }

  check_medium(out, "cell", s.media.cell);
  check_medium(out, "tissue", s.media.tissue);
  check_positive(out, "lambda_nm", s.lambda_nm);

  check_positive(out, "pulse.tau_fs", s.pulse.tau_fs);
  check_positive(out, "pulse.dt_fs", s.pulse.dt_fs);
  check_positive(out, "pulse.E0", s.pulse.e0);
  if (s.pulse.dt_fs >= s.pulse.tau_fs / 10.0) {
    out.push_back({"pulse.dt_fs", "must be below tau_fs / 10"});
  }
  if (!(s.pulse.span_fs >= 8.0 * s.pulse.tau_fs)) {
    out.push_back({"pulse.span_fs", "must be at least 8 tau_fs"});
  }

  if (s.rays < 1) out.push_back({"rays", "must be at least 1"});
  check_positive(out, "cir_dt_fs", s.cir_dt_fs);
  check_positive(out, "detector_extent_um", s.detector_extent_um);
  check_positive(out, "deconvolution.eps_rel", s.deconvolution.eps_rel);
  if (s.output_dir.empty()) out.push_back({"output_dir", "must not be empty"});

  if (s.sweep) {
    if (s.sweep->values.empty()) out.push_back({"sweep.values", "must not be empty"});
    for (std::size_t i = 0; i < s.sweep->values.size(); ++i) {
      const std::string where = "sweep.values[" + std::to_string(i) + "]";
      try {
        sweep_point(s, i);
      } catch (const ScenarioError& e) {
        for (const Violation& v : e.violations()) out.push_back({where, v.field + ": " + v.message});
        if (s.sweep->parameter.empty()) break;
      }
    }
  }
  return out;
}

json to_json(const Scenario& s) {
  json doc;
  json shape{{"kind", std::string(to_string(s.shape.kind))}};
  if (s.shape.kind == ShapeKind::spherical) {
    shape["r_c_um"] = s.shape.r_c_um;
  } else {
    shape["h_c_um"] = s.shape.h_c_um;
    shape["w_c_um"] = s.shape.w_c_um;
  }
  doc["shape"] = shape;

  json layout{{"n_cells", s.layout.n_cells}, {"d_l_um", s.layout.d_l_um}, {"d_E_um", s.layout.d_E_um}};
  if (s.layout.total_distance_um) layout["total_distance_um"] = *s.layout.total_distance_um;
  if (s.layout.d_R_um) layout["d_R_um"] = *s.layout.d_R_um;
  doc["layout"] = layout;

  doc["media"] = {{"n_cell", s.media.cell.n},
                  {"n_tissue", s.media.tissue.n},
                  {"mu_a_cell_per_mm", s.media.cell.mu_a_per_mm},
                  {"mu_s_prime_cell_per_mm", s.media.cell.mu_s_prime_per_mm},
                  {"mu_a_tissue_per_mm", s.media.tissue.mu_a_per_mm},
                  {"mu_s_prime_tissue_per_mm", s.media.tissue.mu_s_prime_per_mm}};
  doc["lambda_nm"] = s.lambda_nm;
  doc["pulse"] = {{"tau_fs", s.pulse.tau_fs},
                  {"dt_fs", s.pulse.dt_fs},
                  {"span_fs", s.pulse.span_fs},
                  {"E0", s.pulse.e0}};
  doc["rays"] = s.rays;
  doc["cir_dt_fs"] = s.cir_dt_fs;
  doc["gamma_mode"] = std::string(to_string(s.gamma_mode));
  doc["detector_extent_um"] = s.detector_extent_um;
  doc["deconvolution"] = {{"eps_rel", s.deconvolution.eps_rel}, {"naive", s.deconvolution.naive}};
  if (s.sweep) doc["sweep"] = {{"parameter", s.sweep->parameter}, {"values", s.sweep->values}};
  doc["output_dir"] = s.output_dir;
  return doc;
}

Scenario scenario_from_json(const json& doc) {
  std::vector<Violation> errors;
  Scenario s;
  {
    Reader root(doc, "", errors);
    if (!doc.is_object()) throw ScenarioError(errors);

    const json* shape = root.child("shape");
    if (shape == nullptr) {
      errors.push_back({"shape", "missing"});
    } else {
      Reader r(*shape, "shape", errors);
      std::string kind_name;
      r.string("kind", kind_name);
      const auto kind = parse_shape_kind(kind_name);
      if (!kind) {
        r.fail("kind", "expected fusiform, spherical or pyramidal");
      } else {
        s = default_scenario(*kind);
      }
      if (s.shape.kind == ShapeKind::spherical) {
        r.number("r_c_um", s.shape.r_c_um);
      } else {
        r.number("h_c_um", s.shape.h_c_um);
        r.number("w_c_um", s.shape.w_c_um);
      }
    }

    if (const json* layout = root.child("layout")) {
      Reader r(*layout, "layout", errors);
      r.integer("n_cells", s.layout.n_cells);
      r.number("d_l_um", s.layout.d_l_um);
      r.number("d_E_um", s.layout.d_E_um);
      if (r.has("d_R_um") || r.has("total_distance_um")) {
        s.layout.total_distance_um.reset();
        s.layout.d_R_um.reset();
      }
      r.optional_number("total_distance_um", s.layout.total_distance_um);
      r.optional_number("d_R_um", s.layout.d_R_um);
    }

    if (const json* media = root.child("media")) {
      Reader r(*media, "media", errors);
      r.number("n_cell", s.media.cell.n);
      r.number("n_tissue", s.media.tissue.n);
      r.number("mu_a_cell_per_mm", s.media.cell.mu_a_per_mm);
      r.number("mu_s_prime_cell_per_mm", s.media.cell.mu_s_prime_per_mm);
      r.number("mu_a_tissue_per_mm", s.media.tissue.mu_a_per_mm);
      r.number("mu_s_prime_tissue_per_mm", s.media.tissue.mu_s_prime_per_mm);
    }

    root.number("lambda_nm", s.lambda_nm);

    if (const json* pulse = root.child("pulse")) {
      Reader r(*pulse, "pulse", errors);
      r.number("tau_fs", s.pulse.tau_fs);
      r.number("dt_fs", s.pulse.dt_fs);
      r.number("span_fs", s.pulse.span_fs);
      r.number("E0", s.pulse.e0);
    }

    root.integer("rays", s.rays);
    root.number("cir_dt_fs", s.cir_dt_fs);

    std::string gamma = std::string(to_string(s.gamma_mode));
    root.string("gamma_mode", gamma);
    if (const auto mode = parse_gamma_mode(gamma)) {
      s.gamma_mode = *mode;
    } else {
      root.fail("gamma_mode", "expected per-path or aggregate");
    }

    root.number("detector_extent_um", s.detector_extent_um);

    if (const json* dec = root.child("deconvolution")) {
      Reader r(*dec, "deconvolution", errors);
      r.number("eps_rel", s.deconvolution.eps_rel);
      r.boolean("naive", s.deconvolution.naive);
    }

    if (const json* sweep = root.child("sweep")) {
      Reader r(*sweep, "sweep", errors);
      SweepConfig cfg;
      r.string("parameter", cfg.parameter);
      if (cfg.parameter.empty()) r.fail("parameter", "missing");
      if (const json* values = r.child("values")) {
        if (!values->is_array()) {
          r.fail("values", "expected an array of numbers");
        } else {
          for (const json& v : *values) {
            if (!v.is_number()) {
              r.fail("values", "expected an array of numbers");
              break;
            }
            cfg.values.push_back(v.get<double>());
          }
        }
      }
      s.sweep = cfg;
    }

    root.string("output_dir", s.output_dir);
  }  // readers flag unknown keys on scope exit

  if (!errors.empty()) throw ScenarioError(errors);
  std::vector<Violation> violations = validate(s);
  if (!violations.empty()) throw ScenarioError(violations);
  return s;
}

json read_scenario_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ScenarioError({{"", std::string("malformed JSON: ") + e.what()}});
  }
}

Scenario sweep_point(const Scenario& scenario, std::size_t index) {
  if (!scenario.sweep || index >= scenario.sweep->values.size()) {
    throw InvalidArgument("sweep point out of range");
  }
  json doc = to_json(scenario);
  doc.erase("sweep");
  set_path(doc, scenario.sweep->parameter, scenario.sweep->values[index]);
  return scenario_from_json(doc);
}

void apply_override(json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ScenarioError({{std::string(assignment), "override must be key=value"}});
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  set_path(doc, key, std::move(value));
}

}  // namespace neuroray
