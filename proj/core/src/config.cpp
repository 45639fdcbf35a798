#include "tumorsynth/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace tumorsynth {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("must be an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::config, (path_.empty() ? std::string("config") : path_) + ": " + msg);
  }

  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(std::string(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(std::string(key) + " must be an integer");
      out = v->get<int>();
    }
  }

  void integer(const char* key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(std::string(key) + " must be an integer");
      out = v->get<std::int64_t>();
    }
  }

  void seed(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                       v->get<std::int64_t>() < 0)) {
        fail(std::string(key) + " must be a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(std::string(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(std::string(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void range(const char* key, std::pair<double, double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        fail(std::string(key) + " must be [lo, hi]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      if (!(out.first <= out.second)) fail(std::string(key) + " needs lo <= hi");
    }
  }

  std::string child_path(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) fail("unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_vessel(Section s, VesselParams& v) {
  std::string mode = v.mode == VesselMode::relative ? "relative" : "absolute";
  s.string("mode", mode);
  if (mode == "relative") {
    v.mode = VesselMode::relative;
  } else if (mode == "absolute") {
    v.mode = VesselMode::absolute;
  } else {
    s.fail("mode must be 'relative' or 'absolute'");
  }
  s.number("k_sigma", v.k_sigma);
  s.number("absolute_hu", v.absolute_hu);
  s.integer("min_component_voxels", v.min_component_voxels);
  s.finish();
}

void parse_placement(Section s, PlacementParams& p) {
  s.integer("max_attempts", p.max_attempts);
  s.integer("vessel_safety_margin_voxels", p.vessel_safety_margin_voxels);
  s.number("containment", p.containment);
  s.finish();
}

void parse_shape(Section s, ShapeDefaults& p) {
  s.number("sigma_d_min", p.sigma_d_min);
  s.number("sigma_d_max", p.sigma_d_max);
  s.number("sigma_d_per_radius", p.sigma_d_per_radius);
  s.integer("control_spacing", p.control_spacing);
  s.number("smooth_sigma", p.smooth_sigma);
  s.integer("max_deform_attempts", p.max_deform_attempts);
  s.finish();
}

void parse_texture(Section s, TextureDefaults& t) {
  s.integer("coarse_factor", t.coarse_factor);
  s.number("blur_sigma", t.blur_sigma);
  s.number("mu_offset_min", t.mu_offset_min);
  s.number("mu_offset_max", t.mu_offset_max);
  if (const json* v = s.find("sigma_g")) {
    if (v->is_null()) {
      t.sigma_g.reset();
    } else if (v->is_number()) {
      t.sigma_g = v->get<double>();
    } else {
      s.fail("sigma_g must be a number or null");
    }
  }
  s.finish();
}

void parse_post(Section s, PostDefaults& p) {
  s.number("mass_effect_strength", p.mass_effect_strength);
  s.number("influence_factor", p.influence_factor);
  s.integer("capsule_width_voxels", p.capsule_width_voxels);
  s.number("capsule_delta_hu", p.capsule_delta_hu);
  s.number("edge_blend_sigma", p.edge_blend_sigma);
  s.finish();
}

std::vector<SizeClass> parse_size_classes(const json& j) {
  if (!j.is_array()) throw Error(Errc::config, "size_classes must be an array");
  std::vector<SizeClass> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Section s(j[i], "size_classes[" + std::to_string(i) + "]");
    SizeClass c;
    s.string("name", c.name);
    s.number("lo_mm", c.lo_mm);
    s.number("hi_mm", c.hi_mm);
    s.number("eccentricity_cap", c.eccentricity_cap);
    s.boolean("closed_upper", c.closed_upper);
    s.finish();
    out.push_back(c);
  }
  return out;
}

void parse_stream(Section s, StreamDefaults& st) {
  s.integer("tumors_min", st.tumors_min);
  s.integer("tumors_max", st.tumors_max);
  s.integer("max_item_attempts", st.max_item_attempts);
  if (const json* mix = s.find("class_mix")) {
    if (!mix->is_object()) s.fail("class_mix must be an object of probabilities");
    st.class_mix.clear();
    for (const auto& [name, p] : mix->items()) {
      if (!p.is_number()) s.fail("class_mix." + name + " must be a number");
      st.class_mix.emplace_back(name, p.get<double>());
    }
  }
  s.finish();
}

void parse_validation(Section s, ValidationDefaults& v) {
  if (const json* c = s.find("classes")) {
    if (!c->is_array()) s.fail("classes must be an array of size-class names");
    v.classes.clear();
    for (const auto& name : *c) {
      if (!name.is_string()) s.fail("classes must contain strings");
      v.classes.push_back(name.get<std::string>());
    }
  }
  s.finish();
}

void parse_metrics(Section s, EvalOptions& m) {
  s.number("overlap_frac", m.overlap_frac);
  s.number("ci_level", m.ci_level);
  s.integer("bootstrap_resamples", m.bootstrap_resamples);
  s.seed("seed", m.seed);
  s.finish();
}

void parse_study(Section s, StudyConfig& st) {
  s.integer("trials", st.trials);
  s.integer("checkpoints", st.checkpoints);
  s.integer("cadence", st.cadence);
  if (const json* n = s.find("n_val")) {
    if (!n->is_array()) s.fail("n_val must be an array of integers");
    st.n_val.clear();
    for (const auto& v : *n) {
      if (!v.is_number_integer()) s.fail("n_val must contain integers");
      st.n_val.push_back(v.get<int>());
    }
  }
  s.number("noise_sd", st.noise_sd);
  s.number("noise_scale", st.noise_scale);
  s.seed("seed", st.seed);
  if (const json* c = s.find("curve")) {
    Section cs(*c, s.child_path("curve"));
    cs.range("peak", st.curve.peak);
    cs.range("tau", st.curve.tau);
    cs.range("onset_ratio", st.curve.onset_ratio);
    cs.range("decline", st.curve.decline);
    cs.finish();
  }
  s.finish();
}

ojson range_json(const std::pair<double, double>& r) { return ojson::array({r.first, r.second}); }

void require_class(const Config& c, const std::string& name, const std::string& where) {
  for (const auto& sc : c.size_classes) {
    if (sc.name == name) return;
  }
  throw Error(Errc::config, where + ": unknown size class '" + name + "'");
}

}  // namespace

void validate(const Config& c) {
  auto bad = [](const std::string& m) { throw Error(Errc::config, m); };
  if (c.schema_version != kConfigSchemaVersion) {
    bad("unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (!(c.vessel.k_sigma > 0.0)) bad("vessel.k_sigma must be > 0");
  if (c.vessel.min_component_voxels < 0) bad("vessel.min_component_voxels must be >= 0");
  if (c.placement.max_attempts < 1) bad("placement.max_attempts must be >= 1");
  if (c.placement.vessel_safety_margin_voxels < 0) bad("placement.vessel_safety_margin_voxels must be >= 0");
  if (!(c.placement.containment > 0.0 && c.placement.containment <= 1.0)) {
    bad("placement.containment must lie in (0, 1]");
  }
  if (!(c.shape.sigma_d_min >= 0.0 && c.shape.sigma_d_min <= c.shape.sigma_d_max)) {
    bad("shape.sigma_d_min must lie in [0, sigma_d_max]");
  }
  if (c.shape.sigma_d_per_radius < 0.0) bad("shape.sigma_d_per_radius must be >= 0");
  if (c.shape.control_spacing < 2) bad("shape.control_spacing must be >= 2");
  if (c.shape.smooth_sigma < 0.0) bad("shape.smooth_sigma must be >= 0");
  if (c.shape.max_deform_attempts < 1) bad("shape.max_deform_attempts must be >= 1");
  if (c.texture.coarse_factor < 1) bad("texture.coarse_factor must be >= 1");
  if (c.texture.blur_sigma < 0.0) bad("texture.blur_sigma must be >= 0");
  if (!(c.texture.mu_offset_min <= c.texture.mu_offset_max)) bad("texture.mu_offset_min must be <= mu_offset_max");
  if (c.texture.sigma_g && *c.texture.sigma_g < 0.0) bad("texture.sigma_g must be >= 0");
  if (!(c.post.mass_effect_strength >= 0.0 && c.post.mass_effect_strength <= 0.5)) {
    bad("post.mass_effect_strength must lie in [0, 0.5]");
  }
  if (!(c.post.influence_factor >= 1.0)) bad("post.influence_factor must be >= 1");
  if (c.post.capsule_width_voxels < 0) bad("post.capsule_width_voxels must be >= 0");
  if (c.post.edge_blend_sigma < 0.0) bad("post.edge_blend_sigma must be >= 0");
  validate(c.size_classes);
  if (c.stream.tumors_min < 1 || c.stream.tumors_max < c.stream.tumors_min) {
    bad("stream needs 1 <= tumors_min <= tumors_max");
  }
  if (c.stream.max_item_attempts < 1) bad("stream.max_item_attempts must be >= 1");
  double total = 0.0;
  for (const auto& [name, p] : c.stream.class_mix) {
    require_class(c, name, "stream.class_mix");
    if (!(p >= 0.0)) bad("stream.class_mix." + name + " must be >= 0");
    total += p;
  }
  if (c.stream.class_mix.empty() || std::abs(total - 1.0) > 1e-9) {
    bad("stream.class_mix must sum to 1");
  }
  if (c.validation.classes.empty()) bad("validation.classes must not be empty");
  for (const auto& name : c.validation.classes) require_class(c, name, "validation.classes");
  if (!(c.metrics.overlap_frac > 0.0 && c.metrics.overlap_frac <= 1.0)) {
    bad("metrics.overlap_frac must lie in (0, 1]");
  }
  if (!(c.metrics.ci_level > 0.0 && c.metrics.ci_level < 1.0)) bad("metrics.ci_level must lie in (0, 1)");
  if (c.metrics.bootstrap_resamples < 1) bad("metrics.bootstrap_resamples must be >= 1");
  if (c.study.trials < 1 || c.study.checkpoints < 1 || c.study.cadence < 1) {
    bad("study trials, checkpoints and cadence must be >= 1");
  }
  if (c.study.n_val.empty()) bad("study.n_val must not be empty");
  for (int n : c.study.n_val) {
    if (n < 1) bad("study.n_val entries must be >= 1");
  }
  if (c.study.noise_sd < 0.0 || c.study.noise_scale < 0.0) bad("study noise parameters must be >= 0");
}

Config config_from_json(const json& j) {
  Config c;
  Section root(j, "");
  const json* version = root.find("schema_version");
  if (!version) root.fail("schema_version is required");
  if (!version->is_number_integer()) root.fail("schema_version must be an integer");
  c.schema_version = version->get<int>();
  root.seed("seed", c.seed);
  if (const json* v = root.find("vessel")) parse_vessel(Section(*v, "vessel"), c.vessel);
  if (const json* v = root.find("placement")) parse_placement(Section(*v, "placement"), c.placement);
  if (const json* v = root.find("shape")) parse_shape(Section(*v, "shape"), c.shape);
  if (const json* v = root.find("texture")) parse_texture(Section(*v, "texture"), c.texture);
  if (const json* v = root.find("post")) parse_post(Section(*v, "post"), c.post);
  if (const json* v = root.find("size_classes")) c.size_classes = parse_size_classes(*v);
  if (const json* v = root.find("stream")) parse_stream(Section(*v, "stream"), c.stream);
  if (const json* v = root.find("validation")) parse_validation(Section(*v, "validation"), c.validation);
  if (const json* v = root.find("metrics")) parse_metrics(Section(*v, "metrics"), c.metrics);
  if (const json* v = root.find("study")) parse_study(Section(*v, "study"), c.study);
  root.finish();

  // Keep class_mix in size-class order so sampling does not depend on the
  // key order of the file.
  std::vector<std::pair<std::string, double>> ordered;
  for (const auto& sc : c.size_classes) {
    for (const auto& entry : c.stream.class_mix) {
      if (entry.first == sc.name) ordered.push_back(entry);
    }
  }
  if (ordered.size() != c.stream.class_mix.size()) {
    for (const auto& entry : c.stream.class_mix) require_class(c, entry.first, "stream.class_mix");
  }
  c.stream.class_mix = std::move(ordered);
  c.metrics.bins = c.size_classes;
  validate(c);
  return c;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

ojson to_json(const Config& c) {
  ojson j;
  j["schema_version"] = c.schema_version;
  j["seed"] = c.seed;
  j["vessel"] = {{"mode", c.vessel.mode == VesselMode::relative ? "relative" : "absolute"},
                 {"k_sigma", c.vessel.k_sigma},
                 {"absolute_hu", c.vessel.absolute_hu},
                 {"min_component_voxels", c.vessel.min_component_voxels}};
  j["placement"] = {{"max_attempts", c.placement.max_attempts},
                    {"vessel_safety_margin_voxels", c.placement.vessel_safety_margin_voxels},
                    {"containment", c.placement.containment}};
  j["shape"] = {{"sigma_d_min", c.shape.sigma_d_min},
                {"sigma_d_max", c.shape.sigma_d_max},
                {"sigma_d_per_radius", c.shape.sigma_d_per_radius},
                {"control_spacing", c.shape.control_spacing},
                {"smooth_sigma", c.shape.smooth_sigma},
                {"max_deform_attempts", c.shape.max_deform_attempts}};
  j["texture"] = {{"coarse_factor", c.texture.coarse_factor},
                  {"blur_sigma", c.texture.blur_sigma},
                  {"mu_offset_min", c.texture.mu_offset_min},
                  {"mu_offset_max", c.texture.mu_offset_max},
                  {"sigma_g", c.texture.sigma_g ? ojson(*c.texture.sigma_g) : ojson(nullptr)}};
  j["post"] = {{"mass_effect_strength", c.post.mass_effect_strength},
               {"influence_factor", c.post.influence_factor},
               {"capsule_width_voxels", c.post.capsule_width_voxels},
               {"capsule_delta_hu", c.post.capsule_delta_hu},
               {"edge_blend_sigma", c.post.edge_blend_sigma}};
  j["size_classes"] = ojson::array();
  for (const auto& s : c.size_classes) {
    j["size_classes"].push_back({{"name", s.name},
                                 {"lo_mm", s.lo_mm},
                                 {"hi_mm", s.hi_mm},
                                 {"eccentricity_cap", s.eccentricity_cap},
                                 {"closed_upper", s.closed_upper}});
  }
  ojson mix = ojson::object();
  for (const auto& [name, p] : c.stream.class_mix) mix[name] = p;
  j["stream"] = {{"tumors_min", c.stream.tumors_min},
                 {"tumors_max", c.stream.tumors_max},
                 {"max_item_attempts", c.stream.max_item_attempts},
                 {"class_mix", mix}};
  j["validation"] = {{"classes", c.validation.classes}};
  j["metrics"] = {{"overlap_frac", c.metrics.overlap_frac},
                  {"ci_level", c.metrics.ci_level},
                  {"bootstrap_resamples", c.metrics.bootstrap_resamples},
                  {"seed", c.metrics.seed}};
  j["study"] = {{"trials", c.study.trials},
                {"checkpoints", c.study.checkpoints},
                {"cadence", c.study.cadence},
                {"n_val", c.study.n_val},
                {"noise_sd", c.study.noise_sd},
                {"noise_scale", c.study.noise_scale},
                {"seed", c.study.seed},
                {"curve",
                 {{"peak", range_json(c.study.curve.peak)},
                  {"tau", range_json(c.study.curve.tau)},
                  {"onset_ratio", range_json(c.study.curve.onset_ratio)},
                  {"decline", range_json(c.study.curve.decline)}}}};
  return j;
}

ojson to_json(const TumorSpec& s) {
  ojson j;
  j["size_class"] = s.size_class;
  j["ellipsoid"] = {{"a", s.ellipsoid.a}, {"b", s.ellipsoid.b}, {"c", s.ellipsoid.c}};
  j["eccentricity_cap"] = s.eccentricity_cap;
  j["deform"] = {{"sigma_d", s.deform.sigma_d},
                 {"control_spacing", s.deform.control_spacing},
                 {"smooth_sigma", s.deform.smooth_sigma},
                 {"seed", s.deform.seed}};
  j["acceptance"] = {{"max_attempts", s.acceptance.max_attempts},
                     {"min_radius_mm", s.acceptance.min_radius_mm ? ojson(*s.acceptance.min_radius_mm)
                                                                  : ojson(nullptr)},
                     {"max_radius_mm", s.acceptance.max_radius_mm ? ojson(*s.acceptance.max_radius_mm)
                                                                  : ojson(nullptr)},
                     {"max_inclusive", s.acceptance.max_inclusive}};
  j["texture"] = {{"mu", s.texture.mu},
                  {"sigma_g", s.texture.sigma_g},
                  {"coarse_factor", s.texture.coarse_factor},
                  {"blur_sigma", s.texture.blur_sigma},
                  {"seed", s.texture.seed}};
  j["mass_effect_strength"] = s.mass_effect_strength;
  j["influence_factor"] = s.influence_factor;
  j["capsule_width_voxels"] = s.capsule_width_voxels;
  j["capsule_delta_hu"] = s.capsule_delta_hu;
  j["edge_blend_sigma"] = s.edge_blend_sigma;
  return j;
}

TumorSpec tumor_spec_from_json(const json& j) {
  TumorSpec s;
  Section root(j, "tumor");
  root.string("size_class", s.size_class);
  if (const json* e = root.find("ellipsoid")) {
    Section es(*e, "tumor.ellipsoid");
    es.number("a", s.ellipsoid.a);
    es.number("b", s.ellipsoid.b);
    es.number("c", s.ellipsoid.c);
    es.finish();
  }
  root.number("eccentricity_cap", s.eccentricity_cap);
  if (const json* d = root.find("deform")) {
    Section ds(*d, "tumor.deform");
    ds.number("sigma_d", s.deform.sigma_d);
    ds.integer("control_spacing", s.deform.control_spacing);
    ds.number("smooth_sigma", s.deform.smooth_sigma);
    ds.seed("seed", s.deform.seed);
    ds.finish();
  }
  if (const json* a = root.find("acceptance")) {
    Section as(*a, "tumor.acceptance");
    as.integer("max_attempts", s.acceptance.max_attempts);
    for (const char* key : {"min_radius_mm", "max_radius_mm"}) {
      auto& slot = std::string(key) == "min_radius_mm" ? s.acceptance.min_radius_mm
                                                      : s.acceptance.max_radius_mm;
      if (const json* v = as.find(key)) {
        if (v->is_number()) {
          slot = v->get<double>();
        } else if (!v->is_null()) {
          as.fail(std::string(key) + " must be a number or null");
        }
      }
    }
    as.boolean("max_inclusive", s.acceptance.max_inclusive);
    as.finish();
  }
  if (const json* t = root.find("texture")) {
    Section ts(*t, "tumor.texture");
    ts.number("mu", s.texture.mu);
    ts.number("sigma_g", s.texture.sigma_g);
    ts.integer("coarse_factor", s.texture.coarse_factor);
    ts.number("blur_sigma", s.texture.blur_sigma);
    ts.seed("seed", s.texture.seed);
    ts.finish();
  }
  root.number("mass_effect_strength", s.mass_effect_strength);
  root.number("influence_factor", s.influence_factor);
  root.integer("capsule_width_voxels", s.capsule_width_voxels);
  root.number("capsule_delta_hu", s.capsule_delta_hu);
  root.number("edge_blend_sigma", s.edge_blend_sigma);
  root.finish();
  validate(s);
  return s;
}

ojson to_json(const TumorRecord& r) {
  ojson j;
  j["spec"] = to_json(r.spec);
  j["offset"] = {r.offset.x, r.offset.y, r.offset.z};
  j["shape_dims"] = {r.shape_dims.nx, r.shape_dims.ny, r.shape_dims.nz};
  j["center_voxel"] = {r.center[0], r.center[1], r.center[2]};
  j["voxels"] = r.voxels;
  j["equivalent_radius_mm"] = r.equivalent_radius_mm;
  j["influence_radius_mm"] = r.influence_radius_mm;
  j["deform_seed_used"] = r.deform_seed_used;
  j["deform_attempts"] = r.deform_attempts;
  j["placement_seed"] = r.placement_seed;
  j["placement_attempts"] = r.placement_attempts;
  return j;
}

ojson to_json(const StudyResult& result) {
  ojson j;
  j["arms"] = ojson::array();
  for (const auto& arm : result.arms) {
    j["arms"].push_back({{"n_val", arm.n_val},
                         {"median_regret", arm.median},
                         {"mean_regret", arm.mean},
                         {"zero_regret_fraction", arm.zero_fraction},
                         {"regrets", arm.regrets}});
  }
  return j;
}

}  // namespace tumorsynth
