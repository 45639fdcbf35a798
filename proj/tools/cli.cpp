#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plot.hpp"
#include "tumorsynth/components.hpp"
#include "tumorsynth/config.hpp"
#include "tumorsynth/dataset.hpp"
#include "tumorsynth/hash.hpp"
#include "tumorsynth/metrics.hpp"
#include "tumorsynth/nifti.hpp"
#include "tumorsynth/phantom.hpp"
#include "tumorsynth/preprocess.hpp"
#include "tumorsynth/random.hpp"
#include "tumorsynth/selection.hpp"
#include "tumorsynth/shape.hpp"
#include "tumorsynth/texture.hpp"
#include "tumorsynth/vessels.hpp"

namespace tumorsynth::cli {
namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

int exit_code(Errc code) {
  switch (code) {
    case Errc::io: return 3;
    case Errc::config: return 4;
    case Errc::parse: return 5;
    case Errc::corrupt_header:
    case Errc::unsupported_format:
    case Errc::unsupported_datatype: return 6;
    case Errc::invalid_geometry:
    case Errc::dimension_mismatch: return 7;
    case Errc::invalid_argument:
    case Errc::empty_mask:
    case Errc::zero_variance: return 8;
    case Errc::placement_exhausted:
    case Errc::shape_rejected:
    case Errc::sub_resolution: return 9;
    case Errc::metric_absent:
    case Errc::epoch_grid_mismatch: return 10;
  }
  return kExitFailure;
}

namespace {

// Thrown by a command that ran but wants a specific non-error exit status.
struct ExitStatus {
  int code;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> argv;

  Config load() const {
    Config c = config_path.empty() ? Config{} : load_config(config_path);
    if (seed) c.seed = *seed;
    return c;
  }
};

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Global seed (overrides the config)");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

ojson record_header(const std::string& command, const Common& c) {
  ojson j;
  j["command"] = command;
  j["argv"] = c.argv;
  j["generator_version"] = kGeneratorVersion;
  return j;
}

ojson file_entry(const fs::path& path) {
  return {{"path", path.string()}, {"sha256", sha256_file(path)}};
}

std::string nii_name(const std::string& stem, bool gz) { return stem + (gz ? ".nii.gz" : ".nii"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<PoolSource> resolve_pool(const std::string& pool, const std::string& images,
                                     const std::string& labels) {
  if (!pool.empty()) return load_pool(pool);
  if (images.empty() || labels.empty()) {
    throw Error(Errc::invalid_argument, "give --pool or both --images and --labels");
  }
  return pool_from_dirs(images, labels);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- vessels ---------------------------------------------------------------

struct VesselsOpts {
  Common common;
  std::string volume, liver, out_dir;
};

void cmd_vessels(const VesselsOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  const CtVolume vol = read_volume(o.volume);
  const LabelMask label = read_mask(o.liver);
  require_same_dims(vol.dims(), label.dims(), "vessels");
  const BinaryMask liver = label.select_at_least(LabelMask::kLiver);
  const BinaryMask vessels = segment_vessels(vol, liver, cfg.vessel);
  const IntensityStats stats = masked_stats(vol.grid, liver);
  ensure_dir(o.out_dir);
  const fs::path mask_path = fs::path(o.out_dir) / "vessels.nii.gz";
  write_mask(mask_path, vessels, vol.affine);

  ojson rec = record_header("vessels", o.common);
  rec["inputs"] = {file_entry(o.volume), file_entry(o.liver)};
  rec["liver_stats"] = {{"mean", stats.mean}, {"stddev", stats.stddev}, {"voxels", stats.count}};
  rec["threshold_hu"] = cfg.vessel.mode == VesselMode::relative ? stats.mean + cfg.vessel.k_sigma * stats.stddev
                                                               : cfg.vessel.absolute_hu;
  rec["vessel_voxels"] = vessels.count();
  rec["outputs"] = {file_entry(mask_path)};
  rec["config"] = to_json(cfg);
  write_text(fs::path(o.out_dir) / "record.json", rec.dump(2) + "\n");
  out << "vessel voxels: " << vessels.count() << " (threshold " << fmt("%.1f", rec["threshold_hu"].get<double>())
      << " HU)\n";
}

// ---- shapes ----------------------------------------------------------------

struct ShapesOpts {
  Common common;
  std::string out_dir, size_class = "medium";
  int count = 8;
  double spacing = 1.0;
};

void cmd_shapes(const ShapesOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  const SizeClass& sc = find_size_class(cfg.size_classes, o.size_class);
  const Spacing sp{o.spacing, o.spacing, o.spacing};
  ensure_dir(o.out_dir);
  ojson rec = record_header("shapes", o.common);
  rec["shapes"] = ojson::array();
  for (int i = 0; i < o.count; ++i) {
    const TumorSpec spec = sample_spec(sc, IntensityStats{90.0, 25.0, 1}, derive_seed(cfg.seed, SeedStream::shape, i),
                                       cfg, sp);
    const BinaryMask ellipsoid = make_ellipsoid(spec.ellipsoid, sp, spec.eccentricity_cap);
    const DeformedShape shape = deform_single_component(ellipsoid, spec.deform, spec.acceptance);
    char name[32];
    std::snprintf(name, sizeof name, "shape_%03d.nii.gz", i);
    const fs::path path = fs::path(o.out_dir) / name;
    write_mask(path, shape.mask, affine_from_spacing(sp));
    ojson s = file_entry(path);
    s["ellipsoid_mm"] = {spec.ellipsoid.a, spec.ellipsoid.b, spec.ellipsoid.c};
    s["deform"] = {{"sigma_d", spec.deform.sigma_d},
                   {"control_spacing", spec.deform.control_spacing},
                   {"smooth_sigma", spec.deform.smooth_sigma},
                   {"seed_used", shape.seed_used},
                   {"attempts", shape.attempts}};
    s["voxels"] = shape.mask.count();
    s["equivalent_radius_mm"] = equivalent_radius_mm(shape.mask.count(), sp);
    rec["shapes"].push_back(s);
  }
  rec["config"] = to_json(cfg);
  write_text(fs::path(o.out_dir) / "record.json", rec.dump(2) + "\n");
  out << "wrote " << o.count << " " << o.size_class << " shapes to " << o.out_dir << "\n";
}

// ---- textures --------------------------------------------------------------

struct TexturesOpts {
  Common common;
  std::string out_dir;
  int count = 4, size = 64, coarse_factor = 4;
  double mu = 90.0, sigma_g = 25.0, blur = 1.0;
};

void cmd_textures(const TexturesOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  ensure_dir(o.out_dir);
  const Dims dims{o.size, o.size, o.size};
  ojson rec = record_header("textures", o.common);
  rec["textures"] = ojson::array();
  for (int i = 0; i < o.count; ++i) {
    TextureSpec spec{o.mu, o.sigma_g, o.coarse_factor, o.blur, derive_seed(cfg.seed, SeedStream::texture, i)};
    const VoxelGrid tex = generate_texture(dims, spec);
    double sum = 0.0, sq = 0.0;
    for (float v : tex.values()) sum += v;
    const double mean = sum / static_cast<double>(tex.size());
    for (float v : tex.values()) sq += (v - mean) * (v - mean);
    char name[32];
    std::snprintf(name, sizeof name, "texture_%03d.nii.gz", i);
    const fs::path path = fs::path(o.out_dir) / name;
    write_nifti(path, tex, StorageType::float32, affine_from_spacing(tex.spacing()));
    ojson t = file_entry(path);
    t["spec"] = {{"mu", spec.mu}, {"sigma_g", spec.sigma_g}, {"coarse_factor", spec.coarse_factor},
                 {"blur_sigma", spec.blur_sigma}, {"seed", spec.seed}};
    t["mean"] = mean;
    t["stddev"] = std::sqrt(sq / static_cast<double>(tex.size()));
    rec["textures"].push_back(t);
  }
  write_text(fs::path(o.out_dir) / "record.json", rec.dump(2) + "\n");
  out << "wrote " << o.count << " textures to " << o.out_dir << "\n";
}

// ---- synth -----------------------------------------------------------------

struct SynthOpts {
  Common common;
  std::string volume, liver, out_dir, spec_path;
  std::vector<std::string> classes;
  bool plain_nii = false;
};

void cmd_synth(const SynthOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  const LoadedSource src = load_source({"input", o.volume, o.liver}, cfg.vessel);
  GeneratedItem item;
  if (!o.spec_path.empty()) {
    std::vector<TumorSpec> specs{tumor_spec_from_json(read_json(o.spec_path))};
    PlacementParams placement = cfg.placement;
    placement.seed = derive_seed(cfg.seed, SeedStream::placement);
    item.specs = specs;
    item.synthesis = compose_tumors(src.volume, src.liver, src.forbidden, specs, placement);
    auto& label = item.synthesis.label;
    for (std::int64_t i = 0; i < label.grid().size(); ++i) {
      if (src.label[i] > label[i]) label.assign(i, src.label[i]);
    }
  } else {
    const std::vector<std::string> classes = o.classes.empty() ? std::vector<std::string>{"medium"} : o.classes;
    item = generate_item(src, classes, cfg.seed, cfg);
  }
  ensure_dir(o.out_dir);
  const fs::path image = fs::path(o.out_dir) / nii_name("image", !o.plain_nii);
  const fs::path label = fs::path(o.out_dir) / nii_name("label", !o.plain_nii);
  CtVolume vol = item.synthesis.volume;
  vol.affine = src.volume.affine;
  vol.storage = src.volume.storage;
  write_volume(image, vol);
  write_mask(label, item.synthesis.label, src.volume.affine);

  ojson rec = record_header("synth", o.common);
  rec["inputs"] = {{{"path", o.volume}, {"sha256", src.volume_sha256}}, {{"path", o.liver}, {"sha256", src.label_sha256}}};
  rec["seed"] = cfg.seed;
  rec["attempt"] = item.attempt;
  rec["attempt_seed"] = item.attempt_seed;
  rec["spec_file"] = o.spec_path.empty() ? ojson(nullptr) : ojson(o.spec_path);
  rec["tumors"] = ojson::array();
  for (const auto& t : item.synthesis.tumors) rec["tumors"].push_back(to_json(t));
  rec["outputs"] = {file_entry(image), file_entry(label)};
  rec["config"] = to_json(cfg);
  write_text(fs::path(o.out_dir) / "record.json", rec.dump(2) + "\n");
  out << "placed " << item.synthesis.tumors.size() << " tumor(s); wrote " << image.string() << "\n";
}

// ---- make-validation / stream ----------------------------------------------

struct PoolOpts {
  std::string pool, images, labels;
};

void add_pool(CLI::App* cmd, PoolOpts& p) {
  cmd->add_option("--pool", p.pool, "JSON list of {id, volume, label}")->check(CLI::ExistingFile);
  cmd->add_option("--images", p.images, "Directory of host volumes")->check(CLI::ExistingDirectory);
  cmd->add_option("--labels", p.labels, "Directory of liver labels with matching names")
      ->check(CLI::ExistingDirectory);
}

struct ValidationOpts {
  Common common;
  PoolOpts pool;
  std::string out_dir;
  std::vector<std::string> classes;
  int workers = 1;
};

void summarize_manifest(const DatasetManifest& m, const std::string& out_dir, std::ostream& out) {
  std::size_t ok = 0;
  for (const auto& e : m.items) ok += e.status == "ok";
  out << m.kind << ": " << ok << " of " << m.items.size() << " items ok; manifest "
      << (fs::path(out_dir) / "manifest.json").string() << "\n";
}

void cmd_validation(const ValidationOpts& o, std::ostream& out) {
  Config cfg = o.common.load();
  if (!o.classes.empty()) cfg.validation.classes = o.classes;
  validate(cfg);
  const auto pool = resolve_pool(o.pool.pool, o.pool.images, o.pool.labels);
  const DatasetManifest m = make_validation_set(pool, cfg, o.out_dir, o.workers);
  summarize_manifest(m, o.out_dir, out);
}

struct StreamOpts {
  Common common;
  PoolOpts pool;
  std::string out_dir;
  std::vector<std::string> class_mix;
  std::int64_t count = 0;
  int workers = 1;
};

void cmd_stream(const StreamOpts& o, std::ostream& out) {
  Config cfg = o.common.load();
  if (!o.class_mix.empty()) {
    cfg.stream.class_mix.clear();
    for (const auto& kv : o.class_mix) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(Errc::invalid_argument, "--class-mix expects name=probability");
      double p = 0.0;
      try {
        p = std::stod(kv.substr(eq + 1));
      } catch (const std::exception&) {
        throw Error(Errc::invalid_argument, "--class-mix: bad probability in '" + kv + "'");
      }
      cfg.stream.class_mix.emplace_back(kv.substr(0, eq), p);
    }
  }
  validate(cfg);
  TrainingStream stream(resolve_pool(o.pool.pool, o.pool.images, o.pool.labels), cfg);
  const DatasetManifest m = write_stream(stream, o.count, o.out_dir, o.workers);
  summarize_manifest(m, o.out_dir, out);
}

// ---- regenerate ------------------------------------------------------------

struct RegenerateOpts {
  std::string manifest, out_dir;
  std::int64_t index = 0;
  Common common;
};

void cmd_regenerate(const RegenerateOpts& o, std::ostream& out) {
  const DatasetManifest m = load_manifest(o.manifest);
  const ItemEntry fresh = regenerate_item(m, o.index, o.out_dir);
  const auto& old = *std::find_if(m.items.begin(), m.items.end(), [&](const ItemEntry& e) { return e.index == o.index; });
  const bool match = fresh.status == old.status && fresh.image_sha256 == old.image_sha256 &&
                     fresh.label_sha256 == old.label_sha256;
  ojson rec = record_header("regenerate", o.common);
  rec["manifest"] = file_entry(o.manifest);
  rec["item"] = to_json(fresh);
  rec["matches_manifest"] = match;
  write_text(fs::path(o.out_dir) / ("regenerate_" + std::to_string(o.index) + ".record.json"),
             rec.dump(2) + "\n");
  out << ojson{{"index", o.index}, {"status", fresh.status}, {"image_sha256", fresh.image_sha256},
               {"label_sha256", fresh.label_sha256}, {"matches_manifest", match}}
             .dump()
      << "\n";
  if (!match) throw ExitStatus{kExitHashMismatch};
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateOpts {
  Common common;
  std::string pred, gt, out_json;
  int tumor_label = LabelMask::kTumor;
};

BinaryMask label_mask(const fs::path& path, int label) {
  const LabelMask m = read_mask(path);
  return m.select(static_cast<std::uint8_t>(label));
}

void cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  if (o.tumor_label < 1 || o.tumor_label > LabelMask::kTumor) {
    throw Error(Errc::invalid_argument, "--tumor-label must be 1 or 2");
  }
  std::vector<std::pair<std::string, std::pair<fs::path, fs::path>>> pairs;
  if (fs::is_directory(o.gt)) {
    if (!fs::is_directory(o.pred)) throw Error(Errc::invalid_argument, "--pred must be a directory when --gt is");
    std::vector<fs::path> gts;
    for (const auto& e : fs::directory_iterator(o.gt)) {
      const std::string n = e.path().filename().string();
      if (n.ends_with(".nii") || n.ends_with(".nii.gz")) gts.push_back(e.path());
    }
    std::sort(gts.begin(), gts.end());
    for (const auto& g : gts) {
      const fs::path p = fs::path(o.pred) / g.filename();
      if (!fs::exists(p)) throw Error(Errc::io, "no prediction for " + g.filename().string());
      pairs.push_back({g.filename().string(), {p, g}});
    }
    if (pairs.empty()) throw Error(Errc::invalid_argument, "no NIfTI files in " + o.gt);
  } else {
    pairs.push_back({fs::path(o.gt).filename().string(), {o.pred, o.gt}});
  }
  std::vector<CaseEval> cases;
  for (const auto& [id, paths] : pairs) {
    const BinaryMask pred = label_mask(paths.first, o.tumor_label);
    const BinaryMask gt = label_mask(paths.second, o.tumor_label);
    require_same_dims(pred.dims(), gt.dims(), id.c_str());
    cases.push_back(evaluate_case(id, pred, gt, cfg.metrics));
  }
  const EvalReport report = summarize(std::move(cases), cfg.metrics);
  out << format_table(report);
  if (!o.out_json.empty()) {
    ojson j = to_json(report);
    j["tumor_label"] = o.tumor_label;
    j["record"] = record_header("evaluate", o.common);
    j["config"] = to_json(cfg);
    write_text(o.out_json, j.dump(2) + "\n");
  }
}

// ---- select-checkpoint -----------------------------------------------------

struct SelectOpts {
  std::string path, metric = "dsc", test_metric;
  bool minimize = false;
  std::optional<std::int64_t> run;
};

void cmd_select(const SelectOpts& o, std::ostream& out) {
  const auto runs = read_trajectories(o.path);
  if (runs.empty()) throw Error(Errc::parse, o.path + ": no trajectory records");
  const Direction dir = o.minimize ? Direction::minimize : Direction::maximize;
  bool any = false;
  for (const auto& t : runs) {
    if (o.run && t.run() != *o.run) continue;
    any = true;
    const SelectionResult r = select_best(t, o.metric, dir);
    ojson j{{"run", t.run()}, {"metric", o.metric}, {"direction", o.minimize ? "minimize" : "maximize"},
            {"epoch", r.epoch}, {"value", r.value}, {"tie_policy", r.tie_policy}};
    if (!o.test_metric.empty()) j["regret"] = regret(t, t, o.metric, o.test_metric, dir);
    out << j.dump() << "\n";
  }
  if (!any) throw Error(Errc::invalid_argument, "no run " + std::to_string(*o.run) + " in " + o.path);
}

// ---- simulate-study --------------------------------------------------------

struct StudyOpts {
  Common common;
  std::string out_json, trajectory;
  std::optional<int> trials;
};

void cmd_study(const StudyOpts& o, std::ostream& out) {
  Config cfg = o.common.load();
  if (o.common.seed) cfg.study.seed = *o.common.seed;
  if (o.trials) cfg.study.trials = *o.trials;
  validate(cfg);
  const StudyResult result = simulate_selection_study(cfg.study);
  out << "  n_val  median_regret  mean_regret  zero_regret_fraction\n";
  for (const auto& a : result.arms) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %5d  %13.6f  %11.6f  %20.3f\n", a.n_val, a.median, a.mean, a.zero_fraction);
    out << buf;
  }
  ojson rec = record_header("simulate-study", o.common);
  if (!o.out_json.empty()) {
    ojson j = to_json(result);
    j["trials"] = cfg.study.trials;
    j["record"] = rec;
    j["config"] = to_json(cfg);
    write_text(o.out_json, j.dump(2) + "\n");
  }
  if (!o.trajectory.empty()) {
    // Trial 0: run a holds arm a's validation curve plus the latent test curve.
    const MetricTrajectory test = simulate_test_curve(cfg.study, 0);
    std::ostringstream os;
    for (std::size_t a = 0; a < cfg.study.n_val.size(); ++a) {
      const MetricTrajectory val = simulate_validation_curve(cfg.study, 0, a, test);
      MetricTrajectory both(static_cast<std::int64_t>(a));
      const auto& vs = val.series("dsc");
      const auto& ts = test.series("dsc");
      for (std::size_t k = 0; k < vs.size(); ++k) {
        both.add(vs[k].epoch, "dsc", vs[k].value);
        both.add(ts[k].epoch, "test_dsc", ts[k].value);
      }
      write_jsonl(os, both);
    }
    write_text(o.trajectory, os.str());
  }
}

// ---- report ----------------------------------------------------------------

struct ReportOpts {
  Common common;
  std::string eval, trajectory, study, out_dir;
};

void cmd_report(const ReportOpts& o, std::ostream& out) {
  if (o.eval.empty() && o.trajectory.empty() && o.study.empty()) {
    throw Error(Errc::invalid_argument, "report needs --eval, --trajectory or --study");
  }
  ensure_dir(o.out_dir);
  const fs::path dir = o.out_dir;
  ojson rec = record_header("report", o.common);
  rec["outputs"] = ojson::array();
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    rec["outputs"].push_back(file_entry(dir / name));
  };

  if (!o.eval.empty()) {
    const json j = read_json(o.eval);
    try {
      std::ostringstream csv;
      csv << "case,dsc";
      const auto& cases = j.at("cases");
      std::vector<std::string> bins;
      if (!cases.empty()) {
        for (const auto& b : cases[0].at("lesions")) bins.push_back(b.at("bin").get<std::string>());
      }
      for (const auto& b : bins) csv << "," << b << "_total," << b << "_detected";
      csv << "\n";
      std::vector<std::pair<std::string, double>> bars;
      for (const auto& c : cases) {
        const std::string id = c.at("id").get<std::string>();
        const double d = c.at("dsc").get<double>();
        csv << id << "," << fmt("%.6f", d);
        for (const auto& b : c.at("lesions")) csv << "," << b.at("total").get<std::int64_t>() << ","
                                                  << b.at("detected").get<std::int64_t>();
        csv << "\n";
        bars.emplace_back(id, d);
      }
      std::ostringstream sens;
      sens << "bin,total,detected,sensitivity\n";
      for (const auto& b : j.at("sensitivity").at("bins")) {
        sens << b.at("bin").get<std::string>() << "," << b.at("total").get<std::int64_t>() << ","
             << b.at("detected").get<std::int64_t>() << ","
             << (b.at("sensitivity").is_null() ? std::string() : fmt("%.6f", b.at("sensitivity").get<double>()))
             << "\n";
      }
      emit("eval_cases.csv", csv.str());
      emit("eval_sensitivity.csv", sens.str());
      emit("eval_dsc.svg", svg_bar_chart("DSC per case", "DSC", bars));
    } catch (const json::exception& e) {
      throw Error(Errc::parse, o.eval + ": " + e.what());
    }
  }

  if (!o.trajectory.empty()) {
    const auto runs = read_trajectories(o.trajectory);
    std::ostringstream csv;
    csv << "run,epoch,metric,value\n";
    std::vector<Series> series;
    for (const auto& t : runs) {
      for (const auto& r : t.records()) {
        csv << r.run << "," << r.epoch << "," << r.metric << "," << fmt("%.9g", r.value) << "\n";
      }
      for (const auto& m : t.metrics()) {
        Series s{"run " + std::to_string(t.run()) + " " + m, {}};
        for (const auto& p : t.series(m)) s.points.emplace_back(static_cast<double>(p.epoch), p.value);
        series.push_back(std::move(s));
      }
    }
    emit("trajectory.csv", csv.str());
    emit("trajectory.svg", svg_line_chart("Checkpoint trajectories", "epoch", "value", series));
  }

  if (!o.study.empty()) {
    const json j = read_json(o.study);
    try {
      std::ostringstream csv;
      std::vector<Series> series;
      const auto& arms = j.at("arms");
      csv << "trial";
      std::vector<std::vector<double>> regrets;
      for (const auto& a : arms) {
        csv << ",regret_n" << a.at("n_val").get<int>();
        regrets.push_back(a.at("regrets").get<std::vector<double>>());
      }
      csv << "\n";
      const std::size_t trials = regrets.empty() ? 0 : regrets[0].size();
      for (std::size_t t = 0; t < trials; ++t) {
        csv << t;
        for (const auto& r : regrets) csv << "," << (t < r.size() ? fmt("%.9g", r[t]) : std::string());
        csv << "\n";
      }
      for (std::size_t a = 0; a < regrets.size(); ++a) {
        auto sorted = regrets[a];
        std::sort(sorted.begin(), sorted.end());
        Series s{"n_val=" + std::to_string(arms[a].at("n_val").get<int>()), {}};
        for (std::size_t k = 0; k < sorted.size(); ++k) {
          s.points.emplace_back(static_cast<double>(k + 1) / static_cast<double>(sorted.size()), sorted[k]);
        }
        series.push_back(std::move(s));
      }
      emit("study_regret.csv", csv.str());
      emit("study_regret.svg", svg_line_chart("Test regret by validation size", "quantile", "regret", series));
    } catch (const json::exception& e) {
      throw Error(Errc::parse, o.study + ": " + e.what());
    }
  }
  write_text(dir / "record.json", rec.dump(2) + "\n");
  out << "wrote " << rec["outputs"].size() << " report file(s) to " << o.out_dir << "\n";
}

// ---- preprocess ------------------------------------------------------------

struct PreprocessOpts {
  Common common;
  std::string volume, out;
  PreprocessParams params;
};

void cmd_preprocess(const PreprocessOpts& o, std::ostream& out) {
  const CtVolume vol = read_volume(o.volume);
  const VoxelGrid result = preprocess(vol, o.params);
  write_nifti(o.out, result, StorageType::float32, vol.affine);
  ojson rec = record_header("preprocess", o.common);
  rec["inputs"] = {file_entry(o.volume)};
  rec["params"] = {{"clip_min", o.params.clip_min}, {"clip_max", o.params.clip_max},
                   {"normalize", o.params.normalize}};
  rec["outputs"] = {file_entry(o.out)};
  write_text(o.out + ".record.json", rec.dump(2) + "\n");
  out << "wrote " << o.out << "\n";
}

// ---- phantom ---------------------------------------------------------------

struct PhantomOpts {
  Common common;
  std::string out_dir;
  int count = 1;
  std::vector<std::int64_t> dims{128, 128, 112};
  double spacing = 2.0;
  std::vector<double> liver_axes{110.0, 100.0, 92.0};  // room for large tumors
  int vessels = 3;
};

void cmd_phantom(const PhantomOpts& o, std::ostream& out) {
  const Config cfg = o.common.load();
  const fs::path dir = o.out_dir;
  ensure_dir(dir / "images");
  ensure_dir(dir / "labels");
  ojson pool = ojson::array();
  ojson rec = record_header("phantom", o.common);
  rec["phantoms"] = ojson::array();
  for (int i = 0; i < o.count; ++i) {
    PhantomSpec spec;
    spec.dims = {o.dims[0], o.dims[1], o.dims[2]};
    spec.spacing = {o.spacing, o.spacing, o.spacing};
    spec.liver_semi_axes_mm = {o.liver_axes[0], o.liver_axes[1], o.liver_axes[2]};
    spec.vessel_count = o.vessels;
    spec.seed = derive_seed(cfg.seed, SeedStream::phantom, static_cast<std::uint64_t>(i));
    const Phantom p = make_phantom(spec);
    char name[32];
    std::snprintf(name, sizeof name, "phantom_%03d", i);
    const std::string file = nii_name(name, true);
    write_volume(dir / "images" / file, p.volume);
    write_mask(dir / "labels" / file, p.label, p.volume.affine);
    pool.push_back({{"id", name}, {"volume", "images/" + file}, {"label", "labels/" + file}});
    ojson e{{"id", name}, {"seed", spec.seed}};
    e["volume"] = file_entry(dir / "images" / file);
    e["label"] = file_entry(dir / "labels" / file);
    rec["phantoms"].push_back(e);
  }
  write_text(dir / "pool.json", pool.dump(2) + "\n");
  write_text(dir / "record.json", rec.dump(2) + "\n");
  out << "wrote " << o.count << " phantom(s) and " << (dir / "pool.json").string() << "\n";
}

void error_line(std::ostream& err, std::string_view category, int code, const std::string& message) {
  err << ojson{{"error", {{"category", category}, {"exit_code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic liver-tumor generator and validation tooling", "tumorsynth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kGeneratorVersion));
  std::vector<std::string> args(argv, argv + argc);
  std::function<void()> action;

  VesselsOpts vessels;
  auto* c = app.add_subcommand("vessels", "Segment hyperdense vessels inside the liver");
  add_common(c, vessels.common);
  c->add_option("--volume", vessels.volume, "CT volume")->required()->check(CLI::ExistingFile);
  c->add_option("--liver", vessels.liver, "Liver label file")->required()->check(CLI::ExistingFile);
  c->add_option("--out-dir", vessels.out_dir)->required();
  c->callback([&] { action = [&] { cmd_vessels(vessels, out); }; });

  ShapesOpts shapes;
  c = app.add_subcommand("shapes", "Render a gallery of deformed tumor shapes");
  add_common(c, shapes.common);
  c->add_option("--out-dir", shapes.out_dir)->required();
  c->add_option("--count", shapes.count)->check(CLI::PositiveNumber);
  c->add_option("--class", shapes.size_class, "Size class");
  c->add_option("--spacing", shapes.spacing, "Isotropic voxel size in mm")->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { cmd_shapes(shapes, out); }; });

  TexturesOpts textures;
  c = app.add_subcommand("textures", "Render seeded tumor textures");
  add_common(c, textures.common);
  c->add_option("--out-dir", textures.out_dir)->required();
  c->add_option("--count", textures.count)->check(CLI::PositiveNumber);
  c->add_option("--size", textures.size, "Cube edge in voxels")->check(CLI::PositiveNumber);
  c->add_option("--mu", textures.mu);
  c->add_option("--sigma-g", textures.sigma_g)->check(CLI::NonNegativeNumber);
  c->add_option("--coarse-factor", textures.coarse_factor)->check(CLI::PositiveNumber);
  c->add_option("--blur", textures.blur)->check(CLI::NonNegativeNumber);
  c->callback([&] { action = [&] { cmd_textures(textures, out); }; });

  SynthOpts synth;
  c = app.add_subcommand("synth", "Insert synthetic tumors into one healthy volume");
  add_common(c, synth.common);
  c->add_option("--volume", synth.volume)->required()->check(CLI::ExistingFile);
  c->add_option("--liver", synth.liver, "Liver label file")->required()->check(CLI::ExistingFile);
  c->add_option("--out-dir", synth.out_dir)->required();
  c->add_option("--class", synth.classes, "Size class per tumor (repeatable, default medium)");
  c->add_option("--spec", synth.spec_path, "Explicit tumor spec JSON")->check(CLI::ExistingFile);
  c->add_flag("--nii", synth.plain_nii, "Write uncompressed .nii");
  c->callback([&] { action = [&] { cmd_synth(synth, out); }; });

  ValidationOpts validation;
  c = app.add_subcommand("make-validation", "Build an offline validation set, one pair per source and class");
  add_common(c, validation.common);
  add_pool(c, validation.pool);
  c->add_option("--out-dir", validation.out_dir)->required();
  c->add_option("--class", validation.classes, "Size classes (repeatable; default from config)");
  c->add_option("--workers", validation.workers)->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { cmd_validation(validation, out); }; });

  StreamOpts stream;
  c = app.add_subcommand("stream", "Write items [0, N) of the random-access training stream");
  add_common(c, stream.common);
  add_pool(c, stream.pool);
  c->add_option("--out-dir", stream.out_dir)->required();
  c->add_option("--count", stream.count)->required()->check(CLI::NonNegativeNumber);
  c->add_option("--class-mix", stream.class_mix, "name=probability (repeatable)");
  c->add_option("--workers", stream.workers)->check(CLI::PositiveNumber);
  c->callback([&] { action = [&] { cmd_stream(stream, out); }; });

  RegenerateOpts regen;
  c = app.add_subcommand("regenerate", "Rebuild one manifest item and compare hashes");
  c->add_option("--manifest", regen.manifest)->required()->check(CLI::ExistingFile);
  c->add_option("--index", regen.index)->required();
  c->add_option("--out-dir", regen.out_dir)->required();
  c->callback([&] { action = [&] { cmd_regenerate(regen, out); }; });

  EvaluateOpts evaluate;
  c = app.add_subcommand("evaluate", "DSC and per-lesion sensitivity of predictions against ground truth");
  add_common(c, evaluate.common);
  c->add_option("--pred", evaluate.pred, "Prediction file or directory")->required()->check(CLI::ExistingPath);
  c->add_option("--gt", evaluate.gt, "Ground-truth file or directory")->required()->check(CLI::ExistingPath);
  c->add_option("--tumor-label", evaluate.tumor_label, "Label value treated as lesion");
  c->add_option("--json", evaluate.out_json, "Write the report as JSON");
  c->callback([&] { action = [&] { cmd_evaluate(evaluate, out); }; });

  SelectOpts select;
  c = app.add_subcommand("select-checkpoint", "Pick the best epoch from a metric trajectory (JSONL)");
  c->add_option("trajectory", select.path, "Trajectory JSONL")->required()->check(CLI::ExistingFile);
  c->add_option("--metric", select.metric);
  auto* maxf = c->add_flag("--maximize", "Higher is better (default)");
  c->add_flag("--minimize", select.minimize, "Lower is better")->excludes(maxf);
  c->add_option("--run", select.run, "Only this run id");
  c->add_option("--test-metric", select.test_metric, "Also report regret against this metric");
  c->callback([&] { action = [&] { cmd_select(select, out); }; });

  StudyOpts study;
  c = app.add_subcommand("simulate-study", "Seeded checkpoint-selection regret study");
  add_common(c, study.common);
  c->add_option("--trials", study.trials)->check(CLI::PositiveNumber);
  c->add_option("--json", study.out_json, "Write per-trial regrets as JSON");
  c->add_option("--trajectory", study.trajectory, "Write trial 0's curves as trajectory JSONL");
  c->callback([&] { action = [&] { cmd_study(study, out); }; });

  ReportOpts report;
  c = app.add_subcommand("report", "Render CSV tables and SVG plots");
  c->add_option("--eval", report.eval, "Evaluation JSON")->check(CLI::ExistingFile);
  c->add_option("--trajectory", report.trajectory, "Trajectory JSONL")->check(CLI::ExistingFile);
  c->add_option("--study", report.study, "simulate-study JSON")->check(CLI::ExistingFile);
  c->add_option("--out-dir", report.out_dir)->required();
  c->callback([&] {
    if (report.eval.empty() && report.trajectory.empty() && report.study.empty()) {
      throw CLI::RequiredError("report needs --eval, --trajectory or --study");
    }
    action = [&] { cmd_report(report, out); };
  });

  PreprocessOpts pre;
  c = app.add_subcommand("preprocess", "Clip a CT volume to an intensity window, optionally z-normalised");
  c->add_option("--volume", pre.volume)->required()->check(CLI::ExistingFile);
  c->add_option("--out", pre.out)->required();
  c->add_option("--clip-min", pre.params.clip_min);
  c->add_option("--clip-max", pre.params.clip_max);
  c->add_flag("--normalize", pre.params.normalize);
  c->callback([&] { action = [&] { cmd_preprocess(pre, out); }; });

  PhantomOpts phantom;
  c = app.add_subcommand("phantom", "Write seeded synthetic abdomen phantoms and a pool.json");
  add_common(c, phantom.common);
  c->add_option("--out-dir", phantom.out_dir)->required();
  c->add_option("--count", phantom.count)->check(CLI::PositiveNumber);
  c->add_option("--dims", phantom.dims, "nx,ny,nz")->delimiter(',')->expected(3);
  c->add_option("--spacing", phantom.spacing)->check(CLI::PositiveNumber);
  c->add_option("--liver-axes", phantom.liver_axes, "Liver semi-axes in mm: a,b,c")->delimiter(',')->expected(3);
  c->add_option("--vessels", phantom.vessels)->check(CLI::NonNegativeNumber);
  c->callback([&] { action = [&] { cmd_phantom(phantom, out); }; });

  for (auto* opts : {&vessels.common, &shapes.common, &textures.common, &synth.common, &validation.common,
                     &stream.common, &regen.common, &evaluate.common, &study.common, &report.common,
                     &pre.common, &phantom.common}) {
    opts->argv = args;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage", kExitUsage, e.what());
    err << app.help();
    return kExitUsage;
  }

  try {
    action();
    return kExitOk;
  } catch (const ExitStatus& s) {
    return s.code;
  } catch (const Error& e) {
    const int code = exit_code(e.code());
    error_line(err, to_string(e.code()), code, e.what());
    return code;
  } catch (const std::filesystem::filesystem_error& e) {
    error_line(err, "io", exit_code(Errc::io), e.what());
    return exit_code(Errc::io);
  } catch (const std::exception& e) {
    error_line(err, "internal", kExitFailure, e.what());
    return kExitFailure;
  }
}

}  // namespace tumorsynth::cli
