#include "tumorsynth/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <random>
#include <thread>

#include "tumorsynth/hash.hpp"
#include "tumorsynth/nifti.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {
namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

TumorSpec sample_spec(const SizeClass& size_class, const IntensityStats& host,
                      std::uint64_t seed, const Config& config, const Spacing& spacing) {
  Rng rng(derive_seed(seed, SeedStream::spec));
  std::uniform_real_distribution<double> log_r(std::log(size_class.lo_mm), std::log(size_class.hi_mm));
  const double r = std::exp(log_r(rng));

  TumorSpec spec;
  spec.size_class = size_class.name;
  spec.eccentricity_cap = size_class.eccentricity_cap;
  spec.ellipsoid = {r, r, r};
  if (size_class.eccentricity_cap > 1.0) {
    const double span = std::log(size_class.eccentricity_cap);
    std::uniform_real_distribution<double> u(-span, span);
    for (int tries = 0; tries < 1000; ++tries) {
      const double x = u(rng), y = u(rng);
      const double a = r * std::exp(x), b = r * std::exp(y), c = r * std::exp(-x - y);
      if (std::max({a, b, c}) / std::min({a, b, c}) <= size_class.eccentricity_cap) {
        spec.ellipsoid = {a, b, c};
        break;
      }
    }
  }

  const double mean_spacing = (spacing.sx + spacing.sy + spacing.sz) / 3.0;
  const auto& sh = config.shape;
  spec.deform.sigma_d = std::clamp(sh.sigma_d_per_radius * r / mean_spacing, sh.sigma_d_min, sh.sigma_d_max);
  spec.deform.control_spacing =
      std::max(sh.control_spacing, static_cast<int>(std::ceil(2.0 * spec.deform.sigma_d)));
  spec.deform.smooth_sigma = sh.smooth_sigma;
  spec.deform.seed = derive_seed(seed, SeedStream::shape);
  spec.acceptance.max_attempts = sh.max_deform_attempts;
  spec.acceptance.max_radius_mm = size_class.hi_mm;
  spec.acceptance.max_inclusive = size_class.closed_upper;

  const auto& tx = config.texture;
  std::uniform_real_distribution<double> offset(tx.mu_offset_min, tx.mu_offset_max);
  spec.texture.mu = host.mean - (tx.mu_offset_min == tx.mu_offset_max ? tx.mu_offset_min : offset(rng));
  spec.texture.sigma_g = tx.sigma_g ? *tx.sigma_g : host.stddev;
  spec.texture.coarse_factor = tx.coarse_factor;
  spec.texture.blur_sigma = tx.blur_sigma;
  spec.texture.seed = derive_seed(seed, SeedStream::texture);

  spec.mass_effect_strength = config.post.mass_effect_strength;
  spec.influence_factor = config.post.influence_factor;
  spec.capsule_width_voxels = config.post.capsule_width_voxels;
  spec.capsule_delta_hu = config.post.capsule_delta_hu;
  spec.edge_blend_sigma = config.post.edge_blend_sigma;
  return spec;
}

std::vector<PoolSource> pool_from_json(const json& j, const fs::path& base) {
  if (!j.is_array()) throw Error(Errc::parse, "pool must be a JSON array");
  std::vector<PoolSource> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("volume") || !e.contains("label") || !e["volume"].is_string() ||
        !e["label"].is_string()) {
      throw Error(Errc::parse, "pool entries need string 'volume' and 'label'");
    }
    PoolSource s;
    s.volume = e["volume"].get<std::string>();
    s.label = e["label"].get<std::string>();
    if (s.volume.is_relative()) s.volume = base / s.volume;
    if (s.label.is_relative()) s.label = base / s.label;
    s.id = e.contains("id") ? e["id"].get<std::string>() : s.volume.filename().string();
    out.push_back(std::move(s));
  }
  if (out.empty()) throw Error(Errc::invalid_argument, "pool is empty");
  return out;
}

std::vector<PoolSource> load_pool(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open pool " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
  return pool_from_json(j, path.parent_path());
}

namespace {

std::string strip_nifti_ext(const std::string& name) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    const std::string e = ext;
    if (name.size() > e.size() && name.compare(name.size() - e.size(), e.size(), e) == 0) {
      return name.substr(0, name.size() - e.size());
    }
  }
  return {};
}

}  // namespace

std::vector<PoolSource> pool_from_dirs(const fs::path& images, const fs::path& labels) {
  if (!fs::is_directory(images)) throw Error(Errc::io, "not a directory: " + images.string());
  std::vector<PoolSource> out;
  for (const auto& entry : fs::directory_iterator(images)) {
    const std::string name = entry.path().filename().string();
    const std::string id = strip_nifti_ext(name);
    if (id.empty()) continue;
    const fs::path label = labels / name;
    if (!fs::exists(label)) throw Error(Errc::io, "no label for " + name + " in " + labels.string());
    out.push_back({id, entry.path(), label});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (out.empty()) throw Error(Errc::invalid_argument, "no NIfTI volumes in " + images.string());
  return out;
}

LoadedSource prepare_source(std::string id, CtVolume volume, LabelMask label, const VesselParams& vessels) {
  require_same_dims(volume.dims(), label.dims(), "source label");
  LoadedSource s;
  s.id = std::move(id);
  s.liver = label.select_at_least(LabelMask::kLiver);
  if (!s.liver.any()) throw Error(Errc::empty_mask, "source " + s.id + " has no liver voxels");
  s.forbidden = segment_vessels(volume, s.liver, vessels);
  const BinaryMask lesions = label.select(LabelMask::kTumor);
  for (std::int64_t i = 0; i < lesions.size(); ++i) {
    if (lesions.test(i)) s.forbidden.set(i);
  }
  s.stats = masked_stats(volume.grid, s.liver);
  s.volume = std::move(volume);
  s.label = std::move(label);
  return s;
}

LoadedSource load_source(const PoolSource& source, const VesselParams& vessels) {
  const auto vbytes = read_file_bytes(source.volume);
  const auto lbytes = read_file_bytes(source.label);
  NiftiImage vimg = decode_nifti(vbytes);
  for (auto& v : vimg.grid.values()) v = std::clamp(v, CtVolume::kMinHu, CtVolume::kMaxHu);
  CtVolume volume{std::move(vimg.grid), vimg.affine, vimg.datatype};
  LabelMask label = read_mask(source.label);
  LoadedSource s = prepare_source(source.id, std::move(volume), std::move(label), vessels);
  s.volume_sha256 = sha256_hex(vbytes);
  s.label_sha256 = sha256_hex(lbytes);
  return s;
}

GeneratedItem generate_item(const LoadedSource& source, const std::vector<std::string>& class_names,
                            std::uint64_t item_seed, const Config& config) {
  if (class_names.empty()) throw Error(Errc::invalid_argument, "item needs at least one size class");
  std::vector<const SizeClass*> classes;
  for (const auto& name : class_names) classes.push_back(&find_size_class(config.size_classes, name));

  const int attempts = config.stream.max_item_attempts;
  for (int a = 0;; ++a) {
    const std::uint64_t attempt_seed = derive_seed(item_seed, SeedStream::item, static_cast<std::uint64_t>(a) + 1);
    GeneratedItem out;
    out.attempt = a;
    out.attempt_seed = attempt_seed;
    for (std::size_t t = 0; t < classes.size(); ++t) {
      out.specs.push_back(sample_spec(*classes[t], source.stats, derive_seed(attempt_seed, SeedStream::spec, t),
                                      config, source.volume.spacing()));
    }
    PlacementParams placement = config.placement;
    placement.seed = derive_seed(attempt_seed, SeedStream::placement);
    try {
      out.synthesis = compose_tumors(source.volume, source.liver, source.forbidden, out.specs, placement);
    } catch (const Error& e) {
      const bool retry = e.code() == Errc::placement_exhausted || e.code() == Errc::shape_rejected ||
                         e.code() == Errc::sub_resolution;
      if (!retry || a + 1 >= attempts) throw;
      continue;
    }
    // Keep lesions that were already in the host label.
    auto& label = out.synthesis.label;
    for (std::int64_t i = 0; i < label.grid().size(); ++i) {
      if (source.label[i] > label[i]) label.assign(i, source.label[i]);
    }
    return out;
  }
}

EncodedPair encode_pair(const GeneratedItem& item, const LoadedSource& source) {
  const auto& vol = item.synthesis.volume;
  EncodedPair out;
  out.image = gzip_compress(encode_nifti(vol.grid, source.volume.storage, source.volume.affine));
  const auto& g = item.synthesis.label.grid();
  VoxelGrid lab(g.dims(), g.spacing(), std::vector<float>(g.storage().begin(), g.storage().end()));
  out.label = gzip_compress(encode_nifti(lab, StorageType::uint8, source.volume.affine));
  return out;
}

namespace {

std::string item_name(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%05lld.nii.gz", static_cast<long long>(index));
  return buf;
}

// Runs fn(0..n-1) on `workers` threads; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::int64_t n, int workers, Fn fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::int64_t>(n, 1))));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(run);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// Generates, encodes and writes one item; synthesis errors become a status.
void produce(ItemEntry& entry, const LoadedSource& source, const Config& config, const fs::path& out_dir) {
  try {
    GeneratedItem item = generate_item(source, entry.classes, entry.seed, config);
    entry.status = "ok";
    entry.attempt = item.attempt;
    entry.attempt_seed = item.attempt_seed;
    entry.tumors = item.synthesis.tumors;
    const EncodedPair enc = encode_pair(item, source);
    entry.image = "images/" + item_name(entry.index);
    entry.label = "labels/" + item_name(entry.index);
    entry.image_sha256 = sha256_hex(enc.image);
    entry.label_sha256 = sha256_hex(enc.label);
    write_file_bytes(out_dir / entry.image, enc.image);
    write_file_bytes(out_dir / entry.label, enc.label);
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    entry.status = "error";
    entry.error_category = to_string(e.code());
    entry.error_message = e.what();
  }
}

SourceEntry source_entry(const PoolSource& p, const LoadedSource& s) {
  return {s.id, p.volume.empty() ? std::string() : fs::absolute(p.volume).lexically_normal().string(),
          p.label.empty() ? std::string() : fs::absolute(p.label).lexically_normal().string(),
          s.volume_sha256, s.label_sha256};
}

void prepare_out_dir(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "labels", ec);
  if (ec) throw Error(Errc::io, "cannot create " + out_dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

std::array<std::int64_t, 3> triple(const json& j, const char* key) {
  const auto& a = j.at(key);
  return {a.at(0).get<std::int64_t>(), a.at(1).get<std::int64_t>(), a.at(2).get<std::int64_t>()};
}

TumorRecord tumor_record_from_json(const json& j) {
  TumorRecord r;
  r.spec = tumor_spec_from_json(j.at("spec"));
  auto o = triple(j, "offset");
  r.offset = {o[0], o[1], o[2]};
  auto d = triple(j, "shape_dims");
  r.shape_dims = {d[0], d[1], d[2]};
  const auto& c = j.at("center_voxel");
  r.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  r.voxels = j.at("voxels").get<std::int64_t>();
  r.equivalent_radius_mm = j.at("equivalent_radius_mm").get<double>();
  r.influence_radius_mm = j.at("influence_radius_mm").get<double>();
  r.deform_seed_used = j.at("deform_seed_used").get<std::uint64_t>();
  r.deform_attempts = j.at("deform_attempts").get<int>();
  r.placement_seed = j.at("placement_seed").get<std::uint64_t>();
  r.placement_attempts = j.at("placement_attempts").get<int>();
  return r;
}

}  // namespace

ojson to_json(const ItemEntry& e) {
  ojson j;
  j["index"] = e.index;
  j["source"] = e.source;
  j["classes"] = e.classes;
  j["seed"] = e.seed;
  j["status"] = e.status;
  if (e.status != "ok") {
    j["error"] = {{"category", e.error_category}, {"message", e.error_message}};
    return j;
  }
  j["attempt"] = e.attempt;
  j["attempt_seed"] = e.attempt_seed;
  j["tumors"] = ojson::array();
  for (const auto& t : e.tumors) j["tumors"].push_back(to_json(t));
  j["image"] = e.image;
  j["label"] = e.label;
  j["image_sha256"] = e.image_sha256;
  j["label_sha256"] = e.label_sha256;
  return j;
}

ojson to_json(const DatasetManifest& m) {
  ojson j;
  j["kind"] = m.kind;
  j["generator_version"] = m.generator_version;
  j["global_seed"] = m.global_seed;
  j["config"] = m.config;
  j["sources"] = ojson::array();
  for (const auto& s : m.sources) {
    j["sources"].push_back({{"id", s.id},
                            {"volume", s.volume},
                            {"label", s.label},
                            {"volume_sha256", s.volume_sha256},
                            {"label_sha256", s.label_sha256}});
  }
  j["items"] = ojson::array();
  for (const auto& e : m.items) j["items"].push_back(to_json(e));
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.kind = j.at("kind").get<std::string>();
    m.generator_version = j.at("generator_version").get<std::string>();
    m.global_seed = j.at("global_seed").get<std::uint64_t>();
    m.config = to_json(config_from_json(j.at("config")));  // canonical key order
    for (const auto& s : j.at("sources")) {
      m.sources.push_back({s.at("id").get<std::string>(), s.at("volume").get<std::string>(),
                           s.at("label").get<std::string>(), s.at("volume_sha256").get<std::string>(),
                           s.at("label_sha256").get<std::string>()});
    }
    for (const auto& i : j.at("items")) {
      ItemEntry e;
      e.index = i.at("index").get<std::int64_t>();
      e.source = i.at("source").get<std::size_t>();
      e.classes = i.at("classes").get<std::vector<std::string>>();
      e.seed = i.at("seed").get<std::uint64_t>();
      e.status = i.at("status").get<std::string>();
      if (e.status == "ok") {
        e.attempt = i.at("attempt").get<int>();
        e.attempt_seed = i.at("attempt_seed").get<std::uint64_t>();
        for (const auto& t : i.at("tumors")) e.tumors.push_back(tumor_record_from_json(t));
        e.image = i.at("image").get<std::string>();
        e.label = i.at("label").get<std::string>();
        e.image_sha256 = i.at("image_sha256").get<std::string>();
        e.label_sha256 = i.at("label_sha256").get<std::string>();
      } else {
        e.error_category = i.at("error").at("category").get<std::string>();
        e.error_message = i.at("error").at("message").get<std::string>();
      }
      m.items.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("manifest: ") + e.what());
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

DatasetManifest make_validation_set(const std::vector<PoolSource>& pool, const Config& config,
                                    const fs::path& out_dir, int workers, const ProgressFn& progress) {
  if (pool.empty()) throw Error(Errc::invalid_argument, "validation pool is empty");
  const auto& classes = config.validation.classes;
  for (const auto& c : classes) find_size_class(config.size_classes, c);
  prepare_out_dir(out_dir);

  DatasetManifest m;
  m.kind = "validation";
  m.global_seed = config.seed;
  m.config = to_json(config);
  m.sources.resize(pool.size());
  const std::int64_t per = static_cast<std::int64_t>(classes.size());
  m.items.resize(pool.size() * classes.size());
  std::mutex progress_mutex;

  // One source per task so each host is loaded and segmented once.
  parallel_for(static_cast<std::int64_t>(pool.size()), workers, [&](std::int64_t s) {
    const LoadedSource src = load_source(pool[s], config.vessel);
    m.sources[s] = source_entry(pool[s], src);
    for (std::int64_t c = 0; c < per; ++c) {
      ItemEntry& e = m.items[s * per + c];
      e.index = s * per + c;
      e.source = static_cast<std::size_t>(s);
      e.classes = {classes[c]};
      e.seed = derive_seed(config.seed, SeedStream::item, static_cast<std::uint64_t>(e.index));
      produce(e, src, config, out_dir);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(e);
      }
    }
  });
  write_text(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

TrainingStream::TrainingStream(std::vector<PoolSource> pool, Config config)
    : pool_(std::move(pool)), config_(std::move(config)), size_(pool_.size()) {
  if (pool_.empty()) throw Error(Errc::invalid_argument, "stream pool is empty");
  validate(config_);
}

TrainingStream::TrainingStream(std::vector<std::shared_ptr<const LoadedSource>> sources, Config config)
    : config_(std::move(config)), size_(sources.size()) {
  if (sources.empty()) throw Error(Errc::invalid_argument, "stream pool is empty");
  validate(config_);
  pool_.resize(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    pool_[i].id = sources[i]->id;
    cache_[i] = std::move(sources[i]);
  }
}

StreamPlan TrainingStream::plan(std::int64_t index) const {
  if (index < 0) throw Error(Errc::invalid_argument, "stream index must be >= 0");
  StreamPlan p;
  p.index = index;
  p.seed = derive_seed(config_.seed, SeedStream::item, static_cast<std::uint64_t>(index));
  Rng rng(derive_seed(p.seed, SeedStream::item));
  p.source = std::uniform_int_distribution<std::size_t>(0, size_ - 1)(rng);
  const int count = std::uniform_int_distribution<int>(config_.stream.tumors_min, config_.stream.tumors_max)(rng);
  std::vector<double> weights;
  for (const auto& entry : config_.stream.class_mix) weights.push_back(entry.second);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  for (int t = 0; t < count; ++t) p.classes.push_back(config_.stream.class_mix[pick(rng)].first);
  return p;
}

std::shared_ptr<const LoadedSource> TrainingStream::source(std::size_t i) const {
  if (i >= size_) throw Error(Errc::invalid_argument, "source index out of range");
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(i);
    if (it != cache_.end()) return it->second;
  }
  // Loaded outside the lock; a concurrent duplicate load is harmless.
  auto loaded = std::make_shared<const LoadedSource>(load_source(pool_[i], config_.vessel));
  std::lock_guard lock(mutex_);
  return cache_.emplace(i, std::move(loaded)).first->second;
}

GeneratedItem TrainingStream::item(std::int64_t index) const {
  const StreamPlan p = plan(index);
  return generate_item(*source(p.source), p.classes, p.seed, config_);
}

DatasetManifest write_stream(const TrainingStream& stream, std::int64_t count, const fs::path& out_dir,
                             int workers, const ProgressFn& progress) {
  if (count < 0) throw Error(Errc::invalid_argument, "stream count must be >= 0");
  prepare_out_dir(out_dir);
  const Config& config = stream.config();
  DatasetManifest m;
  m.kind = "stream";
  m.global_seed = config.seed;
  m.config = to_json(config);
  m.items.resize(static_cast<std::size_t>(count));
  std::mutex progress_mutex;

  parallel_for(count, workers, [&](std::int64_t i) {
    const StreamPlan p = stream.plan(i);
    ItemEntry& e = m.items[i];
    e.index = i;
    e.source = p.source;
    e.classes = p.classes;
    e.seed = p.seed;
    produce(e, *stream.source(p.source), config, out_dir);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(e);
    }
  });
  for (std::size_t s = 0; s < stream.pool_size(); ++s) {
    m.sources.push_back(source_entry(stream.pool()[s], *stream.source(s)));
  }

  std::string records;
  for (const auto& e : m.items) records += to_json(e).dump() + "\n";
  write_text(out_dir / "records.jsonl", records);
  write_text(out_dir / "manifest.json", to_json(m).dump(2) + "\n");
  return m;
}

ItemEntry regenerate_item(const DatasetManifest& manifest, std::int64_t index, const fs::path& out_dir) {
  auto it = std::find_if(manifest.items.begin(), manifest.items.end(),
                         [&](const ItemEntry& e) { return e.index == index; });
  if (it == manifest.items.end()) {
    throw Error(Errc::invalid_argument, "manifest has no item " + std::to_string(index));
  }
  if (it->source >= manifest.sources.size()) throw Error(Errc::parse, "manifest item references unknown source");
  const SourceEntry& se = manifest.sources[it->source];
  if (se.volume.empty()) throw Error(Errc::invalid_argument, "item source was not loaded from disk");
  const Config config = config_from_json(json::parse(manifest.config.dump()));
  const LoadedSource src = load_source({se.id, se.volume, se.label}, config.vessel);
  if (src.volume_sha256 != se.volume_sha256 || src.label_sha256 != se.label_sha256) {
    throw Error(Errc::io, "source " + se.id + " no longer matches its recorded hash");
  }
  prepare_out_dir(out_dir);
  ItemEntry e;
  e.index = it->index;
  e.source = it->source;
  e.classes = it->classes;
  e.seed = it->seed;
  produce(e, src, config, out_dir);
  return e;
}

}  // namespace tumorsynth
