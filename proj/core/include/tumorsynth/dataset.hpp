#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tumorsynth/compose.hpp"
#include "tumorsynth/config.hpp"
#include "tumorsynth/size_class.hpp"
#include "tumorsynth/vessels.hpp"

namespace tumorsynth {

/// Draws a tumor spec for one size class. The radius is log-uniform in the
/// class range; the semi-axes are r*e^x, r*e^y, r*e^(-x-y) so that
/// (abc)^(1/3) == r, with the axis ratio held under the class cap (cap 1
/// gives a sphere).
TumorSpec sample_spec(const SizeClass& size_class, const IntensityStats& host,
                      std::uint64_t seed, const Config& config, const Spacing& spacing);

/// A healthy host: CT volume plus liver label file.
struct PoolSource {
  std::string id;
  std::filesystem::path volume;
  std::filesystem::path label;
};

/// Reads `pool.json`-style lists: [{"id", "volume", "label"}]. Relative
/// paths are resolved against `base`.
std::vector<PoolSource> pool_from_json(const nlohmann::json& j, const std::filesystem::path& base);
std::vector<PoolSource> load_pool(const std::filesystem::path& path);
/// Pairs every `<id>.nii[.gz]` in `images` with the same name in `labels`.
std::vector<PoolSource> pool_from_dirs(const std::filesystem::path& images,
                                       const std::filesystem::path& labels);

struct LoadedSource {
  std::string id;
  CtVolume volume;
  LabelMask label;
  BinaryMask liver;
  /// Vessels plus any lesions already present; placement keeps clear of it.
  BinaryMask forbidden;
  IntensityStats stats;
  std::string volume_sha256;
  std::string label_sha256;
};

LoadedSource load_source(const PoolSource& source, const VesselParams& vessels);
LoadedSource prepare_source(std::string id, CtVolume volume, LabelMask label,
                            const VesselParams& vessels);

struct GeneratedItem {
  SynthesisResult synthesis;
  std::vector<TumorSpec> specs;
  /// 0-based index of the attempt that succeeded.
  int attempt = 0;
  std::uint64_t attempt_seed = 0;
};

/// One image/label pair from `source` with a tumor per entry of
/// `class_names`. Placement, shape or resolution failures trigger a fresh
/// spec draw, up to stream.max_item_attempts times.
GeneratedItem generate_item(const LoadedSource& source, const std::vector<std::string>& class_names,
                            std::uint64_t item_seed, const Config& config);

/// Encoded output files, held in memory so they can be hashed before writing.
struct EncodedPair {
  std::vector<std::uint8_t> image;
  std::vector<std::uint8_t> label;
};
EncodedPair encode_pair(const GeneratedItem& item, const LoadedSource& source);

struct ItemEntry {
  std::int64_t index = 0;
  std::size_t source = 0;
  std::vector<std::string> classes;
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::string error_category;
  std::string error_message;
  int attempt = 0;
  std::uint64_t attempt_seed = 0;
  std::vector<TumorRecord> tumors;
  std::string image;
  std::string label;
  std::string image_sha256;
  std::string label_sha256;
};

struct SourceEntry {
  std::string id;
  std::string volume;
  std::string label;
  std::string volume_sha256;
  std::string label_sha256;
};

struct DatasetManifest {
  std::string kind;
  std::string generator_version = kGeneratorVersion;
  std::uint64_t global_seed = 0;
  nlohmann::ordered_json config;
  std::vector<SourceEntry> sources;
  std::vector<ItemEntry> items;
};

nlohmann::ordered_json to_json(const DatasetManifest& manifest);
nlohmann::ordered_json to_json(const ItemEntry& item);
DatasetManifest manifest_from_json(const nlohmann::json& j);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Called after each finished item; may run on a worker thread.
using ProgressFn = std::function<void(const ItemEntry&)>;

/// |pool| x |classes| pairs, item k = source * |classes| + class, written to
/// out_dir/images and out_dir/labels with out_dir/manifest.json. Output is
/// independent of `workers`. Failed items are recorded with their status.
DatasetManifest make_validation_set(const std::vector<PoolSource>& pool, const Config& config,
                                    const std::filesystem::path& out_dir, int workers = 1,
                                    const ProgressFn& progress = {});

struct StreamPlan {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  std::size_t source = 0;
  std::vector<std::string> classes;
};

/// Random-access training stream: item i depends only on the pool, the
/// config (seed, class_mix, tumor count range) and i.
class TrainingStream {
 public:
  TrainingStream(std::vector<PoolSource> pool, Config config);
  /// In-memory pool, for callers that already hold the sources.
  TrainingStream(std::vector<std::shared_ptr<const LoadedSource>> sources, Config config);

  StreamPlan plan(std::int64_t index) const;
  GeneratedItem item(std::int64_t index) const;
  std::shared_ptr<const LoadedSource> source(std::size_t i) const;
  std::size_t pool_size() const { return size_; }
  const Config& config() const { return config_; }
  const std::vector<PoolSource>& pool() const { return pool_; }

 private:
  std::vector<PoolSource> pool_;
  Config config_;
  std::size_t size_ = 0;
  mutable std::mutex mutex_;
  mutable std::map<std::size_t, std::shared_ptr<const LoadedSource>> cache_;
};

/// Items [0, count) to out_dir plus records.jsonl (one line per item in
/// index order) and manifest.json.
DatasetManifest write_stream(const TrainingStream& stream, std::int64_t count,
                             const std::filesystem::path& out_dir, int workers = 1,
                             const ProgressFn& progress = {});

/// Rebuilds one manifest item into out_dir and returns its entry with fresh
/// hashes. Errc::io if a source file no longer matches its recorded hash.
ItemEntry regenerate_item(const DatasetManifest& manifest, std::int64_t index,
                          const std::filesystem::path& out_dir);

}  // namespace tumorsynth
