#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tumorsynth/grid.hpp"
#include "tumorsynth/size_class.hpp"

namespace tumorsynth {

/// 2|P∩G| / (|P|+|G|); two empty masks score 1.
double dsc(const BinaryMask& pred, const BinaryMask& gt);

struct BinCount {
  std::string name;
  std::int64_t total = 0;
  std::int64_t detected = 0;
  double sensitivity() const {
    return total ? static_cast<double>(detected) / static_cast<double>(total) : 0.0;
  }
};

struct LesionResult {
  std::int64_t voxels = 0;
  double radius_mm = 0.0;
  std::size_t bin = 0;
  double overlap = 0.0;
  bool detected = false;
};

/// Per-lesion detection. Lesions are 26-connected components of `gt`;
/// a lesion is detected iff |lesion ∩ pred| / |lesion| >= overlap_frac.
/// Lesions are binned by equivalent-sphere radius with size_bin().
std::vector<BinCount> lesion_sensitivity(const BinaryMask& pred, const BinaryMask& gt,
                                         const std::vector<SizeClass>& bins,
                                         double overlap_frac = 0.1,
                                         std::vector<LesionResult>* lesions = nullptr);

struct ConfidenceInterval {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the mean over case-level resampling.
ConfidenceInterval bootstrap_ci(std::span<const double> values, double level = 0.95,
                                int resamples = 1000, std::uint64_t seed = 0);

struct CaseEval {
  std::string id;
  double dsc = 0.0;
  std::vector<BinCount> bins;
};

struct EvalReport {
  std::vector<CaseEval> cases;
  ConfidenceInterval dsc;
  double ci_level = 0.95;
  int bootstrap_resamples = 1000;
  std::vector<BinCount> bins;
  double overlap_frac = 0.1;
  std::string sensitivity_kind = "per-lesion";
};

struct EvalOptions {
  std::vector<SizeClass> bins = default_size_classes();
  double overlap_frac = 0.1;
  double ci_level = 0.95;
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 0;
};

/// Aggregates per-case evaluations into a report.
EvalReport summarize(std::vector<CaseEval> cases, const EvalOptions& options);
CaseEval evaluate_case(std::string id, const BinaryMask& pred, const BinaryMask& gt,
                       const EvalOptions& options);

nlohmann::ordered_json to_json(const EvalReport& report);
std::string format_table(const EvalReport& report);

}  // namespace tumorsynth
