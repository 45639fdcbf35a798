#include "tumorsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tumorsynth/components.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {

double dsc(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_dims(pred.dims(), gt.dims(), "dsc");
  std::int64_t p = 0, g = 0, both = 0;
  for (std::int64_t i = 0; i < pred.size(); ++i) {
    const bool a = pred.test(i), b = gt.test(i);
    p += a;
    g += b;
    both += a && b;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

std::vector<BinCount> lesion_sensitivity(const BinaryMask& pred, const BinaryMask& gt,
                                         const std::vector<SizeClass>& bins, double overlap_frac,
                                         std::vector<LesionResult>* lesions) {
  require_same_dims(pred.dims(), gt.dims(), "lesion_sensitivity");
  if (bins.empty()) throw Error(Errc::invalid_argument, "no size bins given");
  std::vector<BinCount> out;
  for (const auto& b : bins) out.push_back({b.name, 0, 0});
  for (const auto& comp : connected_components(gt, Connectivity::twentysix)) {
    LesionResult l;
    l.voxels = comp.count();
    l.radius_mm = equivalent_radius_mm(l.voxels, gt.spacing());
    l.bin = size_bin(bins, l.radius_mm);
    std::int64_t hit = 0;
    for (auto i : comp.voxels) hit += pred.test(i);
    l.overlap = static_cast<double>(hit) / static_cast<double>(l.voxels);
    l.detected = l.overlap >= overlap_frac;
    ++out[l.bin].total;
    out[l.bin].detected += l.detected;
    if (lesions) lesions->push_back(l);
  }
  return out;
}

namespace {

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, sorted.size() - 1);
  return std::lerp(sorted[i], sorted[j], pos - static_cast<double>(i));
}

}  // namespace

ConfidenceInterval bootstrap_ci(std::span<const double> values, double level, int resamples,
                                std::uint64_t seed) {
  if (values.empty()) throw Error(Errc::invalid_argument, "bootstrap over an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::invalid_argument, "level must lie in (0,1)");
  if (resamples < 1) throw Error(Errc::invalid_argument, "resamples must be >= 1");

  ConfidenceInterval ci;
  ci.mean = mean_of(values);
  Rng rng(derive_seed(seed, SeedStream::bootstrap));
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> draw(values.size());
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    for (auto& d : draw) d = values[pick(rng)];
    m = mean_of(draw);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  ci.lo = std::min(ci.mean, percentile(means, tail));
  ci.hi = std::max(ci.mean, percentile(means, 1.0 - tail));
  return ci;
}

CaseEval evaluate_case(std::string id, const BinaryMask& pred, const BinaryMask& gt,
                       const EvalOptions& options) {
  CaseEval c;
  c.id = std::move(id);
  c.dsc = dsc(pred, gt);
  c.bins = lesion_sensitivity(pred, gt, options.bins, options.overlap_frac);
  return c;
}

EvalReport summarize(std::vector<CaseEval> cases, const EvalOptions& options) {
  EvalReport r;
  r.ci_level = options.ci_level;
  r.bootstrap_resamples = options.bootstrap_resamples;
  r.overlap_frac = options.overlap_frac;
  for (const auto& b : options.bins) r.bins.push_back({b.name, 0, 0});
  std::vector<double> scores;
  for (const auto& c : cases) {
    scores.push_back(c.dsc);
    for (std::size_t i = 0; i < c.bins.size() && i < r.bins.size(); ++i) {
      r.bins[i].total += c.bins[i].total;
      r.bins[i].detected += c.bins[i].detected;
    }
  }
  if (!scores.empty()) {
    r.dsc = bootstrap_ci(scores, options.ci_level, options.bootstrap_resamples, options.seed);
  }
  r.cases = std::move(cases);
  return r;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : report.cases) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["dsc"] = c.dsc;
    cj["lesions"] = nlohmann::ordered_json::array();
    for (const auto& b : c.bins) {
      cj["lesions"].push_back({{"bin", b.name}, {"total", b.total}, {"detected", b.detected}});
    }
    j["cases"].push_back(cj);
  }
  j["dsc"] = {{"mean", report.dsc.mean},
              {"ci_lo", report.dsc.lo},
              {"ci_hi", report.dsc.hi},
              {"ci_level", report.ci_level},
              {"ci_method", "percentile bootstrap"},
              {"resamples", report.bootstrap_resamples}};
  nlohmann::ordered_json sens;
  sens["kind"] = report.sensitivity_kind;
  sens["overlap_frac"] = report.overlap_frac;
  sens["bins"] = nlohmann::ordered_json::array();
  for (const auto& b : report.bins) {
    sens["bins"].push_back({{"bin", b.name},
                            {"total", b.total},
                            {"detected", b.detected},
                            {"sensitivity", b.total ? nlohmann::ordered_json(b.sensitivity())
                                                    : nlohmann::ordered_json(nullptr)}});
  }
  j["sensitivity"] = sens;
  return j;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "cases: %zu\nDSC mean %.4f  %.0f%% CI [%.4f, %.4f]\n",
                report.cases.size(), report.dsc.mean, 100.0 * report.ci_level, report.dsc.lo,
                report.dsc.hi);
  os << buf;
  std::snprintf(buf, sizeof buf, "sensitivity (%s, overlap >= %.2f)\n",
                report.sensitivity_kind.c_str(), report.overlap_frac);
  os << buf;
  os << "  bin        lesions  detected  sensitivity\n";
  for (const auto& b : report.bins) {
    if (b.total) {
      std::snprintf(buf, sizeof buf, "  %-10s %7lld  %8lld  %11.4f\n", b.name.c_str(),
                    static_cast<long long>(b.total), static_cast<long long>(b.detected),
                    b.sensitivity());
    } else {
      std::snprintf(buf, sizeof buf, "  %-10s %7lld  %8lld  %11s\n", b.name.c_str(), 0LL, 0LL, "n/a");
    }
    os << buf;
  }
  return os.str();
}

}  // namespace tumorsynth
