#include "tumorsynth/selection.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tumorsynth/error.hpp"
#include "tumorsynth/random.hpp"

namespace tumorsynth {

void MetricTrajectory::add(std::int64_t epoch, std::string_view metric, double value) {
  auto it = series_.find(metric);
  if (it == series_.end()) it = series_.emplace(std::string(metric), std::vector<EpochValue>{}).first;
  if (!it->second.empty() && epoch <= it->second.back().epoch) {
    throw Error(Errc::parse, "run " + std::to_string(run_) + " metric '" + std::string(metric) +
                                 "': epoch " + std::to_string(epoch) +
                                 " is not after epoch " + std::to_string(it->second.back().epoch));
  }
  it->second.push_back({epoch, value});
  records_.push_back({run_, epoch, std::string(metric), value});
}

bool MetricTrajectory::has_metric(std::string_view metric) const {
  auto it = series_.find(metric);
  return it != series_.end() && !it->second.empty();
}

const std::vector<EpochValue>& MetricTrajectory::series(std::string_view metric) const {
  auto it = series_.find(metric);
  if (it == series_.end() || it->second.empty()) {
    throw Error(Errc::metric_absent, "run " + std::to_string(run_) + " has no values for metric '" +
                                         std::string(metric) + "'");
  }
  return it->second;
}

std::vector<std::string> MetricTrajectory::metrics() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : series_) out.push_back(name);
  return out;
}

std::size_t MetricTrajectory::size() const { return records_.size(); }

std::vector<MetricTrajectory> parse_trajectories(std::istream& in) {
  std::vector<MetricTrajectory> runs;
  std::map<std::int64_t, std::size_t> slot;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse, where + e.what());
    }
    if (!j.is_object() || j.size() != 4 || !j.contains("run") || !j.contains("epoch") ||
        !j.contains("metric") || !j.contains("value")) {
      throw Error(Errc::parse, where + "expected exactly the keys run, epoch, metric, value");
    }
    if (!j["run"].is_number_integer() || !j["epoch"].is_number_integer() ||
        !j["metric"].is_string() || !j["value"].is_number()) {
      throw Error(Errc::parse, where + "field has the wrong type");
    }
    const auto run = j["run"].get<std::int64_t>();
    auto [it, inserted] = slot.emplace(run, runs.size());
    if (inserted) runs.emplace_back(run);
    try {
      runs[it->second].add(j["epoch"].get<std::int64_t>(), j["metric"].get<std::string>(),
                           j["value"].get<double>());
    } catch (const Error& e) {
      throw Error(Errc::parse, where + e.what());
    }
  }
  return runs;
}

std::vector<MetricTrajectory> read_trajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  return parse_trajectories(in);
}

std::string to_jsonl(const TrajectoryRecord& r) {
  nlohmann::ordered_json j;
  j["run"] = r.run;
  j["epoch"] = r.epoch;
  j["metric"] = r.metric;
  j["value"] = r.value;
  return j.dump();
}

void write_jsonl(std::ostream& out, const MetricTrajectory& trajectory) {
  for (const auto& r : trajectory.records()) out << to_jsonl(r) << '\n';
}

SelectionResult select_best(const MetricTrajectory& trajectory, std::string_view metric,
                            Direction direction) {
  const auto& s = trajectory.series(metric);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const bool better = direction == Direction::maximize ? s[i].value > s[best].value
                                                         : s[i].value < s[best].value;
    if (better) best = i;
  }
  return {s[best].epoch, s[best].value, "earliest"};
}

double regret(const MetricTrajectory& validation, const MetricTrajectory& test,
              std::string_view validation_metric, std::string_view test_metric,
              Direction direction) {
  const auto& v = validation.series(validation_metric);
  const auto& t = test.series(test_metric);
  if (v.size() != t.size() ||
      !std::equal(v.begin(), v.end(), t.begin(),
                  [](const EpochValue& a, const EpochValue& b) { return a.epoch == b.epoch; })) {
    throw Error(Errc::epoch_grid_mismatch, "validation and test trajectories use different epochs");
  }
  const SelectionResult chosen = select_best(validation, validation_metric, direction);
  const SelectionResult optimal = select_best(test, test_metric, direction);
  double at_chosen = 0.0;
  for (const auto& p : t) {
    if (p.epoch == chosen.epoch) at_chosen = p.value;
  }
  const double gap = direction == Direction::maximize ? optimal.value - at_chosen
                                                      : at_chosen - optimal.value;
  return std::max(0.0, gap);
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::invalid_argument, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

double uniform(Rng& rng, const std::pair<double, double>& range) {
  std::uniform_real_distribution<double> u(range.first, range.second);
  return u(rng);
}

void check(const StudyConfig& c) {
  if (c.trials < 1) throw Error(Errc::invalid_argument, "trials must be >= 1");
  if (c.checkpoints < 1 || c.cadence < 1) {
    throw Error(Errc::invalid_argument, "checkpoints and cadence must be >= 1");
  }
  if (c.n_val.empty()) throw Error(Errc::invalid_argument, "at least one n_val arm is required");
  for (int n : c.n_val) {
    if (n < 1) throw Error(Errc::invalid_argument, "n_val entries must be >= 1");
  }
  if (c.noise_sd < 0.0 || c.noise_scale < 0.0) {
    throw Error(Errc::invalid_argument, "noise parameters must be >= 0");
  }
}

}  // namespace

MetricTrajectory simulate_test_curve(const StudyConfig& config, int trial) {
  Rng rng(derive_seed(config.seed, SeedStream::study, static_cast<std::uint64_t>(trial)));
  const double peak = uniform(rng, config.curve.peak);
  const double tau = uniform(rng, config.curve.tau);
  const double onset = tau * uniform(rng, config.curve.onset_ratio);
  const double decline = uniform(rng, config.curve.decline);
  MetricTrajectory curve(trial);
  for (int k = 1; k <= config.checkpoints; ++k) {
    const double e = static_cast<double>(k) * config.cadence;
    const double f = peak * (1.0 - std::exp(-e / tau)) - decline * std::max(0.0, e - onset);
    curve.add(static_cast<std::int64_t>(k) * config.cadence, "dsc", f);
  }
  return curve;
}

MetricTrajectory simulate_validation_curve(const StudyConfig& config, int trial, std::size_t arm,
                                           const MetricTrajectory& test) {
  if (arm >= config.n_val.size()) throw Error(Errc::invalid_argument, "study arm out of range");
  Rng rng(derive_seed(derive_seed(config.seed, SeedStream::study, static_cast<std::uint64_t>(trial)),
                      SeedStream::item, arm));
  const double sd =
      config.noise_sd * config.noise_scale / std::sqrt(static_cast<double>(config.n_val[arm]));
  std::normal_distribution<double> noise(0.0, 1.0);
  MetricTrajectory val(trial);
  for (const auto& p : test.series("dsc")) {
    const double eps = noise(rng);
    val.add(p.epoch, "dsc", p.value + sd * eps);
  }
  return val;
}

StudyResult simulate_selection_study(const StudyConfig& config) {
  check(config);
  StudyResult result;
  for (int n : config.n_val) result.arms.push_back(StudyArm{n, {}, 0.0, 0.0, 0.0});

  for (int trial = 0; trial < config.trials; ++trial) {
    const MetricTrajectory test = simulate_test_curve(config, trial);
    for (std::size_t a = 0; a < result.arms.size(); ++a) {
      const MetricTrajectory val = simulate_validation_curve(config, trial, a, test);
      result.arms[a].regrets.push_back(regret(val, test, "dsc", "dsc"));
    }
  }

  for (auto& arm : result.arms) {
    arm.median = median(arm.regrets);
    double sum = 0.0;
    std::size_t zeros = 0;
    for (double r : arm.regrets) {
      sum += r;
      if (r == 0.0) ++zeros;
    }
    arm.mean = sum / static_cast<double>(arm.regrets.size());
    arm.zero_fraction = static_cast<double>(zeros) / static_cast<double>(arm.regrets.size());
  }
  return result;
}

}  // namespace tumorsynth
