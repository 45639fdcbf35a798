#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tumorsynth {

enum class Direction { maximize, minimize };

/// One line of the trajectory wire format:
/// {"run": int, "epoch": int, "metric": string, "value": number}
struct TrajectoryRecord {
  std::int64_t run = 0;
  std::int64_t epoch = 0;
  std::string metric;
  double value = 0.0;
};

struct EpochValue {
  std::int64_t epoch = 0;
  double value = 0.0;
};

/// Per-run checkpoint scores. Epochs are strictly increasing for each
/// metric and each (epoch, metric) pair has one value.
class MetricTrajectory {
 public:
  explicit MetricTrajectory(std::int64_t run = 0) : run_(run) {}

  std::int64_t run() const { return run_; }

  /// Errc::parse if `epoch` does not exceed the previous epoch for `metric`.
  void add(std::int64_t epoch, std::string_view metric, double value);

  bool has_metric(std::string_view metric) const;
  /// Errc::metric_absent if the metric has no values.
  const std::vector<EpochValue>& series(std::string_view metric) const;
  std::vector<std::string> metrics() const;
  std::size_t size() const;

  /// Records in insertion order.
  const std::vector<TrajectoryRecord>& records() const { return records_; }

 private:
  std::int64_t run_;
  std::map<std::string, std::vector<EpochValue>, std::less<>> series_;
  std::vector<TrajectoryRecord> records_;
};

/// Parses JSONL; blank lines are skipped. Runs are returned in order of
/// first appearance. Errc::parse names the offending line.
std::vector<MetricTrajectory> parse_trajectories(std::istream& in);
std::vector<MetricTrajectory> read_trajectories(const std::string& path);

std::string to_jsonl(const TrajectoryRecord& record);
void write_jsonl(std::ostream& out, const MetricTrajectory& trajectory);

struct SelectionResult {
  std::int64_t epoch = 0;
  double value = 0.0;
  std::string tie_policy = "earliest";
};

/// Arg-best epoch for `metric`; ties go to the earliest epoch.
SelectionResult select_best(const MetricTrajectory& trajectory, std::string_view metric,
                            Direction direction);

/// Test-metric gap between the test-optimal checkpoint and the checkpoint
/// chosen on validation. Both series must share the same epoch grid
/// (Errc::epoch_grid_mismatch otherwise). Always >= 0.
double regret(const MetricTrajectory& validation, const MetricTrajectory& test,
              std::string_view validation_metric, std::string_view test_metric,
              Direction direction = Direction::maximize);

/// Simulated rise-then-overfit training curves.
/// f(e) = peak * (1 - exp(-e / tau)) - decline * max(0, e - onset), with
/// onset = tau * onset_ratio; each parameter drawn uniformly per trial.
struct CurveParams {
  std::pair<double, double> peak{0.45, 0.70};
  std::pair<double, double> tau{150.0, 400.0};
  std::pair<double, double> onset_ratio{1.5, 3.0};
  std::pair<double, double> decline{1.5e-4, 3.0e-4};
};

struct StudyConfig {
  int trials = 200;
  int checkpoints = 60;
  int cadence = 100;
  std::vector<int> n_val{5, 150};
  /// Per-case score noise; a validation set of n cases sees sd / sqrt(n).
  double noise_sd = 0.05;
  /// Multiplies noise_sd; 0 models an infinitely large validation set.
  double noise_scale = 1.0;
  CurveParams curve;
  std::uint64_t seed = 0;
};

struct StudyArm {
  int n_val = 0;
  std::vector<double> regrets;  // indexed by trial
  double median = 0.0;
  double mean = 0.0;
  double zero_fraction = 0.0;
};

struct StudyResult {
  std::vector<StudyArm> arms;
};

/// Latent test curve for one trial, sampled on the checkpoint grid.
MetricTrajectory simulate_test_curve(const StudyConfig& config, int trial);

/// Noisy validation observation of `test` for study arm `arm`.
MetricTrajectory simulate_validation_curve(const StudyConfig& config, int trial, std::size_t arm,
                                           const MetricTrajectory& test);

/// Each trial draws a latent test curve, observes one noisy validation curve
/// per arm, selects on validation and records the regret. Trial t depends only
/// on (config, t).
StudyResult simulate_selection_study(const StudyConfig& config);

double median(std::vector<double> values);

}  // namespace tumorsynth
