#include <doctest.h>

#include <functional>
#include <sstream>

#include "tumorsynth/error.hpp"
#include "tumorsynth/selection.hpp"

using namespace tumorsynth;

namespace {

MetricTrajectory curve(std::initializer_list<std::pair<std::int64_t, double>> points,
                       const char* metric = "dsc") {
  MetricTrajectory t;
  for (auto [e, v] : points) t.add(e, metric, v);
  return t;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::invalid_argument;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("argmax and argmin") {
  const auto t = curve({{100, 0.2}, {200, 0.5}, {300, 0.4}});
  CHECK(select_best(t, "dsc", Direction::maximize).epoch == 200);
  CHECK(select_best(t, "dsc", Direction::minimize).epoch == 100);
}

TEST_CASE("ties go to the earliest epoch") {
  const auto t = curve({{100, 0.5}, {200, 0.5}});
  const SelectionResult r = select_best(t, "dsc", Direction::maximize);
  CHECK(r.epoch == 100);
  CHECK(r.tie_policy == "earliest");
  CHECK(select_best(t, "dsc", Direction::minimize).epoch == 100);
}

TEST_CASE("missing metric") {
  const auto t = curve({{100, 0.5}});
  CHECK(code_of([&] { select_best(t, "loss", Direction::minimize); }) == Errc::metric_absent);
}

TEST_CASE("regret") {
  const auto test = curve({{100, 0.30}, {200, 0.34}, {300, 0.31}});
  CHECK(regret(test, test, "dsc", "dsc") == 0.0);
  const auto val = curve({{100, 0.60}, {200, 0.50}, {300, 0.55}});
  CHECK(regret(val, test, "dsc", "dsc") == doctest::Approx(0.04));
  const auto flat = curve({{100, 0.3}, {200, 0.3}, {300, 0.3}});
  CHECK(regret(val, flat, "dsc", "dsc") == 0.0);
  const auto shifted = curve({{100, 0.1}, {250, 0.2}, {300, 0.3}});
  CHECK(code_of([&] { regret(val, shifted, "dsc", "dsc"); }) == Errc::epoch_grid_mismatch);
}

TEST_CASE("regret ignores monotone transforms of the validation curve") {
  const auto test = curve({{1, 0.2}, {2, 0.6}, {3, 0.5}, {4, 0.1}});
  const auto val = curve({{1, 0.1}, {2, 0.3}, {3, 0.4}, {4, 0.2}});
  const auto val2 = curve({{1, 10.0}, {2, 30.0}, {3, 40.0}, {4, 20.0}});
  CHECK(regret(val, test, "dsc", "dsc") == regret(val2, test, "dsc", "dsc"));
  CHECK(regret(val, test, "dsc", "dsc") == doctest::Approx(0.1));
}

TEST_CASE("trajectory JSONL round trip and parse errors") {
  std::stringstream ss;
  MetricTrajectory t(3);
  t.add(100, "dsc", 0.25);
  t.add(100, "loss", 1.5);
  t.add(200, "dsc", 0.5);
  write_jsonl(ss, t);
  const auto runs = parse_trajectories(ss);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].run() == 3);
  CHECK(runs[0].series("dsc").size() == 2);
  CHECK(runs[0].records().size() == 3);

  for (const char* bad : {"{\"run\":0,\"epoch\":1,\"metric\":\"dsc\"}",
                          "{\"run\":0,\"epoch\":1,\"metric\":\"dsc\",\"value\":\"x\"}",
                          "{\"run\":0,\"epoch\":1,\"metric\":\"dsc\",\"value\":1,\"extra\":2}",
                          "not json",
                          "{\"run\":0,\"epoch\":2,\"metric\":\"dsc\",\"value\":1}\n"
                          "{\"run\":0,\"epoch\":1,\"metric\":\"dsc\",\"value\":1}"}) {
    std::stringstream in(bad);
    CHECK(code_of([&] { parse_trajectories(in); }) == Errc::parse);
  }
}

TEST_CASE("median") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("study is deterministic per seed") {
  StudyConfig c;
  c.trials = 1;
  c.seed = 12;
  const StudyResult a = simulate_selection_study(c);
  const StudyResult b = simulate_selection_study(c);
  CHECK(a.arms[0].regrets == b.arms[0].regrets);
  CHECK(a.arms[1].regrets == b.arms[1].regrets);
  // trial t is independent of the trial count
  StudyConfig more = c;
  more.trials = 5;
  CHECK(simulate_selection_study(more).arms[0].regrets[0] == a.arms[0].regrets[0]);
}

TEST_CASE("noiseless validation never regrets") {
  StudyConfig c;
  c.trials = 50;
  c.noise_scale = 0.0;
  for (const auto& arm : simulate_selection_study(c).arms) {
    for (double r : arm.regrets) CHECK(r == 0.0);
    CHECK(arm.zero_fraction == 1.0);
  }
}

TEST_CASE("larger validation sets regret less") {
  StudyConfig c;
  c.n_val = {5, 50, 150};
  const StudyResult r = simulate_selection_study(c);
  REQUIRE(r.arms.size() == 3);
  CHECK(r.arms[1].median < r.arms[0].median);
  CHECK(r.arms[2].median <= r.arms[1].median);
  CHECK(r.arms[2].median < r.arms[0].median);
  CHECK(r.arms[2].zero_fraction >= 0.5);
}

TEST_CASE("test curve shape") {
  StudyConfig c;
  const MetricTrajectory t = simulate_test_curve(c, 0);
  const auto& s = t.series("dsc");
  REQUIRE(s.size() == 60);
  CHECK(s.front().epoch == 100);
  CHECK(s.back().epoch == 6000);
  // rises, peaks, then declines
  const auto best = select_best(t, "dsc", Direction::maximize);
  CHECK(best.epoch > s.front().epoch);
  CHECK(best.epoch < s.back().epoch);
}

TEST_CASE("invalid study configs") {
  StudyConfig c;
  c.trials = 0;
  CHECK_THROWS_AS(simulate_selection_study(c), Error);
  c = StudyConfig{};
  c.n_val = {};
  CHECK_THROWS_AS(simulate_selection_study(c), Error);
  c = StudyConfig{};
  c.n_val = {0};
  CHECK_THROWS_AS(simulate_selection_study(c), Error);
}

}
