#include <doctest.h>

#include <cmath>

#include "kframes/sim_harness.hpp"
#include "support/oracles.hpp"

using namespace kframes;

TEST_CASE("generate_video examples") {
  const auto v = generate_video(256, 8, 7);
  REQUIRE(v.evidence.size() == 1);
  CHECK(v.evidence[0].length() == 8);
  CHECK(v.evidence[0].start >= 0);
  CHECK(v.evidence[0].end <= 255);
  CHECK(generate_video(256, 8, 7).evidence == v.evidence);
  CHECK(generate_video(256, 256, 3).evidence[0] == ClipSpan{0, 255});
  CHECK_THROWS_AS(generate_video(16, 17, 0), Error);
  CHECK_THROWS_AS(generate_video(16, 0, 0), Error);

  const auto clips = v.oracle_clips();
  REQUIRE(clips.size() == 1);
  CHECK(clips[0].span == v.evidence[0]);
  CHECK(clips[0].priority == Priority::P1);
}

TEST_CASE("needles are their own scenes") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto v = generate_video(256, 8, seed, 2);
    REQUIRE(v.evidence.size() == 2);
    CHECK(v.evidence[0].end + 1 < v.evidence[1].start);
    CHECK(v.scenes.frame_count() == 256);
    for (const auto& e : v.evidence) {
      bool is_scene = false;
      for (const auto& s : v.scenes.scenes()) is_scene |= s == e;
      CHECK(is_scene);
    }
  }
}

TEST_CASE("synthetic histograms segment back into the planted scenes") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto v = generate_video(256, 8, seed);
    const auto h = synthesize_histograms(v);
    CHECK(h.rows() == 256);
    CHECK(h.cols() == kDefaultHistogramBins);
    CHECK_NOTHROW(validate_histograms(h));
    const auto p = segment(boundary_scores(h), {2.0, 1});
    CHECK(p == v.scenes);
  }
}

TEST_CASE("evidence_recall examples") {
  std::vector<FrameIndex> sel;
  for (FrameIndex t = 100; t <= 107; ++t) sel.push_back(t);
  CHECK(evidence_recall(sel, {{100, 107}}) == 1.0);
  const std::vector<FrameIndex> uni{16, 48, 80, 112, 144, 176, 208, 240};
  CHECK(evidence_recall(uni, {{100, 107}}) == 0.0);
  CHECK(evidence_recall({100, 102, 104, 106, 3}, {{100, 107}}) == 0.5);
  CHECK(frames_in_evidence({100, 102, 104, 106, 3}, {{100, 107}}) == 4);
  CHECK_THROWS_AS(evidence_recall(sel, {}), Error);
}

TEST_CASE("simulate_answer examples") {
  const auto zero = simulate_answer(0.0);
  CHECK(zero.probabilities == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  CHECK(zero.correct_index == 0);
  for (double tau : {0.1, 1.0, 5.0}) CHECK(reward(zero, {tau}) == doctest::Approx(0.0));

  const auto one = simulate_answer(1.0);
  CHECK(one.probabilities[0] == doctest::Approx(0.95));
  CHECK(one.probabilities[1] == doctest::Approx(0.05 / 3));
  CHECK(reward(one) == doctest::Approx(std::tanh(std::log(57.0))));
  CHECK(reward(one) == doctest::Approx(0.99938).epsilon(1e-5));

  CHECK(simulate_answer(0.5).probabilities[0] == doctest::Approx(0.6));
  CHECK_THROWS_AS(simulate_answer(1.5), Error);
}

TEST_CASE("property: reward is monotone in recall") {
  double prev = -2.0;
  for (int i = 0; i <= 1000; ++i) {
    const double r = reward(simulate_answer(i / 1000.0));
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("experiment rows and cells") {
  ExperimentConfig cfg;
  cfg.seeds = 200;
  const auto report = run_experiment(cfg);
  CHECK(report.rows.size() == 3 * 2 * 200);
  CHECK(report.cells.size() == 6);

  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    CHECK(row.recall >= 0.0);
    CHECK(row.recall <= 1.0);
    const auto v = generate_video(cfg.frame_count, cfg.needle_len, row.seed);
    if (row.strategy == Strategy::Focused) CHECK(row.recall == 1.0);
    if (row.strategy == Strategy::Uniform) {
      const auto u = uniform_sample(v.timeline, row.k).indices;
      CHECK(row.recall == oracle::recall(u, v.evidence[0].start, v.evidence[0].end));
    }
  }
  // Hybrid never does worse than uniform on the same seed and budget.
  const std::size_t per_strategy = 2 * 200;
  for (std::size_t i = 0; i < per_strategy; ++i) {
    const auto& uni = report.rows[i];
    const auto& hyb = report.rows[2 * per_strategy + i];
    REQUIRE(uni.strategy == Strategy::Uniform);
    REQUIRE(hyb.strategy == Strategy::Hybrid);
    CHECK(hyb.seed == uni.seed);
    CHECK(hyb.recall >= uni.recall);
  }
}

TEST_CASE("reports are bit-identical across runs and thread counts") {
  ExperimentConfig cfg;
  cfg.seeds = 150;
  cfg.seed_base = 1000;
  const auto a = run_experiment(cfg);
  cfg.jobs = 4;
  const auto b = run_experiment(cfg);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_json() == b.to_json());
  CHECK(a.to_csv().rfind("strategy,k,seed,recall,reward\n", 0) == 0);
}

TEST_CASE("summaries compute mean and std") {
  std::vector<ExperimentRow> rows{{Strategy::Uniform, 8, 0, 0.0, 0.0, 0},
                                  {Strategy::Uniform, 8, 1, 0.5, 0.2, 4},
                                  {Strategy::Uniform, 8, 2, 1.0, 0.4, 8}};
  const auto c = summarize(Strategy::Uniform, 8, {&rows[0], &rows[1], &rows[2]});
  CHECK(c.runs == 3);
  CHECK(c.mean_recall == doctest::Approx(0.5));
  CHECK(c.std_recall == doctest::Approx(std::sqrt(1.0 / 6.0)));
  CHECK(c.mean_reward == doctest::Approx(0.2));
  CHECK(c.hit_rate == doctest::Approx(2.0 / 3.0));
  CHECK(c.mean_frames_in_evidence == doctest::Approx(4.0));
}
