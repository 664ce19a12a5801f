#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kframes/allocation.hpp"
#include "kframes/reward.hpp"
#include "kframes/segmentation.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

/// A background video of T frames with planted evidence ("needle") spans.
/// The background is laid out as random-length distractor scenes; every
/// needle is a scene of its own.
struct SyntheticVideo {
  Timeline timeline;
  std::vector<ClipSpan> evidence;
  ScenePartition scenes;
  std::uint64_t seed = 0;

  /// Evidence spans as P1 key clips.
  ClipSet oracle_clips() const;
};

/// Throws Error(InvalidInput) unless 1 <= needle_len and the needles fit in T
/// with at least one frame between them.
SyntheticVideo generate_video(FrameIndex frame_count, FrameIndex needle_len, std::uint64_t seed, int needles = 1);

/// Per-frame histograms whose scene changes match video.scenes: each scene
/// concentrates mass on its own bin and frames carry small seeded noise.
HistogramMatrix<double> synthesize_histograms(const SyntheticVideo& video, int bins = kDefaultHistogramBins);

/// Fraction of evidence frames present in the selection.
double evidence_recall(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence);
FrameIndex frames_in_evidence(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence);

/// Linear coverage-to-confidence link for a frozen multiple-choice answerer.
struct SimAnswerModel {
  int num_choices = 4;
  double base_prob = 0.25;
  double gain = 0.7;
};

/// p(correct) = base_prob + gain * recall; the other candidates split the rest.
AnswerDistribution simulate_answer(double recall, const SimAnswerModel& model = {});

struct SelectionScore {
  double recall = 0.0;
  double reward = 0.0;
};

SelectionScore evaluate_selection(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence,
                                  const SimAnswerModel& model = {}, const RewardConfig& reward_config = {});

struct ExperimentConfig {
  std::vector<Strategy> strategies{Strategy::Uniform, Strategy::Focused, Strategy::Hybrid};
  std::vector<FrameIndex> ks{8, 32};
  FrameIndex frame_count = 256;
  FrameIndex needle_len = 8;
  std::size_t seeds = 1000;
  std::uint64_t seed_base = 0;
  int needles = 1;
  SimAnswerModel model;
  RewardConfig reward;
  SelectConfig select;
  int jobs = 1;
};

struct ExperimentRow {
  Strategy strategy = Strategy::Uniform;
  FrameIndex k = 0;
  std::uint64_t seed = 0;
  double recall = 0.0;
  double reward = 0.0;
  FrameIndex frames_in_evidence = 0;
};

struct CellSummary {
  Strategy strategy = Strategy::Uniform;
  FrameIndex k = 0;
  std::size_t runs = 0;
  double mean_recall = 0.0;
  double std_recall = 0.0;
  double mean_reward = 0.0;
  double std_reward = 0.0;
  double hit_rate = 0.0;  // share of runs with at least one evidence frame
  double mean_frames_in_evidence = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRow> rows;  // strategy-major, then k, then seed
  std::vector<CellSummary> cells;

  /// Columns strategy,k,seed,recall,reward.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Summaries over any subset of rows sharing one (strategy, k).
CellSummary summarize(Strategy strategy, FrameIndex k, const std::vector<const ExperimentRow*>& rows);

}  // namespace kframes
