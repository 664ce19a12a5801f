#include "kframes/segmentation.hpp"

#include <numeric>

namespace kframes {

ScenePartition::ScenePartition(std::vector<FrameIndex> boundaries)
    : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0) {
    throw Error(ErrorCode::InvalidInput, "scene boundaries must start at 0 and hold at least one scene");
  }
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (boundaries_[i] <= boundaries_[i - 1]) {
      throw Error(ErrorCode::InvalidInput, "scene boundaries must be strictly increasing");
    }
  }
}

ScenePartition ScenePartition::single(FrameIndex frame_count) {
  return ScenePartition({0, frame_count});
}

std::vector<ClipSpan> ScenePartition::scenes() const {
  std::vector<ClipSpan> out;
  out.reserve(scene_count());
  for (std::size_t j = 0; j < scene_count(); ++j) out.push_back(scene(j));
  return out;
}

ScenePartition segment_scores(const std::vector<double>& scores, const SegmentPolicy& policy) {
  if (scores.empty()) {
    throw Error(ErrorCode::InsufficientFrames, "segmentation needs at least one transition");
  }
  if (policy.min_scene_len < 1) {
    throw Error(ErrorCode::InvalidInput, "min_scene_len must be positive");
  }
  const auto n = static_cast<double>(scores.size());
  const auto frames = static_cast<FrameIndex>(scores.size()) + 1;
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  const double stddev = std::sqrt(var / n);

  std::vector<FrameIndex> boundaries{0};
  if (stddev > 0.0) {
    for (std::size_t t = 0; t < scores.size(); ++t) {
      const double z = (scores[t] - mean) / stddev;
      if (z < policy.threshold_lambda - kThresholdSlack) continue;
      const auto b = static_cast<FrameIndex>(t) + 1;
      if (b - boundaries.back() >= policy.min_scene_len) boundaries.push_back(b);
    }
  }
  while (boundaries.size() > 1 && frames - boundaries.back() < policy.min_scene_len) {
    boundaries.pop_back();
  }
  boundaries.push_back(frames);
  return ScenePartition(std::move(boundaries));
}

}  // namespace kframes
