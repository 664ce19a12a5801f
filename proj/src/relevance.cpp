#include "kframes/relevance.hpp"

namespace kframes {

std::optional<Priority> classify_priority(double fused_value) noexcept {
  if (fused_value >= kP1Threshold) return Priority::P1;
  if (fused_value >= kP2Threshold) return Priority::P2;
  return std::nullopt;
}

ClipSet extract_key_clips(const ScenePartition& partition, const std::vector<double>& fused_scores,
                          const std::vector<std::string>& reasons) {
  if (fused_scores.size() != partition.scene_count()) {
    throw Error(ErrorCode::Dimension, "expected " + std::to_string(partition.scene_count()) +
                                          " fused scores, got " + std::to_string(fused_scores.size()));
  }
  if (!reasons.empty() && reasons.size() != partition.scene_count()) {
    throw Error(ErrorCode::Dimension, "expected one reason per scene");
  }
  ClipSet clips;
  for (std::size_t j = 0; j < fused_scores.size(); ++j) {
    if (auto p = classify_priority(fused_scores[j])) {
      clips.push_back({partition.scene(j), *p, reasons.empty() ? std::string{} : reasons[j]});
    }
  }
  return normalize_clipset(std::move(clips), Timeline(partition.frame_count()));
}

}  // namespace kframes
