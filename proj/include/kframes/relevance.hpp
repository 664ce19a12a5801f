#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kframes/error.hpp"
#include "kframes/segmentation.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

inline constexpr double kP1Threshold = 4.9;
inline constexpr double kP2Threshold = 4.3;
inline constexpr double kDefaultFusionWeight = 0.8;

struct LlmSceneScore {
  std::string scene_id;
  int score = 1;  // 1..5
  std::string reason;
};

template <typename Scalar>
struct FusedClipScore {
  Scalar value;
  Scalar llm;
  Scalar sim_scale;  // mean mapped similarity on the 1..5 scale
  Scalar lambda;
};

namespace detail {

inline void check_llm_score(const LlmSceneScore& s) {
  if (s.score < 1 || s.score > 5) {
    throw Error(ErrorCode::InvalidInput,
                "LLM score for scene '" + s.scene_id + "' outside [1,5]: " + std::to_string(s.score));
  }
}

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "fusion weight must lie in [0,1]");
  }
}

template <typename Derived>
void check_similarities(const Eigen::MatrixBase<Derived>& sims) {
  using Scalar = typename Derived::Scalar;
  if (sims.size() == 0) throw Error(ErrorCode::InsufficientData, "empty similarity series");
  if (!sims.allFinite() || (sims.array() < Scalar(-1)).any() || (sims.array() > Scalar(1)).any()) {
    throw Error(ErrorCode::InvalidInput, "similarities must be cosine values in [-1,1]");
  }
}

}  // namespace detail

/// Cosine similarity in [-1,1] mapped to [0,1].
template <typename Derived>
auto map_similarity(const Eigen::MatrixBase<Derived>& cosine) {
  using Scalar = typename Derived::Scalar;
  return ((cosine.array() + Scalar(1)) / Scalar(2)).matrix();
}

/// Weighted average of the LLM score and the mean mapped similarity lifted to
/// the 1..5 scale: lambda * llm + (1 - lambda) * (1 + 4 * mean((s + 1) / 2)).
template <typename Derived>
FusedClipScore<typename Derived::Scalar> fuse_clip_score(const LlmSceneScore& llm,
                                                         const Eigen::MatrixBase<Derived>& cosine,
                                                         typename Derived::Scalar lambda = kDefaultFusionWeight) {
  using Scalar = typename Derived::Scalar;
  detail::check_llm_score(llm);
  detail::check_lambda(static_cast<double>(lambda));
  detail::check_similarities(cosine);
  const Scalar sim_scale = Scalar(1) + Scalar(4) * map_similarity(cosine).mean();
  const auto llm_value = static_cast<Scalar>(llm.score);
  return {lambda * llm_value + (Scalar(1) - lambda) * sim_scale, llm_value, sim_scale, lambda};
}

/// Per-frame variant of fuse_clip_score using each frame's own similarity.
template <typename Derived>
VectorX<typename Derived::Scalar> frame_level_scores(const LlmSceneScore& llm,
                                                     const Eigen::MatrixBase<Derived>& cosine,
                                                     typename Derived::Scalar lambda = kDefaultFusionWeight) {
  using Scalar = typename Derived::Scalar;
  detail::check_llm_score(llm);
  detail::check_lambda(static_cast<double>(lambda));
  detail::check_similarities(cosine);
  const VectorX<Scalar> frame_scale =
      (Scalar(1) + Scalar(4) * map_similarity(cosine).array()).matrix();
  return (lambda * static_cast<Scalar>(llm.score) + (Scalar(1) - lambda) * frame_scale.array()).matrix();
}

/// >= 4.9 is P1, [4.3, 4.9) is P2, anything lower is not a highlight.
std::optional<Priority> classify_priority(double fused_value) noexcept;

/// Each scene whose fused score classifies becomes a key clip carrying the
/// scene span and reason. Throws Error(Dimension) on count mismatch.
ClipSet extract_key_clips(const ScenePartition& partition, const std::vector<double>& fused_scores,
                          const std::vector<std::string>& reasons);

}  // namespace kframes
