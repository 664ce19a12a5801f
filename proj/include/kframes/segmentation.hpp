#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kframes/error.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

/// One row per frame, one column per bin.
template <typename Scalar>
using HistogramMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr int kDefaultHistogramBins = 64;
inline constexpr double kHistogramSumTolerance = 1e-6;

/// L1 distance between two L1-normalized histograms; lies in [0, 2].
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar histogram_diff(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::Dimension, "histogram length mismatch: " + std::to_string(a.size()) +
                                          " vs " + std::to_string(b.size()));
  }
  return (a.derived().reshaped() - b.derived().reshaped()).cwiseAbs().sum();
}

/// Checks that every row is nonnegative and sums to one within tolerance.
template <typename Derived>
void validate_histograms(const Eigen::MatrixBase<Derived>& h,
                         double tolerance = kHistogramSumTolerance) {
  using Scalar = typename Derived::Scalar;
  if (h.cols() < 1) throw Error(ErrorCode::Dimension, "histograms need at least one bin");
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    if ((h.row(t).array() < Scalar(0)).any() || !h.row(t).allFinite()) {
      throw Error(ErrorCode::InvalidInput, "frame " + std::to_string(t) + " has a negative bin");
    }
    const double sum = static_cast<double>(h.row(t).sum());
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorCode::InvalidInput,
                  "frame " + std::to_string(t) + " is not L1-normalized (sum " +
                      std::to_string(sum) + ")");
    }
  }
}

/// Rescales each row to unit L1 mass; all-zero rows become uniform.
template <typename Scalar>
HistogramMatrix<Scalar> normalize_l1(HistogramMatrix<Scalar> h) {
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    const Scalar sum = h.row(t).sum();
    if (sum > Scalar(0)) {
      h.row(t) /= sum;
    } else {
      h.row(t).setConstant(Scalar(1) / static_cast<Scalar>(h.cols()));
    }
  }
  return h;
}

/// scores[t] = histogram_diff(h_t, h_{t+1}), length T-1.
template <typename Derived>
VectorX<typename Derived::Scalar> boundary_scores(const Eigen::MatrixBase<Derived>& h) {
  if (h.rows() < 2) {
    throw Error(ErrorCode::InsufficientFrames,
                "boundary scores need at least 2 frames, got " + std::to_string(h.rows()));
  }
  const Eigen::Index n = h.rows() - 1;
  return (h.bottomRows(n) - h.topRows(n)).cwiseAbs().rowwise().sum();
}

struct SegmentPolicy {
  double threshold_lambda = 2.0;
  FrameIndex min_scene_len = 8;
};

/// Boundary indices {0 = b_0 < b_1 < ... < b_M = T}; scene j covers
/// [b_j, b_{j+1} - 1].
class ScenePartition {
 public:
  /// Throws Error(InvalidInput) unless boundaries are strictly increasing,
  /// start at 0 and contain at least two entries.
  explicit ScenePartition(std::vector<FrameIndex> boundaries);

  static ScenePartition single(FrameIndex frame_count);

  const std::vector<FrameIndex>& boundaries() const noexcept { return boundaries_; }
  std::size_t scene_count() const noexcept { return boundaries_.size() - 1; }
  FrameIndex frame_count() const noexcept { return boundaries_.back(); }
  ClipSpan scene(std::size_t j) const { return {boundaries_.at(j), boundaries_.at(j + 1) - 1}; }
  std::vector<ClipSpan> scenes() const;

  friend bool operator==(const ScenePartition&, const ScenePartition&) = default;

 private:
  std::vector<FrameIndex> boundaries_;
};

/// Z-score slack under which a transition still counts as reaching the
/// adaptive threshold; absorbs rounding in mean/std.
inline constexpr double kThresholdSlack = 1e-9;

ScenePartition segment_scores(const std::vector<double>& scores, const SegmentPolicy& policy);

/// Places a boundary after transition t when its z-score reaches
/// policy.threshold_lambda, then drops boundaries that would create scenes
/// shorter than policy.min_scene_len (earlier boundary wins). Constant score
/// series yield a single scene.
template <typename Derived>
ScenePartition segment(const Eigen::MatrixBase<Derived>& scores, const SegmentPolicy& policy = {}) {
  std::vector<double> s(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) s[static_cast<std::size_t>(i)] = static_cast<double>(scores(i));
  return segment_scores(s, policy);
}

}  // namespace kframes
