#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kframes {

using FrameIndex = std::int64_t;

/// Working frame grid of one video. All frame indices are 0-based and lie in
/// [0, frame_count).
class Timeline {
 public:
  /// Throws Error(InvalidTimeline) when frame_count < 1 or fps <= 0.
  explicit Timeline(FrameIndex frame_count, std::optional<double> fps = std::nullopt);

  FrameIndex frame_count() const noexcept { return frame_count_; }
  std::optional<double> fps() const noexcept { return fps_; }

  bool contains(FrameIndex index) const noexcept {
    return index >= 0 && index < frame_count_;
  }

  /// Seconds from the start of the video, when fps is known.
  std::optional<double> timestamp(FrameIndex index) const;

 private:
  FrameIndex frame_count_;
  std::optional<double> fps_;
};

enum class Priority { P1, P2 };

constexpr int weight(Priority p) noexcept { return p == Priority::P1 ? 2 : 1; }

std::string_view to_string(Priority p) noexcept;
std::optional<Priority> parse_priority(std::string_view text) noexcept;

/// Inclusive frame span [start, end].
struct ClipSpan {
  FrameIndex start = 0;
  FrameIndex end = 0;

  FrameIndex length() const noexcept { return end - start + 1; }
  bool empty() const noexcept { return end < start; }
  bool contains(FrameIndex t) const noexcept { return t >= start && t <= end; }

  friend bool operator==(const ClipSpan&, const ClipSpan&) = default;
};

struct KeyClip {
  ClipSpan span;
  Priority priority = Priority::P2;
  std::string rationale;

  friend bool operator==(const KeyClip&, const KeyClip&) = default;
};

/// Clips sorted by (start, end). A ClipSet produced by normalize_clipset has
/// no overlapping spans and every span lies inside its timeline.
using ClipSet = std::vector<KeyClip>;

/// Sorts, clamps to the timeline, drops empty spans, unions overlapping
/// same-priority clips and truncates P2 clips where they overlap a P1 clip.
ClipSet normalize_clipset(std::vector<KeyClip> clips, const Timeline& timeline);

/// Frames strictly between two consecutive clips.
inline FrameIndex gap_between(const ClipSpan& prev, const ClipSpan& next) noexcept {
  return next.start - prev.end - 1;
}

/// Joins consecutive same-priority clips whose gap is at most `tolerance`.
ClipSet merge_adjacent(const ClipSet& clips, FrameIndex tolerance = 2);

struct FramePartition {
  std::vector<FrameIndex> predicted;
  std::vector<FrameIndex> background;
};

FramePartition partition_frames(const ClipSet& clips, const Timeline& timeline);

FrameIndex covered_length(const ClipSet& clips) noexcept;

}  // namespace kframes
