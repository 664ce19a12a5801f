#include "kframes/timeline.hpp"

#include <algorithm>
#include <cmath>

#include "kframes/error.hpp"

namespace kframes {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidTimeline: return "invalid-timeline";
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::InsufficientFrames: return "insufficient-frames";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::InvalidBudget: return "invalid-budget";
    case ErrorCode::OverBudget: return "over-budget";
    case ErrorCode::NoClips: return "no-clips";
    case ErrorCode::InsufficientCandidates: return "insufficient-candidates";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Config: return "config";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::RateLimited: return "rate-limited";
    case ErrorCode::Provider: return "provider";
  }
  return "unknown";
}

Timeline::Timeline(FrameIndex frame_count, std::optional<double> fps)
    : frame_count_(frame_count), fps_(fps) {
  if (frame_count < 1) {
    throw Error(ErrorCode::InvalidTimeline,
                "timeline needs at least one frame, got " + std::to_string(frame_count));
  }
  if (fps && !(std::isfinite(*fps) && *fps > 0.0)) {
    throw Error(ErrorCode::InvalidTimeline, "fps must be positive");
  }
}

std::optional<double> Timeline::timestamp(FrameIndex index) const {
  if (!fps_) return std::nullopt;
  return static_cast<double>(index) / *fps_;
}

std::string_view to_string(Priority p) noexcept { return p == Priority::P1 ? "P1" : "P2"; }

std::optional<Priority> parse_priority(std::string_view text) noexcept {
  if (text == "P1") return Priority::P1;
  if (text == "P2") return Priority::P2;
  return std::nullopt;
}

namespace {

bool span_less(const KeyClip& a, const KeyClip& b) {
  if (a.span.start != b.span.start) return a.span.start < b.span.start;
  if (a.span.end != b.span.end) return a.span.end < b.span.end;
  return a.priority < b.priority;
}

void append_rationale(std::string& into, const std::string& more) {
  if (more.empty()) return;
  if (!into.empty()) into += "; ";
  into += more;
}

// Unions overlapping spans of one priority class. Input sorted.
ClipSet union_overlapping(ClipSet clips) {
  ClipSet out;
  for (auto& c : clips) {
    if (!out.empty() && c.span.start <= out.back().span.end) {
      out.back().span.end = std::max(out.back().span.end, c.span.end);
      append_rationale(out.back().rationale, c.rationale);
    } else {
      out.push_back(std::move(c));
    }
  }
  return out;
}

// Removes the frames covered by `cover` (sorted, disjoint) from `clip`.
void subtract_cover(const KeyClip& clip, const ClipSet& cover, ClipSet& out) {
  FrameIndex cursor = clip.span.start;
  for (const auto& p : cover) {
    if (p.span.end < cursor) continue;
    if (p.span.start > clip.span.end) break;
    if (p.span.start > cursor) {
      out.push_back({{cursor, p.span.start - 1}, clip.priority, clip.rationale});
    }
    cursor = std::max(cursor, p.span.end + 1);
    if (cursor > clip.span.end) return;
  }
  if (cursor <= clip.span.end) {
    out.push_back({{cursor, clip.span.end}, clip.priority, clip.rationale});
  }
}

}  // namespace

ClipSet normalize_clipset(std::vector<KeyClip> clips, const Timeline& timeline) {
  const FrameIndex last = timeline.frame_count() - 1;
  ClipSet p1;
  ClipSet p2;
  for (auto& c : clips) {
    c.span.start = std::max<FrameIndex>(c.span.start, 0);
    c.span.end = std::min(c.span.end, last);
    if (c.span.empty()) continue;
    (c.priority == Priority::P1 ? p1 : p2).push_back(std::move(c));
  }
  std::stable_sort(p1.begin(), p1.end(), span_less);
  std::stable_sort(p2.begin(), p2.end(), span_less);
  p1 = union_overlapping(std::move(p1));
  p2 = union_overlapping(std::move(p2));

  ClipSet out = p1;
  for (const auto& c : p2) subtract_cover(c, p1, out);
  std::sort(out.begin(), out.end(), span_less);
  return out;
}

ClipSet merge_adjacent(const ClipSet& clips, FrameIndex tolerance) {
  ClipSet out;
  for (const auto& c : clips) {
    if (!out.empty() && out.back().priority == c.priority &&
        gap_between(out.back().span, c.span) <= tolerance) {
      out.back().span.end = std::max(out.back().span.end, c.span.end);
      append_rationale(out.back().rationale, c.rationale);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

FramePartition partition_frames(const ClipSet& clips, const Timeline& timeline) {
  std::vector<bool> mask(static_cast<std::size_t>(timeline.frame_count()), false);
  for (const auto& c : clips) {
    const FrameIndex lo = std::max<FrameIndex>(c.span.start, 0);
    const FrameIndex hi = std::min(c.span.end, timeline.frame_count() - 1);
    for (FrameIndex t = lo; t <= hi; ++t) mask[static_cast<std::size_t>(t)] = true;
  }
  FramePartition parts;
  for (FrameIndex t = 0; t < timeline.frame_count(); ++t) {
    (mask[static_cast<std::size_t>(t)] ? parts.predicted : parts.background).push_back(t);
  }
  return parts;
}

FrameIndex covered_length(const ClipSet& clips) noexcept {
  FrameIndex total = 0;
  for (const auto& c : clips) total += c.span.length();
  return total;
}

}  // namespace kframes
