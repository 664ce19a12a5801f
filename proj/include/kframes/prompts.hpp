#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kframes/annotation.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

inline constexpr std::string_view kCaptionRole = "Professional Video Content Analyst";
inline constexpr std::string_view kRelevanceRole = "Video QA Relevance Analyst";
inline constexpr std::string_view kInputBegin = "### INPUT (JSON)";
inline constexpr std::string_view kInputEnd = "### END INPUT";

struct VideoMeta {
  std::string video_id;
  FrameIndex frame_count = 1;
  std::optional<double> fps;
  std::vector<std::pair<std::string, ClipSpan>> scenes;  // (scene_id, span)
};

struct SceneBrief {
  std::string scene_id;
  ClipSpan span;
  std::string description;
};

std::string build_caption_prompt(const VideoMeta& meta);

/// Throws Error(InvalidInput) for an empty query.
std::string build_relevance_prompt(std::string_view query, const std::optional<std::string>& gold_answer,
                                   const std::vector<SceneBrief>& scenes);

/// The JSON block a prompt carries between kInputBegin and kInputEnd.
std::optional<nlohmann::json> extract_prompt_input(std::string_view prompt);

struct CaptionResult {
  std::vector<SceneRecord> scenes;  // spans taken from the response when present
  std::vector<ChapterRecord> chapters;
  std::string video_summary;
};

/// Parses a captioner response ({"scenes", "chapters", "video_summary"}).
/// Scenes without start/end inherit the span of the requested scene with the
/// same id. Throws Error(Parse) on schema mismatch.
CaptionResult parse_caption_response(std::string_view text, const VideoMeta& requested);

/// Parses {"relevance": [{"scene_id", "relevance_score", "reason"}, ...]}.
std::vector<RelevanceEntry> parse_relevance_response(std::string_view text);

}  // namespace kframes
