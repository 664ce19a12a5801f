#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kframes/allocation.hpp"
#include "kframes/relevance.hpp"
#include "kframes/segmentation.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

// Clip interchange record: {"start", "end", "priority", "reason"}.
nlohmann::json to_json(const KeyClip& clip);
KeyClip clip_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClipSet& clips);
/// Accepts a bare array of clips or an object with a "clips" array.
std::vector<KeyClip> clips_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenePartition& partition);
ScenePartition partition_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SelectionResult& result, const Timeline* timeline = nullptr);
SelectionResult selection_from_json(const nlohmann::json& j);

/// CSV with header bin_0..bin_{B-1} (one row per frame) or JSON
/// {"bins": B, "frames": [[...], ...]}; chosen by file extension.
HistogramMatrix<double> read_histograms(const std::filesystem::path& path);
HistogramMatrix<double> parse_histogram_csv(std::string_view text);
HistogramMatrix<double> parse_histogram_json(const nlohmann::json& j);
std::string histograms_to_csv(const HistogramMatrix<double>& h);

/// Per-frame cosine similarities: CSV rows "frame_index,similarity" (header
/// optional) or JSON {"similarities": [...]} / [{"frame_index", "similarity"}].
/// Missing frames are an error.
std::vector<double> read_similarities(const std::filesystem::path& path, FrameIndex frame_count);
std::vector<double> parse_similarity_csv(std::string_view text, FrameIndex frame_count);
std::vector<double> parse_similarity_json(const nlohmann::json& j, FrameIndex frame_count);

std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace kframes
