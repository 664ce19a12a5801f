#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kframes/annotation.hpp"
#include "kframes/llm_client.hpp"
#include "kframes/relevance.hpp"
#include "kframes/segmentation.hpp"

namespace kframes {

struct ManifestQuery {
  std::string query;
  std::optional<std::string> gold_answer;
};

/// One video of an annotation manifest:
///   {"videos": [{"video_id", "histograms", "fps"?, "frame_ref_prefix"?,
///                "queries": [{"query", "gold_answer"?}]}]}
/// Relative histogram paths resolve against the manifest's directory.
struct ManifestEntry {
  std::string video_id;
  std::filesystem::path histograms;
  std::optional<double> fps;
  std::string frame_ref_prefix;  // frame t is referenced as prefix + t
  std::vector<ManifestQuery> queries;
  nlohmann::json source;  // the manifest record as written
};

std::vector<ManifestEntry> parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct AnnotateOptions {
  std::filesystem::path out_dir = ".";
  bool force = false;
  int jobs = 1;
  SegmentPolicy segment;
  double fusion_weight = kDefaultFusionWeight;
  bool normalize_histograms = false;
};

struct VideoOutcome {
  enum class Status { Written, Skipped, Failed };
  std::string video_id;
  Status status = Status::Failed;
  std::string error;
  std::filesystem::path document_path;
  std::filesystem::path relevance_path;
};

struct AnnotateSummary {
  std::vector<VideoOutcome> videos;  // manifest order
  std::size_t provider_calls = 0;

  std::size_t count(VideoOutcome::Status s) const;
  nlohmann::json to_json() const;
};

std::filesystem::path document_path(const std::filesystem::path& out_dir, const std::string& video_id);
std::filesystem::path relevance_path(const std::filesystem::path& out_dir, const std::string& video_id);

/// Runs segmentation, captioning, relevance scoring and fusion per video and
/// writes <video_id>.doc.json plus <video_id>.relevance.jsonl. Videos whose
/// outputs already carry the current input hash are skipped unless
/// options.force. Failures are recorded per video; the batch continues.
AnnotateSummary annotate(const std::vector<ManifestEntry>& videos, Provider& provider, const AnnotateOptions& options);

}  // namespace kframes
