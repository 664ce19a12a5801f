#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kframes/error.hpp"
#include "kframes/timeline.hpp"

namespace kframes {

inline constexpr std::string_view kSchemaVersion = "1";

struct SceneRecord {
  std::string scene_id;
  ClipSpan span;
  std::string description;
  friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

struct ChapterRecord {
  std::string chapter_id;
  std::vector<std::string> scene_ids;
  std::string summary;
  friend bool operator==(const ChapterRecord&, const ChapterRecord&) = default;
};

/// Scenes tile [0, frame_count - 1]; chapters group disjoint sets of scenes.
struct AnnotationDocument {
  std::string video_id;
  FrameIndex frame_count = 1;
  std::vector<SceneRecord> scenes;
  std::vector<ChapterRecord> chapters;
  std::string video_summary;
  std::optional<std::string> input_hash;
  friend bool operator==(const AnnotationDocument&, const AnnotationDocument&) = default;
};

struct RelevanceEntry {
  std::string scene_id;
  int relevance_score = 1;
  std::string reason;
  std::optional<double> fused;
  std::optional<Priority> priority;
  friend bool operator==(const RelevanceEntry&, const RelevanceEntry&) = default;
};

struct RelevanceAnnotation {
  std::string video_id;
  std::string query;
  std::optional<std::string> gold_answer;
  std::vector<RelevanceEntry> entries;
  ClipSet key_clips;
  friend bool operator==(const RelevanceAnnotation&, const RelevanceAnnotation&) = default;
};

enum class ViolationKind {
  MalformedJson,
  MissingField,
  WrongType,
  SchemaVersion,
  InvalidValue,
  SpanOutOfRange,
  SpanOverlap,
  SpanGap,
  DuplicateId,
  DanglingReference,
  ChapterMembership,
  ScoreOutOfRange,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string path;  // JSON path such as $.scenes[1].end
  std::string message;
};

std::string format_violation(const Violation& v);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const noexcept { return violations_; }
  const Violation& first() const { return violations_.front(); }

 private:
  std::vector<Violation> violations_;
};

enum class RecordKind { Document, Relevance, Unknown };

/// Documents carry "scenes", relevance annotations carry "entries".
RecordKind classify_record(const nlohmann::json& j) noexcept;

std::vector<Violation> check_document(const nlohmann::json& j);
/// Scene ids are cross-checked when `doc` is given.
std::vector<Violation> check_relevance(const nlohmann::json& j, const AnnotationDocument* doc = nullptr);

/// Parses and fully validates; throws ValidationError naming every violation
/// (the first one in what()).
AnnotationDocument parse_document(std::string_view bytes);
AnnotationDocument document_from_json(const nlohmann::json& j);
RelevanceAnnotation parse_relevance(std::string_view bytes, const AnnotationDocument* doc = nullptr);
RelevanceAnnotation relevance_from_json(const nlohmann::json& j, const AnnotationDocument* doc = nullptr);

nlohmann::json to_json(const AnnotationDocument& doc);
nlohmann::json to_json(const RelevanceAnnotation& rel);
std::string emit_document(const AnnotationDocument& doc);
std::string emit_relevance(const RelevanceAnnotation& rel);

/// Returns the first complete top-level JSON object embedded in `text`,
/// skipping markdown fences and surrounding prose. Throws Error(Parse) when
/// none is found.
std::string strip_json_payload(std::string_view text);

struct CountSummary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct DatasetStats {
  std::size_t video_count = 0;
  std::size_t scene_count = 0;
  std::size_t chapter_count = 0;
  std::size_t relevance_count = 0;  // scene-query relevance entries
  std::size_t query_count = 0;      // relevance annotations
  double avg_scenes_per_video = 0.0;
  double avg_chapters_per_video = 0.0;
  std::array<std::size_t, 5> score_histogram{};  // scores 1..5
  CountSummary frames_per_video;
  CountSummary scenes_per_video;
  CountSummary scene_length;
  /// Videos with <5, 5-15, 16-25, 26-35 and >35 scenes.
  std::array<std::size_t, 5> scene_count_buckets{};
};

/// Associative partial aggregate; corpora are folded one record at a time.
class StatsAccumulator {
 public:
  void add(const AnnotationDocument& doc);
  void add(const RelevanceAnnotation& rel);
  void merge(const StatsAccumulator& other);
  DatasetStats finish() const;

 private:
  struct Running {
    std::size_t n = 0;
    double sum = 0.0;
    double min = 0.0;
    double max = 0.0;
    void add(double x);
    void merge(const Running& o);
    CountSummary summary() const;
  };

  std::size_t videos_ = 0;
  std::size_t scenes_ = 0;
  std::size_t chapters_ = 0;
  std::size_t entries_ = 0;
  std::size_t queries_ = 0;
  std::array<std::size_t, 5> scores_{};
  std::array<std::size_t, 5> buckets_{};
  Running frames_;
  Running scenes_per_video_;
  Running scene_len_;
};

DatasetStats compute_stats(const std::vector<AnnotationDocument>& documents,
                           const std::vector<RelevanceAnnotation>& relevance);

nlohmann::json to_json(const DatasetStats& stats);
std::string format_stats_table(const DatasetStats& stats);

}  // namespace kframes
