#include "kframes/annotation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "kframes/json_io.hpp"

namespace kframes {

using nlohmann::json;

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::MalformedJson: return "malformed-json";
    case ViolationKind::MissingField: return "missing-field";
    case ViolationKind::WrongType: return "wrong-type";
    case ViolationKind::SchemaVersion: return "schema-version";
    case ViolationKind::InvalidValue: return "invalid-value";
    case ViolationKind::SpanOutOfRange: return "span-out-of-range";
    case ViolationKind::SpanOverlap: return "span-overlap";
    case ViolationKind::SpanGap: return "span-gap";
    case ViolationKind::DuplicateId: return "duplicate-id";
    case ViolationKind::DanglingReference: return "dangling-reference";
    case ViolationKind::ChapterMembership: return "chapter-membership";
    case ViolationKind::ScoreOutOfRange: return "score-out-of-range";
  }
  return "unknown";
}

std::string format_violation(const Violation& v) {
  return std::string(to_string(v.kind)) + " at " + v.path + ": " + v.message;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::Validation, violations.empty() ? "invalid document" : format_violation(violations.front())),
      violations_(std::move(violations)) {}

RecordKind classify_record(const json& j) noexcept {
  if (!j.is_object()) return RecordKind::Unknown;
  if (j.contains("scenes")) return RecordKind::Document;
  if (j.contains("entries")) return RecordKind::Relevance;
  return RecordKind::Unknown;
}

namespace {

// Accumulates violations while walking a JSON value.
class Checker {
 public:
  std::vector<Violation> violations;

  void fail(ViolationKind kind, std::string path, std::string message) {
    violations.push_back({kind, std::move(path), std::move(message)});
  }

  const json* field(const json& obj, const std::string& path, const char* key, bool required = true) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(ViolationKind::MissingField, path + "." + key, std::string("missing field '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  const json* string_field(const json& obj, const std::string& path, const char* key, bool required = true,
                           bool nonempty = false) {
    const json* v = field(obj, path, key, required);
    if (!v) return nullptr;
    if (!v->is_string()) {
      fail(ViolationKind::WrongType, path + "." + key, std::string("'") + key + "' must be a string");
      return nullptr;
    }
    if (nonempty && v->get_ref<const std::string&>().empty()) {
      fail(ViolationKind::InvalidValue, path + "." + key, std::string("'") + key + "' must not be empty");
      return nullptr;
    }
    return v;
  }

  const json* int_field(const json& obj, const std::string& path, const char* key) {
    const json* v = field(obj, path, key);
    if (!v) return nullptr;
    if (!v->is_number_integer()) {
      fail(ViolationKind::WrongType, path + "." + key, std::string("'") + key + "' must be an integer");
      return nullptr;
    }
    return v;
  }

  const json* array_field(const json& obj, const std::string& path, const char* key, bool required = true) {
    const json* v = field(obj, path, key, required);
    if (!v) return nullptr;
    if (!v->is_array()) {
      fail(ViolationKind::WrongType, path + "." + key, std::string("'") + key + "' must be an array");
      return nullptr;
    }
    return v;
  }

  void schema_version(const json& obj) {
    if (const json* v = field(obj, "$", "peakclips_schema", false)) {
      if (!v->is_string() || v->get<std::string>() != kSchemaVersion) {
        fail(ViolationKind::SchemaVersion, "$.peakclips_schema",
             "unsupported schema version " + v->dump() + ", expected \"1\"");
      }
    }
  }
};

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

struct SceneView {
  std::size_t index;
  std::string id;
  FrameIndex start;
  FrameIndex end;
};

}  // namespace

std::vector<Violation> check_document(const json& j) {
  Checker c;
  if (!j.is_object()) {
    c.fail(ViolationKind::WrongType, "$", "document must be a JSON object");
    return c.violations;
  }
  c.schema_version(j);
  c.string_field(j, "$", "video_id", true, true);
  c.string_field(j, "$", "video_summary");
  c.string_field(j, "$", "input_hash", false);

  std::optional<FrameIndex> frames;
  if (const json* fc = c.int_field(j, "$", "frame_count")) {
    if (fc->get<FrameIndex>() < 1) {
      c.fail(ViolationKind::InvalidValue, "$.frame_count", "frame_count must be positive");
    } else {
      frames = fc->get<FrameIndex>();
    }
  }

  std::vector<SceneView> scenes;
  std::set<std::string> scene_ids;
  bool scenes_ok = true;
  if (const json* arr = c.array_field(j, "$", "scenes")) {
    if (arr->empty()) c.fail(ViolationKind::InvalidValue, "$.scenes", "a document needs at least one scene");
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json& s = (*arr)[i];
      const std::string path = at("$.scenes", i);
      if (!s.is_object()) {
        c.fail(ViolationKind::WrongType, path, "scene must be an object");
        scenes_ok = false;
        continue;
      }
      const json* id = c.string_field(s, path, "scene_id", true, true);
      const json* start = c.int_field(s, path, "start");
      const json* end = c.int_field(s, path, "end");
      c.string_field(s, path, "description");
      if (id && !scene_ids.insert(id->get<std::string>()).second) {
        c.fail(ViolationKind::DuplicateId, path + ".scene_id", "duplicate scene_id '" + id->get<std::string>() + "'");
      }
      if (!id || !start || !end) {
        scenes_ok = false;
        continue;
      }
      const auto a = start->get<FrameIndex>();
      const auto b = end->get<FrameIndex>();
      if (a > b) {
        c.fail(ViolationKind::InvalidValue, path, "scene start " + std::to_string(a) + " after end " + std::to_string(b));
        scenes_ok = false;
        continue;
      }
      if (a < 0 || (frames && b >= *frames)) {
        c.fail(ViolationKind::SpanOutOfRange, path,
               "scene [" + std::to_string(a) + "," + std::to_string(b) + "] outside the timeline");
        scenes_ok = false;
        continue;
      }
      scenes.push_back({i, id->get<std::string>(), a, b});
    }
  }

  if (scenes_ok && frames && !scenes.empty()) {
    std::stable_sort(scenes.begin(), scenes.end(),
                     [](const SceneView& x, const SceneView& y) { return x.start < y.start; });
    if (scenes.front().start != 0) {
      c.fail(ViolationKind::SpanGap, at("$.scenes", scenes.front().index),
             "frames [0," + std::to_string(scenes.front().start - 1) + "] are not covered by any scene");
    }
    for (std::size_t i = 1; i < scenes.size(); ++i) {
      const auto& prev = scenes[i - 1];
      const auto& cur = scenes[i];
      if (cur.start <= prev.end) {
        c.fail(ViolationKind::SpanOverlap, at("$.scenes", cur.index),
               "scenes '" + prev.id + "' and '" + cur.id + "' overlap");
      } else if (cur.start > prev.end + 1) {
        c.fail(ViolationKind::SpanGap, at("$.scenes", cur.index),
               "gap between scenes '" + prev.id + "' and '" + cur.id + "'");
      }
    }
    FrameIndex last_end = 0;
    std::size_t last_index = 0;
    for (const auto& s : scenes) {
      if (s.end >= last_end) {
        last_end = s.end;
        last_index = s.index;
      }
    }
    if (last_end != *frames - 1) {
      c.fail(ViolationKind::SpanGap, at("$.scenes", last_index),
             "frames after " + std::to_string(last_end) + " are not covered by any scene");
    }
  }

  if (const json* arr = c.array_field(j, "$", "chapters")) {
    std::set<std::string> chapter_ids;
    std::map<std::string, std::string> owner;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json& ch = (*arr)[i];
      const std::string path = at("$.chapters", i);
      if (!ch.is_object()) {
        c.fail(ViolationKind::WrongType, path, "chapter must be an object");
        continue;
      }
      const json* id = c.string_field(ch, path, "chapter_id", true, true);
      c.string_field(ch, path, "summary");
      if (id && !chapter_ids.insert(id->get<std::string>()).second) {
        c.fail(ViolationKind::DuplicateId, path + ".chapter_id",
               "duplicate chapter_id '" + id->get<std::string>() + "'");
      }
      const json* refs = c.array_field(ch, path, "scene_ids");
      if (!refs) continue;
      const std::string chapter = id ? id->get<std::string>() : path;
      for (std::size_t r = 0; r < refs->size(); ++r) {
        const json& ref = (*refs)[r];
        const std::string rpath = at(path + ".scene_ids", r);
        if (!ref.is_string()) {
          c.fail(ViolationKind::WrongType, rpath, "scene reference must be a string");
          continue;
        }
        const auto& sid = ref.get_ref<const std::string&>();
        if (!scene_ids.count(sid)) {
          c.fail(ViolationKind::DanglingReference, rpath, "chapter references unknown scene '" + sid + "'");
          continue;
        }
        auto [it, fresh] = owner.emplace(sid, chapter);
        if (!fresh) {
          c.fail(ViolationKind::ChapterMembership, rpath,
                 "scene '" + sid + "' already belongs to chapter '" + it->second + "'");
        }
      }
    }
  }
  return c.violations;
}

std::vector<Violation> check_relevance(const json& j, const AnnotationDocument* doc) {
  Checker c;
  if (!j.is_object()) {
    c.fail(ViolationKind::WrongType, "$", "relevance annotation must be a JSON object");
    return c.violations;
  }
  c.schema_version(j);
  const json* vid = c.string_field(j, "$", "video_id", true, true);
  c.string_field(j, "$", "query", true, true);
  if (const json* g = c.field(j, "$", "gold_answer", false); g && !g->is_null() && !g->is_string()) {
    c.fail(ViolationKind::WrongType, "$.gold_answer", "'gold_answer' must be a string or null");
  }
  if (doc && vid && vid->get<std::string>() != doc->video_id) {
    c.fail(ViolationKind::DanglingReference, "$.video_id",
           "annotation for '" + vid->get<std::string>() + "' checked against document '" + doc->video_id + "'");
  }
  std::set<std::string> known;
  if (doc) {
    for (const auto& s : doc->scenes) known.insert(s.scene_id);
  }
  if (const json* arr = c.array_field(j, "$", "entries")) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const json& e = (*arr)[i];
      const std::string path = at("$.entries", i);
      if (!e.is_object()) {
        c.fail(ViolationKind::WrongType, path, "entry must be an object");
        continue;
      }
      const json* sid = c.string_field(e, path, "scene_id", true, true);
      c.string_field(e, path, "reason");
      if (const json* score = c.int_field(e, path, "relevance_score")) {
        const auto v = score->get<long long>();
        if (v < 1 || v > 5) {
          c.fail(ViolationKind::ScoreOutOfRange, path + ".relevance_score",
                 "relevance_score " + std::to_string(v) + " outside [1,5]");
        }
      }
      if (const json* f = c.field(e, path, "fused", false); f && !f->is_null() && !f->is_number()) {
        c.fail(ViolationKind::WrongType, path + ".fused", "'fused' must be a number");
      }
      if (const json* p = c.field(e, path, "priority", false);
          p && !p->is_null() && !(p->is_string() && parse_priority(p->get<std::string>()))) {
        c.fail(ViolationKind::InvalidValue, path + ".priority", "'priority' must be \"P1\", \"P2\" or null");
      }
      if (!sid) continue;
      const auto& id = sid->get_ref<const std::string&>();
      if (!seen.insert(id).second) {
        c.fail(ViolationKind::DuplicateId, path + ".scene_id", "scene '" + id + "' scored twice");
      }
      if (doc && !known.count(id)) {
        c.fail(ViolationKind::DanglingReference, path + ".scene_id", "entry references unknown scene '" + id + "'");
      }
    }
  }
  if (const json* clips = c.array_field(j, "$", "key_clips", false)) {
    for (std::size_t i = 0; i < clips->size(); ++i) {
      try {
        clip_from_json((*clips)[i]);
      } catch (const Error& e) {
        c.fail(ViolationKind::InvalidValue, at("$.key_clips", i), e.what());
      }
    }
  }
  return c.violations;
}

namespace {

json parse_json(std::string_view bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ValidationError({{ViolationKind::MalformedJson, "$", e.what()}});
  }
}

}  // namespace

AnnotationDocument document_from_json(const json& j) {
  if (auto v = check_document(j); !v.empty()) throw ValidationError(std::move(v));
  AnnotationDocument doc;
  doc.video_id = j.at("video_id").get<std::string>();
  doc.frame_count = j.at("frame_count").get<FrameIndex>();
  doc.video_summary = j.at("video_summary").get<std::string>();
  if (j.contains("input_hash")) doc.input_hash = j.at("input_hash").get<std::string>();
  for (const auto& s : j.at("scenes")) {
    doc.scenes.push_back({s.at("scene_id").get<std::string>(),
                          {s.at("start").get<FrameIndex>(), s.at("end").get<FrameIndex>()},
                          s.at("description").get<std::string>()});
  }
  for (const auto& ch : j.at("chapters")) {
    doc.chapters.push_back({ch.at("chapter_id").get<std::string>(),
                            ch.at("scene_ids").get<std::vector<std::string>>(),
                            ch.at("summary").get<std::string>()});
  }
  return doc;
}

AnnotationDocument parse_document(std::string_view bytes) { return document_from_json(parse_json(bytes)); }

RelevanceAnnotation relevance_from_json(const json& j, const AnnotationDocument* doc) {
  if (auto v = check_relevance(j, doc); !v.empty()) throw ValidationError(std::move(v));
  RelevanceAnnotation rel;
  rel.video_id = j.at("video_id").get<std::string>();
  rel.query = j.at("query").get<std::string>();
  if (auto it = j.find("gold_answer"); it != j.end() && it->is_string()) rel.gold_answer = it->get<std::string>();
  for (const auto& e : j.at("entries")) {
    RelevanceEntry entry;
    entry.scene_id = e.at("scene_id").get<std::string>();
    entry.relevance_score = e.at("relevance_score").get<int>();
    entry.reason = e.at("reason").get<std::string>();
    if (auto f = e.find("fused"); f != e.end() && f->is_number()) entry.fused = f->get<double>();
    if (auto p = e.find("priority"); p != e.end() && p->is_string()) entry.priority = parse_priority(p->get<std::string>());
    rel.entries.push_back(std::move(entry));
  }
  if (auto it = j.find("key_clips"); it != j.end()) {
    for (const auto& c : *it) rel.key_clips.push_back(clip_from_json(c));
  }
  return rel;
}

RelevanceAnnotation parse_relevance(std::string_view bytes, const AnnotationDocument* doc) {
  return relevance_from_json(parse_json(bytes), doc);
}

json to_json(const AnnotationDocument& doc) {
  json scenes = json::array();
  for (const auto& s : doc.scenes) {
    scenes.push_back({{"scene_id", s.scene_id}, {"start", s.span.start}, {"end", s.span.end},
                      {"description", s.description}});
  }
  json chapters = json::array();
  for (const auto& ch : doc.chapters) {
    chapters.push_back({{"chapter_id", ch.chapter_id}, {"scene_ids", ch.scene_ids}, {"summary", ch.summary}});
  }
  json j = {{"peakclips_schema", kSchemaVersion}, {"video_id", doc.video_id}, {"frame_count", doc.frame_count},
            {"scenes", scenes},   {"chapters", chapters}, {"video_summary", doc.video_summary}};
  if (doc.input_hash) j["input_hash"] = *doc.input_hash;
  return j;
}

json to_json(const RelevanceAnnotation& rel) {
  json entries = json::array();
  for (const auto& e : rel.entries) {
    json je = {{"scene_id", e.scene_id}, {"relevance_score", e.relevance_score}, {"reason", e.reason}};
    if (e.fused) je["fused"] = *e.fused;
    if (e.priority) je["priority"] = std::string(to_string(*e.priority));
    entries.push_back(std::move(je));
  }
  json j = {{"peakclips_schema", kSchemaVersion}, {"video_id", rel.video_id}, {"query", rel.query},
            {"gold_answer", rel.gold_answer ? json(*rel.gold_answer) : json(nullptr)}, {"entries", entries}};
  if (!rel.key_clips.empty()) j["key_clips"] = to_json(rel.key_clips);
  return j;
}

std::string emit_document(const AnnotationDocument& doc) { return to_json(doc).dump(2); }
std::string emit_relevance(const RelevanceAnnotation& rel) { return to_json(rel).dump(2); }

std::string strip_json_payload(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
      const char ch = text[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (ch == '\\') escaped = true;
        else if (ch == '"') in_string = false;
        continue;
      }
      if (ch == '"') in_string = true;
      else if (ch == '{') ++depth;
      else if (ch == '}' && --depth == 0) {
        const std::string_view candidate = text.substr(open, i - open + 1);
        if (json::accept(candidate.begin(), candidate.end())) return std::string(candidate);
        break;
      }
    }
  }
  throw Error(ErrorCode::Parse, "no JSON object found in response");
}

void StatsAccumulator::Running::add(double x) {
  if (n == 0) {
    min = max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  ++n;
  sum += x;
}

void StatsAccumulator::Running::merge(const Running& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  n += o.n;
  sum += o.sum;
  min = std::min(min, o.min);
  max = std::max(max, o.max);
}

CountSummary StatsAccumulator::Running::summary() const {
  return {n, min, max, n ? sum / static_cast<double>(n) : 0.0};
}

void StatsAccumulator::add(const AnnotationDocument& doc) {
  ++videos_;
  scenes_ += doc.scenes.size();
  chapters_ += doc.chapters.size();
  frames_.add(static_cast<double>(doc.frame_count));
  scenes_per_video_.add(static_cast<double>(doc.scenes.size()));
  for (const auto& s : doc.scenes) scene_len_.add(static_cast<double>(s.span.length()));
  const std::size_t n = doc.scenes.size();
  const std::size_t bucket = n < 5 ? 0 : n <= 15 ? 1 : n <= 25 ? 2 : n <= 35 ? 3 : 4;
  ++buckets_[bucket];
}

void StatsAccumulator::add(const RelevanceAnnotation& rel) {
  ++queries_;
  entries_ += rel.entries.size();
  for (const auto& e : rel.entries) {
    if (e.relevance_score >= 1 && e.relevance_score <= 5) ++scores_[static_cast<std::size_t>(e.relevance_score - 1)];
  }
}

void StatsAccumulator::merge(const StatsAccumulator& o) {
  videos_ += o.videos_;
  scenes_ += o.scenes_;
  chapters_ += o.chapters_;
  entries_ += o.entries_;
  queries_ += o.queries_;
  for (std::size_t i = 0; i < 5; ++i) {
    scores_[i] += o.scores_[i];
    buckets_[i] += o.buckets_[i];
  }
  frames_.merge(o.frames_);
  scenes_per_video_.merge(o.scenes_per_video_);
  scene_len_.merge(o.scene_len_);
}

DatasetStats StatsAccumulator::finish() const {
  DatasetStats s;
  s.video_count = videos_;
  s.scene_count = scenes_;
  s.chapter_count = chapters_;
  s.relevance_count = entries_;
  s.query_count = queries_;
  if (videos_ > 0) {
    s.avg_scenes_per_video = static_cast<double>(scenes_) / static_cast<double>(videos_);
    s.avg_chapters_per_video = static_cast<double>(chapters_) / static_cast<double>(videos_);
  }
  s.score_histogram = scores_;
  s.scene_count_buckets = buckets_;
  s.frames_per_video = frames_.summary();
  s.scenes_per_video = scenes_per_video_.summary();
  s.scene_length = scene_len_.summary();
  return s;
}

DatasetStats compute_stats(const std::vector<AnnotationDocument>& documents,
                           const std::vector<RelevanceAnnotation>& relevance) {
  StatsAccumulator acc;
  for (const auto& d : documents) acc.add(d);
  for (const auto& r : relevance) acc.add(r);
  return acc.finish();
}

namespace {

json summary_json(const CountSummary& s) {
  return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}};
}

}  // namespace

json to_json(const DatasetStats& s) {
  json hist = json::object();
  for (std::size_t i = 0; i < 5; ++i) hist[std::to_string(i + 1)] = s.score_histogram[i];
  const auto& b = s.scene_count_buckets;
  return {{"video_count", s.video_count},
          {"scene_count", s.scene_count},
          {"chapter_count", s.chapter_count},
          {"relevance_count", s.relevance_count},
          {"query_count", s.query_count},
          {"avg_scenes_per_video", s.avg_scenes_per_video},
          {"avg_chapters_per_video", s.avg_chapters_per_video},
          {"score_histogram", hist},
          {"frames_per_video", summary_json(s.frames_per_video)},
          {"scenes_per_video", summary_json(s.scenes_per_video)},
          {"scene_length", summary_json(s.scene_length)},
          {"scene_count_buckets",
           {{"lt5", b[0]}, {"5-15", b[1]}, {"16-25", b[2]}, {"26-35", b[3]}, {"gt35", b[4]}}}};
}

std::string format_stats_table(const DatasetStats& s) {
  std::ostringstream os;
  auto row = [&](const std::string& key, const std::string& value) {
    os << std::left << std::setw(26) << key << std::right << std::setw(14) << value << '\n';
  };
  auto num = [](double x) {
    std::ostringstream v;
    v << std::fixed << std::setprecision(2) << x;
    return v.str();
  };
  row("videos", std::to_string(s.video_count));
  row("scenes", std::to_string(s.scene_count));
  row("chapters", std::to_string(s.chapter_count));
  row("queries", std::to_string(s.query_count));
  row("relevance annotations", std::to_string(s.relevance_count));
  row("avg scenes / video", num(s.avg_scenes_per_video));
  row("avg chapters / video", num(s.avg_chapters_per_video));
  for (std::size_t i = 0; i < 5; ++i) row("score " + std::to_string(i + 1), std::to_string(s.score_histogram[i]));
  row("frames / video (mean)", num(s.frames_per_video.mean));
  row("scene length (mean)", num(s.scene_length.mean));
  const char* labels[] = {"videos with <5 scenes", "videos with 5-15", "videos with 16-25", "videos with 26-35",
                          "videos with >35 scenes"};
  for (std::size_t i = 0; i < 5; ++i) row(labels[i], std::to_string(s.scene_count_buckets[i]));
  return os.str();
}

}  // namespace kframes
