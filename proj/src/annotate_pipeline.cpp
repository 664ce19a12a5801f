#include "kframes/annotate_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>

#include "kframes/error.hpp"
#include "kframes/hash.hpp"
#include "kframes/json_io.hpp"
#include "kframes/prompts.hpp"

namespace kframes {

using nlohmann::json;

std::vector<ManifestEntry> parse_manifest(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("videos") || !j.at("videos").is_array()) {
    throw Error(ErrorCode::Parse, "manifest needs a \"videos\" array");
  }
  std::vector<ManifestEntry> out;
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < j.at("videos").size(); ++i) {
    const json& v = j.at("videos")[i];
    const std::string where = "manifest video " + std::to_string(i);
    try {
      ManifestEntry e;
      e.source = v;
      e.video_id = v.at("video_id").get<std::string>();
      if (e.video_id.empty() || e.video_id.find_first_of("/\\") != std::string::npos) {
        throw Error(ErrorCode::Parse, where + ": video_id must be a nonempty file-name-safe string");
      }
      if (!seen.emplace(e.video_id, i).second) throw Error(ErrorCode::Parse, where + ": duplicate video_id " + e.video_id);
      std::filesystem::path h = v.at("histograms").get<std::string>();
      e.histograms = h.is_absolute() ? h : base_dir / h;
      if (v.contains("fps")) e.fps = v.at("fps").get<double>();
      e.frame_ref_prefix = v.value("frame_ref_prefix", e.video_id + "#");
      for (const auto& q : v.value("queries", json::array())) {
        ManifestQuery mq;
        mq.query = q.at("query").get<std::string>();
        if (auto g = q.find("gold_answer"); g != q.end() && g->is_string()) mq.gold_answer = g->get<std::string>();
        e.queries.push_back(std::move(mq));
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::Parse, where + ": " + ex.what());
    }
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_json_file(path), path.parent_path());
}

std::filesystem::path document_path(const std::filesystem::path& out_dir, const std::string& video_id) {
  return out_dir / (video_id + ".doc.json");
}

std::filesystem::path relevance_path(const std::filesystem::path& out_dir, const std::string& video_id) {
  return out_dir / (video_id + ".relevance.jsonl");
}

std::size_t AnnotateSummary::count(VideoOutcome::Status s) const {
  return static_cast<std::size_t>(
      std::count_if(videos.begin(), videos.end(), [s](const VideoOutcome& v) { return v.status == s; }));
}

json AnnotateSummary::to_json() const {
  json vids = json::array();
  for (const auto& v : videos) {
    const char* status = v.status == VideoOutcome::Status::Written   ? "written"
                         : v.status == VideoOutcome::Status::Skipped ? "skipped"
                                                                     : "failed";
    json jv = {{"video_id", v.video_id}, {"status", status}};
    if (!v.error.empty()) jv["error"] = v.error;
    vids.push_back(std::move(jv));
  }
  return {{"written", count(VideoOutcome::Status::Written)},
          {"skipped", count(VideoOutcome::Status::Skipped)},
          {"failed", count(VideoOutcome::Status::Failed)},
          {"provider_calls", provider_calls},
          {"videos", vids}};
}

namespace {

std::string input_hash(const ManifestEntry& e, const std::string& histogram_bytes, const AnnotateOptions& o) {
  std::ostringstream os;
  os.precision(17);
  os << e.source.dump() << '\n'
     << o.segment.threshold_lambda << ' ' << o.segment.min_scene_len << ' ' << o.fusion_weight << ' '
     << o.normalize_histograms << '\n';
  return hex64(mix64(fnv1a(histogram_bytes, fnv1a(os.str()))));
}

bool up_to_date(const VideoOutcome& out, const std::string& hash) {
  if (!std::filesystem::exists(out.document_path) || !std::filesystem::exists(out.relevance_path)) return false;
  try {
    const AnnotationDocument doc = parse_document(read_file(out.document_path));
    return doc.input_hash && *doc.input_hash == hash;
  } catch (const Error&) {
    return false;
  }
}

ScenePartition partition_of(const AnnotationDocument& doc) {
  std::vector<FrameIndex> boundaries;
  for (const auto& s : doc.scenes) boundaries.push_back(s.span.start);
  std::sort(boundaries.begin(), boundaries.end());
  boundaries.push_back(doc.frame_count);
  return ScenePartition(std::move(boundaries));
}

RelevanceAnnotation score_query(const ManifestEntry& e, const ManifestQuery& q, const AnnotationDocument& doc,
                                Provider& provider, const AnnotateOptions& options) {
  std::vector<SceneBrief> briefs;
  for (const auto& s : doc.scenes) briefs.push_back({s.scene_id, s.span, s.description});
  const CompletionResponse reply = provider.complete({build_relevance_prompt(q.query, q.gold_answer, briefs), {}, 0});
  std::vector<RelevanceEntry> scored = parse_relevance_response(reply.text);

  std::map<std::string, RelevanceEntry> by_scene;
  for (auto& entry : scored) {
    const std::string id = entry.scene_id;
    if (!by_scene.emplace(id, std::move(entry)).second) throw Error(ErrorCode::Parse, "scene " + id + " scored twice");
  }

  std::vector<std::string> refs;
  refs.reserve(static_cast<std::size_t>(doc.frame_count));
  for (FrameIndex t = 0; t < doc.frame_count; ++t) refs.push_back(e.frame_ref_prefix + std::to_string(t));
  const std::vector<double> sims = provider.similarity(q.query, refs);
  const Eigen::Map<const VectorX<double>> sim_vec(sims.data(), static_cast<Eigen::Index>(sims.size()));

  // Scenes in temporal order so fused scores align with the partition.
  std::vector<const SceneRecord*> ordered;
  for (const auto& s : doc.scenes) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const SceneRecord* a, const SceneRecord* b) { return a->span.start < b->span.start; });

  RelevanceAnnotation rel;
  rel.video_id = doc.video_id;
  rel.query = q.query;
  rel.gold_answer = q.gold_answer;
  std::vector<double> fused;
  std::vector<std::string> reasons;
  for (const SceneRecord* s : ordered) {
    auto it = by_scene.find(s->scene_id);
    if (it == by_scene.end()) throw Error(ErrorCode::Parse, "no relevance score for scene " + s->scene_id);
    RelevanceEntry entry = it->second;
    by_scene.erase(it);
    const LlmSceneScore llm{entry.scene_id, entry.relevance_score, entry.reason};
    const auto score = fuse_clip_score(llm, sim_vec.segment(s->span.start, s->span.length()), options.fusion_weight);
    entry.fused = score.value;
    entry.priority = classify_priority(score.value);
    fused.push_back(score.value);
    reasons.push_back(entry.reason);
    rel.entries.push_back(std::move(entry));
  }
  if (!by_scene.empty()) throw Error(ErrorCode::Parse, "relevance score for unknown scene " + by_scene.begin()->first);
  rel.key_clips = extract_key_clips(partition_of(doc), fused, reasons);
  return rel;
}

VideoOutcome annotate_one(const ManifestEntry& e, Provider& provider, const AnnotateOptions& options) {
  VideoOutcome out;
  out.video_id = e.video_id;
  out.document_path = document_path(options.out_dir, e.video_id);
  out.relevance_path = relevance_path(options.out_dir, e.video_id);
  try {
    const std::string bytes = read_file(e.histograms);
    const std::string hash = input_hash(e, bytes, options);
    if (!options.force && up_to_date(out, hash)) {
      out.status = VideoOutcome::Status::Skipped;
      return out;
    }

    HistogramMatrix<double> h = e.histograms.extension() == ".json" ? parse_histogram_json(json::parse(bytes))
                                                                    : parse_histogram_csv(bytes);
    if (options.normalize_histograms) h = normalize_l1(std::move(h));
    validate_histograms(h);
    const ScenePartition partition = segment(boundary_scores(h), options.segment);

    VideoMeta meta{e.video_id, h.rows(), e.fps, {}};
    for (std::size_t j = 0; j < partition.scene_count(); ++j) meta.scenes.emplace_back("s" + std::to_string(j), partition.scene(j));
    const CompletionResponse caption = provider.complete({build_caption_prompt(meta), {}, 0});
    CaptionResult parsed = parse_caption_response(caption.text, meta);

    AnnotationDocument doc;
    doc.video_id = e.video_id;
    doc.frame_count = h.rows();
    doc.scenes = std::move(parsed.scenes);
    doc.chapters = std::move(parsed.chapters);
    doc.video_summary = std::move(parsed.video_summary);
    doc.input_hash = hash;
    doc = document_from_json(to_json(doc));

    std::string lines;
    for (const auto& q : e.queries) {
      const RelevanceAnnotation rel = score_query(e, q, doc, provider, options);
      relevance_from_json(to_json(rel), &doc);
      lines += to_json(rel).dump() + "\n";
    }
    write_file(out.relevance_path, lines);
    write_file(out.document_path, emit_document(doc) + "\n");
    out.status = VideoOutcome::Status::Written;
  } catch (const std::exception& ex) {
    out.status = VideoOutcome::Status::Failed;
    out.error = ex.what();
  }
  return out;
}

}  // namespace

AnnotateSummary annotate(const std::vector<ManifestEntry>& videos, Provider& provider, const AnnotateOptions& options) {
  const std::size_t calls_before = provider.calls();
  AnnotateSummary summary;
  summary.videos.resize(videos.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < videos.size(); i = next++) summary.videos[i] = annotate_one(videos[i], provider, options);
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, options.jobs)), std::max<std::size_t>(1, videos.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < jobs; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  summary.provider_calls = provider.calls() - calls_before;
  return summary;
}

}  // namespace kframes
