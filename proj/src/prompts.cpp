#include "kframes/prompts.hpp"

#include <map>
#include <sstream>

#include "kframes/error.hpp"

namespace kframes {

using nlohmann::json;

namespace {

void input_block(std::ostringstream& os, const json& input) {
  os << kInputBegin << '\n' << input.dump() << '\n' << kInputEnd << '\n';
}

}  // namespace

std::string build_caption_prompt(const VideoMeta& meta) {
  json scenes = json::array();
  for (const auto& [id, span] : meta.scenes) scenes.push_back({{"scene_id", id}, {"start", span.start}, {"end", span.end}});
  json input = {{"video_id", meta.video_id}, {"frame_count", meta.frame_count}, {"scenes", scenes}};
  if (meta.fps) input["fps"] = *meta.fps;

  std::ostringstream os;
  os << "You are a " << kCaptionRole << ".\n\n"
     << "Work through the video in stages:\n"
     << "1. Skim the whole video once to understand its overall context.\n"
     << "2. For every scene listed below, read any on-screen text (OCR) and describe the subjects, actions,\n"
     << "   setting and composition you see.\n"
     << "3. If a listed boundary splits one continuous shot, or hides a cut, adjust the scene spans by merging\n"
     << "   or splitting. Spans must stay contiguous and cover every frame exactly once.\n"
     << "4. Group related consecutive scenes into thematic chapters. A scene belongs to at most one chapter.\n"
     << "5. Finish with a short summary of the entire video.\n\n"
     << "Respond with strict JSON only, no commentary, using exactly these top-level keys:\n"
     << "{\"scenes\": [{\"scene_id\": str, \"start\": int, \"end\": int, \"description\": str}],\n"
     << " \"chapters\": [{\"chapter_id\": str, \"scene_ids\": [str], \"summary\": str}],\n"
     << " \"video_summary\": str}\n"
     << "Frame indices are 0-based and inclusive.\n\n";
  input_block(os, input);
  return os.str();
}

std::string build_relevance_prompt(std::string_view query, const std::optional<std::string>& gold_answer,
                                   const std::vector<SceneBrief>& scenes) {
  if (query.empty()) throw Error(ErrorCode::InvalidInput, "relevance prompt needs a nonempty query");
  json list = json::array();
  for (const auto& s : scenes) {
    list.push_back({{"scene_id", s.scene_id}, {"start", s.span.start}, {"end", s.span.end}, {"description", s.description}});
  }
  json input = {{"question", query}, {"gold_answer", gold_answer ? json(*gold_answer) : json(nullptr)}, {"scenes", list}};

  std::ostringstream os;
  os << "You are a " << kRelevanceRole << ".\n\n"
     << "You receive a question about a video, its gold-standard answer, and the video's scenes with\n"
     << "descriptions. Use the question and answer as the reference and rate how much each scene helps to\n"
     << "answer the question.\n\n"
     << "Question: " << query << '\n'
     << "Gold-standard answer: " << (gold_answer ? *gold_answer : std::string("(not provided)")) << "\n\n"
     << "Scale:\n"
     << "- 5 (Directly Relevant): the scene itself shows the evidence that settles the question.\n"
     << "- 4 (Highly Relevant): the scene gives strong support but is not the decisive evidence.\n"
     << "- 3 (Moderately Relevant): related people, objects or places appear, but nothing decisive.\n"
     << "- 2 (Slightly Relevant): only a weak or indirect link to the question.\n"
     << "- 1 (Not Relevant): nothing in the scene helps answer the question.\n\n"
     << "Give every scene exactly one integer score and a concise reason.\n"
     << "Respond with strict JSON only:\n"
     << "{\"relevance\": [{\"scene_id\": str, \"relevance_score\": int, \"reason\": str}]}\n\n";
  input_block(os, input);
  return os.str();
}

std::optional<json> extract_prompt_input(std::string_view prompt) {
  const auto begin = prompt.find(kInputBegin);
  if (begin == std::string_view::npos) return std::nullopt;
  const auto body = begin + kInputBegin.size();
  const auto end = prompt.find(kInputEnd, body);
  if (end == std::string_view::npos) return std::nullopt;
  const auto text = prompt.substr(body, end - body);
  if (!json::accept(text.begin(), text.end())) return std::nullopt;
  return json::parse(text.begin(), text.end());
}

namespace {

json parse_payload(std::string_view text) {
  const std::string payload = strip_json_payload(text);
  return json::parse(payload);
}

const std::string& require_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::Parse, where + ": '" + key + "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

CaptionResult parse_caption_response(std::string_view text, const VideoMeta& requested) {
  const json j = parse_payload(text);
  if (!j.is_object() || !j.contains("scenes") || !j.at("scenes").is_array()) {
    throw Error(ErrorCode::Parse, "caption response needs a \"scenes\" array");
  }
  std::map<std::string, ClipSpan> known(requested.scenes.begin(), requested.scenes.end());
  CaptionResult out;
  for (const auto& s : j.at("scenes")) {
    if (!s.is_object()) throw Error(ErrorCode::Parse, "caption scene must be an object");
    SceneRecord rec;
    rec.scene_id = require_string(s, "scene_id", "caption scene");
    rec.description = require_string(s, "description", "scene " + rec.scene_id);
    if (s.contains("start") && s.contains("end")) {
      if (!s.at("start").is_number_integer() || !s.at("end").is_number_integer()) {
        throw Error(ErrorCode::Parse, "scene " + rec.scene_id + ": start/end must be integers");
      }
      rec.span = {s.at("start").get<FrameIndex>(), s.at("end").get<FrameIndex>()};
    } else if (auto it = known.find(rec.scene_id); it != known.end()) {
      rec.span = it->second;
    } else {
      throw Error(ErrorCode::Parse, "scene " + rec.scene_id + " has no span and was not requested");
    }
    out.scenes.push_back(std::move(rec));
  }
  if (auto it = j.find("chapters"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::Parse, "\"chapters\" must be an array");
    for (const auto& ch : *it) {
      ChapterRecord rec;
      rec.chapter_id = require_string(ch, "chapter_id", "chapter");
      rec.summary = require_string(ch, "summary", "chapter " + rec.chapter_id);
      if (!ch.contains("scene_ids") || !ch.at("scene_ids").is_array()) {
        throw Error(ErrorCode::Parse, "chapter " + rec.chapter_id + ": scene_ids must be an array");
      }
      for (const auto& sid : ch.at("scene_ids")) {
        if (!sid.is_string()) throw Error(ErrorCode::Parse, "chapter " + rec.chapter_id + ": scene ids must be strings");
        rec.scene_ids.push_back(sid.get<std::string>());
      }
      out.chapters.push_back(std::move(rec));
    }
  }
  out.video_summary = require_string(j, "video_summary", "caption response");
  return out;
}

std::vector<RelevanceEntry> parse_relevance_response(std::string_view text) {
  const json j = parse_payload(text);
  const json* arr = nullptr;
  if (j.is_object() && j.contains("relevance")) arr = &j.at("relevance");
  if (!arr || !arr->is_array()) throw Error(ErrorCode::Parse, "relevance response needs a \"relevance\" array");
  std::vector<RelevanceEntry> out;
  for (const auto& e : *arr) {
    if (!e.is_object()) throw Error(ErrorCode::Parse, "relevance entry must be an object");
    RelevanceEntry entry;
    entry.scene_id = require_string(e, "scene_id", "relevance entry");
    if (!e.contains("relevance_score") || !e.at("relevance_score").is_number_integer()) {
      throw Error(ErrorCode::Parse, "scene " + entry.scene_id + ": relevance_score must be an integer");
    }
    entry.relevance_score = e.at("relevance_score").get<int>();
    if (entry.relevance_score < 1 || entry.relevance_score > 5) {
      throw Error(ErrorCode::Parse, "scene " + entry.scene_id + ": relevance_score outside [1,5]");
    }
    entry.reason = require_string(e, "reason", "scene " + entry.scene_id);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace kframes
