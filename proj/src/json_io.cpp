#include "kframes/json_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kframes/error.hpp"

namespace kframes {

using nlohmann::json;

json to_json(const KeyClip& clip) {
  return {{"start", clip.span.start},
          {"end", clip.span.end},
          {"priority", std::string(to_string(clip.priority))},
          {"reason", clip.rationale}};
}

KeyClip clip_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Parse, "clip must be a JSON object");
  for (const char* key : {"start", "end"}) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
      throw Error(ErrorCode::Parse, std::string("clip field '") + key + "' must be an integer");
    }
  }
  KeyClip clip;
  clip.span = {j.at("start").get<FrameIndex>(), j.at("end").get<FrameIndex>()};
  if (!j.contains("priority") || !j.at("priority").is_string()) {
    throw Error(ErrorCode::Parse, "clip field 'priority' must be \"P1\" or \"P2\"");
  }
  auto p = parse_priority(j.at("priority").get<std::string>());
  if (!p) throw Error(ErrorCode::Parse, "clip priority must be \"P1\" or \"P2\"");
  clip.priority = *p;
  if (auto it = j.find("reason"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorCode::Parse, "clip field 'reason' must be a string");
    clip.rationale = it->get<std::string>();
  }
  return clip;
}

json to_json(const ClipSet& clips) {
  json arr = json::array();
  for (const auto& c : clips) arr.push_back(to_json(c));
  return arr;
}

std::vector<KeyClip> clips_from_json(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    auto it = j.find("clips");
    if (it == j.end()) throw Error(ErrorCode::Parse, "expected a \"clips\" array");
    arr = &*it;
  }
  if (!arr->is_array()) throw Error(ErrorCode::Parse, "clips must be a JSON array");
  std::vector<KeyClip> clips;
  clips.reserve(arr->size());
  for (const auto& c : *arr) clips.push_back(clip_from_json(c));
  return clips;
}

json to_json(const ScenePartition& partition) {
  json scenes = json::array();
  for (const auto& s : partition.scenes()) scenes.push_back({{"start", s.start}, {"end", s.end}});
  return {{"boundaries", partition.boundaries()}, {"scenes", scenes}};
}

ScenePartition partition_from_json(const json& j) {
  if (!j.is_object() || !j.contains("boundaries") || !j.at("boundaries").is_array()) {
    throw Error(ErrorCode::Parse, "scene partition needs a \"boundaries\" array");
  }
  try {
    return ScenePartition(j.at("boundaries").get<std::vector<FrameIndex>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad boundaries: ") + e.what());
  }
}

json to_json(const SelectionResult& result, const Timeline* timeline) {
  json plan = json::array();
  for (const auto& q : result.plan) {
    plan.push_back({{"clip", q.clip},
                    {"start", q.span.start},
                    {"end", q.span.end},
                    {"priority", std::string(to_string(q.priority))},
                    {"quota", q.quota}});
  }
  json j = {{"indices", result.indices}, {"strategy", std::string(to_string(result.strategy))}, {"plan", plan}};
  if (timeline && timeline->fps()) {
    json ts = json::array();
    for (FrameIndex t : result.indices) ts.push_back(*timeline->timestamp(t));
    j["timestamps"] = ts;
  }
  return j;
}

SelectionResult selection_from_json(const json& j) {
  if (!j.is_object() || !j.contains("indices") || !j.at("indices").is_array()) {
    throw Error(ErrorCode::Parse, "selection needs an \"indices\" array");
  }
  SelectionResult r;
  try {
    r.indices = j.at("indices").get<std::vector<FrameIndex>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad indices: ") + e.what());
  }
  if (auto it = j.find("strategy"); it != j.end() && it->is_string()) {
    auto s = parse_strategy(it->get<std::string>());
    if (!s) throw Error(ErrorCode::Parse, "unknown strategy " + it->dump());
    r.strategy = *s;
  }
  if (auto it = j.find("plan"); it != j.end() && it->is_array()) {
    for (const auto& q : *it) {
      ClipQuota cq;
      cq.clip = q.value("clip", std::size_t{0});
      cq.quota = q.value("quota", FrameIndex{0});
      cq.span = {q.value("start", FrameIndex{0}), q.value("end", FrameIndex{0})};
      cq.priority = parse_priority(q.value("priority", std::string("P2"))).value_or(Priority::P2);
      r.plan.push_back(cq);
    }
  }
  return r;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, std::size_t line) {
  s = trim(s);
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": not a number '" + buf + "'");
  }
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n')) {
    if (!trim(l).empty()) out.push_back(l);
  }
  return out;
}

}  // namespace

HistogramMatrix<double> parse_histogram_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::Parse, "empty histogram CSV");
  const auto header = split(lines.front(), ',');
  for (std::size_t b = 0; b < header.size(); ++b) {
    if (trim(header[b]) != "bin_" + std::to_string(b)) {
      throw Error(ErrorCode::Parse, "histogram CSV header must be bin_0..bin_{B-1}");
    }
  }
  const auto bins = static_cast<Eigen::Index>(header.size());
  HistogramMatrix<double> h(static_cast<Eigen::Index>(lines.size() - 1), bins);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (static_cast<Eigen::Index>(cells.size()) != bins) {
      throw Error(ErrorCode::Dimension, "line " + std::to_string(r + 1) + ": expected " + std::to_string(bins) +
                                            " bins, got " + std::to_string(cells.size()));
    }
    for (Eigen::Index b = 0; b < bins; ++b) {
      h(static_cast<Eigen::Index>(r - 1), b) = to_double(cells[static_cast<std::size_t>(b)], r + 1);
    }
  }
  return h;
}

HistogramMatrix<double> parse_histogram_json(const json& j) {
  if (!j.is_object() || !j.contains("frames") || !j.at("frames").is_array()) {
    throw Error(ErrorCode::Parse, "histogram JSON needs a \"frames\" array");
  }
  const auto& frames = j.at("frames");
  Eigen::Index bins = j.contains("bins") ? j.at("bins").get<Eigen::Index>()
                                         : (frames.empty() ? 0 : static_cast<Eigen::Index>(frames.at(0).size()));
  HistogramMatrix<double> h(static_cast<Eigen::Index>(frames.size()), bins);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& row = frames[t];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != bins) {
      throw Error(ErrorCode::Dimension, "frame " + std::to_string(t) + " does not have " + std::to_string(bins) + " bins");
    }
    for (Eigen::Index b = 0; b < bins; ++b) {
      const auto& v = row[static_cast<std::size_t>(b)];
      if (!v.is_number()) throw Error(ErrorCode::Parse, "frame " + std::to_string(t) + " has a non-numeric bin");
      h(static_cast<Eigen::Index>(t), b) = v.get<double>();
    }
  }
  return h;
}

HistogramMatrix<double> read_histograms(const std::filesystem::path& path) {
  if (path.extension() == ".json") return parse_histogram_json(read_json_file(path));
  return parse_histogram_csv(read_file(path));
}

std::string histograms_to_csv(const HistogramMatrix<double>& h) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index b = 0; b < h.cols(); ++b) os << (b ? "," : "") << "bin_" << b;
  os << '\n';
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    for (Eigen::Index b = 0; b < h.cols(); ++b) os << (b ? "," : "") << h(t, b);
    os << '\n';
  }
  return os.str();
}

namespace {

std::vector<double> collect_similarities(const std::vector<std::pair<FrameIndex, double>>& rows,
                                         FrameIndex frame_count) {
  std::vector<double> sims(static_cast<std::size_t>(frame_count), 0.0);
  std::vector<bool> seen(static_cast<std::size_t>(frame_count), false);
  for (auto [t, s] : rows) {
    if (t < 0 || t >= frame_count) {
      throw Error(ErrorCode::InvalidInput, "similarity for frame " + std::to_string(t) + " outside the timeline");
    }
    if (!(s >= -1.0 && s <= 1.0)) {
      throw Error(ErrorCode::InvalidInput, "similarity for frame " + std::to_string(t) + " outside [-1,1]");
    }
    sims[static_cast<std::size_t>(t)] = s;
    seen[static_cast<std::size_t>(t)] = true;
  }
  for (FrameIndex t = 0; t < frame_count; ++t) {
    if (!seen[static_cast<std::size_t>(t)]) {
      throw Error(ErrorCode::InsufficientData, "no similarity for frame " + std::to_string(t));
    }
  }
  return sims;
}

}  // namespace

std::vector<double> parse_similarity_csv(std::string_view text, FrameIndex frame_count) {
  std::vector<std::pair<FrameIndex, double>> rows;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split(lines[i], ',');
    if (cells.size() != 2) throw Error(ErrorCode::Parse, "line " + std::to_string(i + 1) + ": expected 2 columns");
    if (i == 0 && trim(cells[0]) == "frame_index") continue;
    const double t = to_double(cells[0], i + 1);
    rows.emplace_back(static_cast<FrameIndex>(t), to_double(cells[1], i + 1));
  }
  return collect_similarities(rows, frame_count);
}

std::vector<double> parse_similarity_json(const json& j, FrameIndex frame_count) {
  std::vector<std::pair<FrameIndex, double>> rows;
  if (j.is_object() && j.contains("similarities")) {
    const auto& arr = j.at("similarities");
    for (std::size_t t = 0; t < arr.size(); ++t) rows.emplace_back(static_cast<FrameIndex>(t), arr[t].get<double>());
  } else if (j.is_array()) {
    for (const auto& r : j) rows.emplace_back(r.at("frame_index").get<FrameIndex>(), r.at("similarity").get<double>());
  } else {
    throw Error(ErrorCode::Parse, "similarity JSON must be {\"similarities\": [...]} or an array of rows");
  }
  return collect_similarities(rows, frame_count);
}

std::vector<double> read_similarities(const std::filesystem::path& path, FrameIndex frame_count) {
  if (path.extension() == ".json") return parse_similarity_json(read_json_file(path), frame_count);
  return parse_similarity_csv(read_file(path), frame_count);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
  out << contents;
}

}  // namespace kframes
