#include "kframes/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli_config.hpp"
#include "kframes/allocation.hpp"
#include "kframes/annotate_pipeline.hpp"
#include "kframes/annotation.hpp"
#include "kframes/error.hpp"
#include "kframes/json_io.hpp"
#include "kframes/llm_client.hpp"
#include "kframes/relevance.hpp"
#include "kframes/reward.hpp"
#include "kframes/segmentation.hpp"
#include "kframes/sim_harness.hpp"

namespace kframes::cli {

using nlohmann::json;

namespace {

enum class LogLevel { Error, Warn, Info, Debug };

struct Context {
  std::ostream& out;
  std::ostream& err;
  LogLevel level = LogLevel::Warn;
  bool table = false;

  void log(LogLevel at, const std::string& msg) const {
    if (at > level) return;
    static const char* names[] = {"error", "warn", "info", "debug"};
    err << "kframes: " << names[static_cast<int>(at)] << ": " << msg << '\n';
  }
};

// Writes to --out when given, else to stdout.
void emit(const Context& ctx, const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    ctx.out << text;
    if (!text.empty() && text.back() != '\n') ctx.out << '\n';
  } else {
    write_file(out_path, text.back() == '\n' ? text : text + "\n");
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

json parse_input_json(const std::string& path) {
  const std::string text = read_input(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

// ------------------------------------------------------------------ segment

struct SegmentArgs {
  std::string histograms;
  std::string out;
  double lambda = 2.0;
  FrameIndex min_scene_len = 8;
  bool normalize = false;
};

int do_segment(const Context& ctx, const SegmentArgs& a) {
  HistogramMatrix<double> h = read_histograms(a.histograms);
  if (a.normalize) h = normalize_l1(std::move(h));
  validate_histograms(h);
  const ScenePartition p = segment(boundary_scores(h), SegmentPolicy{a.lambda, a.min_scene_len});
  ctx.log(LogLevel::Info, std::to_string(p.scene_count()) + " scenes over " + std::to_string(h.rows()) + " frames");
  if (ctx.table) {
    std::ostringstream os;
    for (std::size_t j = 0; j < p.scene_count(); ++j) {
      os << "s" << j << "\t" << p.scene(j).start << "\t" << p.scene(j).end << '\n';
    }
    emit(ctx, a.out, os.str());
  } else {
    emit(ctx, a.out, to_json(p).dump(2));
  }
  return kExitOk;
}

// --------------------------------------------------------------- fuse-score

struct FuseArgs {
  std::string partition;
  std::string llm;
  std::string similarities;
  std::string out;
  double weight = kDefaultFusionWeight;
};

std::vector<LlmSceneScore> read_llm_scores(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    if (j.contains("entries")) arr = &j.at("entries");
    else if (j.contains("relevance")) arr = &j.at("relevance");
  }
  if (!arr->is_array()) throw Error(ErrorCode::Parse, "LLM scores must be an array of {scene_id, relevance_score, reason}");
  std::vector<LlmSceneScore> out;
  for (const auto& e : *arr) {
    try {
      out.push_back({e.at("scene_id").get<std::string>(), e.at("relevance_score").get<int>(), e.value("reason", "")});
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::Parse, std::string("bad LLM score entry: ") + ex.what());
    }
  }
  return out;
}

int do_fuse(const Context& ctx, const FuseArgs& a) {
  const ScenePartition p = partition_from_json(parse_input_json(a.partition));
  const auto scores = read_llm_scores(parse_input_json(a.llm));
  const std::vector<double> sims = read_similarities(a.similarities, p.frame_count());
  const Eigen::Map<const VectorX<double>> sim_vec(sims.data(), static_cast<Eigen::Index>(sims.size()));

  std::map<std::string, const LlmSceneScore*> by_id;
  for (const auto& s : scores) by_id[s.scene_id] = &s;
  json scenes = json::array();
  std::vector<double> fused;
  std::vector<std::string> reasons;
  for (std::size_t j = 0; j < p.scene_count(); ++j) {
    const std::string id = "s" + std::to_string(j);
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorCode::Dimension, "no LLM score for scene " + id);
    const ClipSpan span = p.scene(j);
    const auto f = fuse_clip_score(*it->second, sim_vec.segment(span.start, span.length()), a.weight);
    const auto prio = classify_priority(f.value);
    scenes.push_back({{"scene_id", id},
                      {"start", span.start},
                      {"end", span.end},
                      {"fused", f.value},
                      {"priority", prio ? json(std::string(to_string(*prio))) : json(nullptr)},
                      {"reason", it->second->reason}});
    fused.push_back(f.value);
    reasons.push_back(it->second->reason);
  }
  if (by_id.size() != p.scene_count()) {
    ctx.log(LogLevel::Warn, "ignoring LLM scores for scenes outside the partition");
  }
  const ClipSet clips = extract_key_clips(p, fused, reasons);
  emit(ctx, a.out, json{{"scenes", scenes}, {"clips", to_json(clips)}}.dump(2));
  return kExitOk;
}

// ------------------------------------------------------------------- select

struct SelectArgs {
  std::string clips;
  std::string out;
  std::string strategy = "auto";
  FrameIndex k = 0;
  FrameIndex total_frames = 0;
  double alpha = 4.0;
  double rmin = 0.5;
  FrameIndex tolerance = 2;
  FrameIndex focused_max_k = 8;
  double fps = 0.0;
};

int do_select(const Context& ctx, const SelectArgs& a) {
  const auto strategy = parse_strategy(a.strategy);
  const Timeline timeline(a.total_frames, a.fps > 0.0 ? std::optional<double>(a.fps) : std::nullopt);
  const std::vector<KeyClip> clips = clips_from_json(parse_input_json(a.clips));
  const SelectConfig config{a.tolerance, a.alpha, a.rmin, a.focused_max_k};
  const SelectionResult r = select(*strategy, clips, a.k, timeline, config);
  ctx.log(LogLevel::Info, "selected " + std::to_string(r.indices.size()) + " frames with " +
                              std::string(to_string(r.strategy)));
  if (ctx.table) {
    std::ostringstream os;
    os << "strategy\t" << to_string(r.strategy) << '\n';
    for (const auto& q : r.plan) os << "clip " << q.clip << "\t[" << q.span.start << "," << q.span.end << "]\t"
                                    << to_string(q.priority) << "\tquota " << q.quota << '\n';
    os << "indices";
    for (FrameIndex t : r.indices) os << ' ' << t;
    os << '\n';
    emit(ctx, a.out, os.str());
  } else {
    emit(ctx, a.out, to_json(r, &timeline).dump(2));
  }
  return kExitOk;
}

// ------------------------------------------------------------------- reward

struct RewardArgs {
  std::string input;
  std::string batch;
  std::string out;
  double tau = 0.0;  // 0: take from input, default 1
  double floor = 1e-9;
};

AnswerDistribution distribution_from_json(const json& j) {
  try {
    return {j.at("probs").get<std::vector<double>>(), j.at("correct").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("reward input needs \"probs\" and \"correct\": ") + e.what());
  }
}

double temperature_of(const json& j, const RewardArgs& a) {
  if (a.tau > 0.0) return a.tau;
  if (auto it = j.find("tau"); it != j.end()) {
    if (!it->is_number()) throw Error(ErrorCode::Parse, "\"tau\" must be a number");
    return it->get<double>();
  }
  return 1.0;
}

int do_reward(const Context& ctx, const RewardArgs& a) {
  if (!a.batch.empty()) {
    std::istringstream lines(read_input(a.batch));
    std::string out;
    std::size_t n = 0;
    for (std::string line; std::getline(lines, line);) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ++n;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, a.batch + " line " + std::to_string(n) + ": " + e.what());
      }
      if (!j.contains("group") || !j.at("group").is_array()) {
        throw Error(ErrorCode::Parse, a.batch + " line " + std::to_string(n) + ": expected a \"group\" array");
      }
      const RewardConfig cfg{temperature_of(j, a), a.floor};
      std::vector<double> rewards;
      for (const auto& member : j.at("group")) rewards.push_back(reward(distribution_from_json(member), cfg));
      out += json{{"rewards", rewards}, {"advantages", group_advantage(rewards)}}.dump() + "\n";
    }
    ctx.log(LogLevel::Info, "scored " + std::to_string(n) + " groups");
    emit(ctx, a.out, out);
    return kExitOk;
  }
  const json j = parse_input_json(a.input.empty() ? "-" : a.input);
  const double r = reward(distribution_from_json(j), RewardConfig{temperature_of(j, a), a.floor});
  emit(ctx, a.out, json{{"reward", r}}.dump());
  return kExitOk;
}

// ----------------------------------------------------------- validate/stats

struct ValidateArgs {
  std::vector<std::string> files;
  bool all = false;
};

struct Record {
  std::string file;
  std::size_t line = 0;  // 1-based for JSON-lines files, 0 for whole files
  std::string text;
};

template <typename Fn>
void for_each_record(const std::string& file, Fn&& fn) {
  const bool jsonl = file.size() > 6 && file.substr(file.size() - 6) == ".jsonl";
  if (!jsonl) {
    fn(Record{file, 0, read_input(file)});
    return;
  }
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + file);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(Record{file, n, line});
  }
}

std::string where(const Record& r) { return r.line ? r.file + ":" + std::to_string(r.line) : r.file; }

std::vector<Violation> check_record(const Record& r, const std::map<std::string, AnnotationDocument>& docs) {
  json j;
  try {
    j = json::parse(r.text);
  } catch (const json::parse_error& e) {
    return {{ViolationKind::MalformedJson, "$", e.what()}};
  }
  switch (classify_record(j)) {
    case RecordKind::Document: return check_document(j);
    case RecordKind::Relevance: {
      const AnnotationDocument* doc = nullptr;
      if (j.contains("video_id") && j.at("video_id").is_string()) {
        auto it = docs.find(j.at("video_id").get<std::string>());
        if (it != docs.end()) doc = &it->second;
      }
      return check_relevance(j, doc);
    }
    case RecordKind::Unknown: break;
  }
  return {{ViolationKind::MissingField, "$", "record has neither \"scenes\" nor \"entries\""}};
}

int do_validate(const Context& ctx, const ValidateArgs& a) {
  // Documents first, so relevance records can be cross-checked against them.
  std::map<std::string, AnnotationDocument> docs;
  for (const auto& f : a.files) {
    for_each_record(f, [&](const Record& r) {
      try {
        const json j = json::parse(r.text);
        if (classify_record(j) == RecordKind::Document) {
          AnnotationDocument d = document_from_json(j);
          docs.emplace(d.video_id, std::move(d));
        }
      } catch (const std::exception&) {
      }
    });
  }

  std::size_t records = 0;
  std::size_t invalid = 0;
  json errors = json::array();
  bool stop = false;
  for (const auto& f : a.files) {
    if (stop) break;
    for_each_record(f, [&](const Record& r) {
      if (stop) return;
      ++records;
      auto violations = check_record(r, docs);
      if (violations.empty()) return;
      ++invalid;
      if (!a.all) violations.resize(1);
      for (const auto& v : violations) {
        ctx.err << where(r) << ": " << format_violation(v) << '\n';
        errors.push_back({{"file", r.file}, {"line", r.line}, {"kind", std::string(to_string(v.kind))},
                          {"path", v.path}, {"message", v.message}});
      }
      if (!a.all) stop = true;
    });
  }
  if (ctx.table) {
    ctx.out << "records " << records << "\tinvalid " << invalid << '\n';
  } else {
    ctx.out << json{{"records", records}, {"valid", records - invalid}, {"invalid", invalid}, {"errors", errors}}.dump(2)
            << '\n';
  }
  return invalid ? kExitDomain : kExitOk;
}

struct StatsArgs {
  std::vector<std::string> files;
  std::string out;
};

int do_stats(const Context& ctx, const StatsArgs& a) {
  StatsAccumulator acc;
  for (const auto& f : a.files) {
    for_each_record(f, [&](const Record& r) {
      json j;
      try {
        j = json::parse(r.text);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Validation, where(r) + ": " + e.what());
      }
      try {
        switch (classify_record(j)) {
          case RecordKind::Document: acc.add(document_from_json(j)); break;
          case RecordKind::Relevance: acc.add(relevance_from_json(j)); break;
          case RecordKind::Unknown: throw Error(ErrorCode::Validation, "record has neither \"scenes\" nor \"entries\"");
        }
      } catch (const Error& e) {
        throw Error(ErrorCode::Validation, where(r) + ": " + e.what());
      }
    });
  }
  const DatasetStats s = acc.finish();
  emit(ctx, a.out, ctx.table ? format_stats_table(s) : to_json(s).dump(2));
  return kExitOk;
}

// ----------------------------------------------------------------- annotate

struct AnnotateArgs {
  std::string manifest;
  std::string out_dir = "annotations";
  bool force = false;
  int jobs = 1;
  std::string endpoint = "mock:";
  std::string credential_env;
  double timeout = 60.0;
  int max_retries = 3;
  int max_concurrent = 4;
  double lambda = 2.0;
  FrameIndex min_scene_len = 8;
  double weight = kDefaultFusionWeight;
  bool normalize = false;
};

int do_annotate(const Context& ctx, const AnnotateArgs& a) {
  ProviderConfig pc;
  pc.endpoint = a.endpoint;
  pc.credential_env = a.credential_env;
  pc.timeout_seconds = a.timeout;
  pc.max_retries = a.max_retries;
  pc.max_concurrent_requests = a.max_concurrent;
  auto provider = make_provider(pc);

  AnnotateOptions opts;
  opts.out_dir = a.out_dir;
  opts.force = a.force;
  opts.jobs = a.jobs;
  opts.segment = {a.lambda, a.min_scene_len};
  opts.fusion_weight = a.weight;
  opts.normalize_histograms = a.normalize;
  const AnnotateSummary summary = annotate(read_manifest(a.manifest), *provider, opts);
  for (const auto& v : summary.videos) {
    if (v.status == VideoOutcome::Status::Failed) ctx.log(LogLevel::Error, v.video_id + ": " + v.error);
  }
  ctx.log(LogLevel::Info, "provider calls: " + std::to_string(summary.provider_calls));
  ctx.out << summary.to_json().dump(2) << '\n';
  return summary.count(VideoOutcome::Status::Failed) ? kExitDomain : kExitOk;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  std::vector<std::string> strategies{"uniform", "focused", "hybrid"};
  std::vector<FrameIndex> ks{8, 32};
  FrameIndex frames = 256;
  FrameIndex needle = 8;
  std::size_t seeds = 1000;
  std::uint64_t seed_base = 0;
  int needles = 1;
  double tau = 1.0;
  double p0 = 0.25;
  double gain = 0.7;
  int choices = 4;
  int jobs = 1;
  std::string out;
  std::string summary;
  std::string selection;
  std::vector<std::string> evidence;
};

ClipSpan parse_span(const std::string& text) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    return {std::stoll(text.substr(0, colon)), std::stoll(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--evidence", "spans look like START:END, got '" + text + "'");
  }
}

int do_simulate(const Context& ctx, const SimulateArgs& a) {
  const SimAnswerModel model{a.choices, a.p0, a.gain};
  const RewardConfig reward_cfg{a.tau, 1e-9};
  if (!a.selection.empty()) {
    std::vector<ClipSpan> evidence;
    for (const auto& e : a.evidence) evidence.push_back(parse_span(e));
    const SelectionResult sel = selection_from_json(parse_input_json(a.selection));
    const SelectionScore s = evaluate_selection(sel.indices, evidence, model, reward_cfg);
    emit(ctx, a.out, json{{"recall", s.recall}, {"reward", s.reward},
                          {"frames_in_evidence", frames_in_evidence(sel.indices, evidence)}}.dump(2));
    return kExitOk;
  }

  ExperimentConfig cfg;
  cfg.strategies.clear();
  for (const auto& s : a.strategies) cfg.strategies.push_back(*parse_strategy(s));
  cfg.ks = a.ks;
  cfg.frame_count = a.frames;
  cfg.needle_len = a.needle;
  cfg.seeds = a.seeds;
  cfg.seed_base = a.seed_base;
  cfg.needles = a.needles;
  cfg.model = model;
  cfg.reward = reward_cfg;
  cfg.jobs = a.jobs;
  for (FrameIndex k : cfg.ks) {
    if (k > cfg.frame_count) {
      throw Error(ErrorCode::OverBudget, "k=" + std::to_string(k) + " exceeds T=" + std::to_string(cfg.frame_count));
    }
  }
  const ExperimentReport report = run_experiment(cfg);
  const json summary = report.to_json().at("cells");
  for (const auto& c : report.cells) {
    ctx.log(LogLevel::Info, std::string(to_string(c.strategy)) + " k=" + std::to_string(c.k) +
                                " recall=" + std::to_string(c.mean_recall) + " reward=" + std::to_string(c.mean_reward));
  }
  if (!a.summary.empty()) write_file(a.summary, summary.dump(2) + "\n");
  if (a.out.empty()) {
    ctx.out << report.to_csv();
  } else {
    write_file(a.out, report.to_csv());
    ctx.out << summary.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scene-driven keyframe selection toolkit", "kframes"};
  app.require_subcommand(1, 1);
  app.config_formatter(make_config_formatter());
  app.set_config("--config", "", "Config file (JSON, or TOML/INI); keys mirror flags, per subcommand section");
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::string log_level = "warn";
  std::string format = "json";
  app.add_option("--log-level", log_level, "Diagnostics verbosity")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();

  const auto strategies = CLI::IsMember({"auto", "uniform", "focused", "hybrid"});

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Split a video into scenes from per-frame histograms");
  seg_cmd->add_option("--histograms", seg.histograms, "Histogram CSV or JSON")->required()->check(CLI::ExistingFile);
  seg_cmd->add_option("--lambda", seg.lambda, "Boundary threshold in standard deviations above the mean")->capture_default_str();
  seg_cmd->add_option("--min-scene-len", seg.min_scene_len, "Shortest allowed scene")->check(CLI::PositiveNumber)->capture_default_str();
  seg_cmd->add_flag("--normalize", seg.normalize, "L1-normalize histogram rows before scoring");
  seg_cmd->add_option("--out", seg.out, "Output file (default stdout)");

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse-score", "Fuse LLM scene scores with frame similarities into key clips");
  fuse_cmd->add_option("--partition", fuse.partition, "Scene partition JSON from `segment`")->required();
  fuse_cmd->add_option("--llm", fuse.llm, "LLM scene scores JSON")->required();
  fuse_cmd->add_option("--similarities", fuse.similarities, "Per-frame similarity CSV or JSON")->required()->check(CLI::ExistingFile);
  fuse_cmd->add_option("--fusion-weight", fuse.weight, "Weight of the LLM score")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  fuse_cmd->add_option("--out", fuse.out, "Output file (default stdout)");

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select", "Choose k keyframes from key clips");
  sel_cmd->add_option("--clips", sel.clips, "Clips JSON (array or {\"clips\": [...]}), - for stdin")->required();
  sel_cmd->add_option("--k", sel.k, "Frame budget")->required()->check(CLI::PositiveNumber);
  sel_cmd->add_option("--total-frames", sel.total_frames, "Frames on the working grid")->required()->check(CLI::PositiveNumber);
  sel_cmd->add_option("--strategy", sel.strategy, "Sampling strategy")->check(strategies)->capture_default_str();
  sel_cmd->add_option("--alpha", sel.alpha, "Predicted-to-background length weight")->check(CLI::PositiveNumber)->capture_default_str();
  sel_cmd->add_option("--rmin", sel.rmin, "Minimum predicted share")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sel_cmd->add_option("--tolerance", sel.tolerance, "Merge tolerance in frames")->check(CLI::NonNegativeNumber)->capture_default_str();
  sel_cmd->add_option("--focused-max-k", sel.focused_max_k, "Largest k that auto sends to focused sampling")->check(CLI::NonNegativeNumber)->capture_default_str();
  sel_cmd->add_option("--fps", sel.fps, "Frame rate; adds timestamps to the output")->check(CLI::PositiveNumber);
  sel_cmd->add_option("--out", sel.out, "Output file (default stdout)");

  RewardArgs rew;
  auto* rew_cmd = app.add_subcommand("reward", "Score answer distributions with the tanh log-ratio reward");
  rew_cmd->add_option("--input", rew.input, "JSON {\"probs\", \"correct\", \"tau\"}; - or omitted for stdin");
  rew_cmd->add_option("--batch", rew.batch, "JSON-lines of {\"group\": [{\"probs\", \"correct\"}...], \"tau\"}");
  rew_cmd->add_option("--tau", rew.tau, "Temperature (overrides the input)")->check(CLI::PositiveNumber);
  rew_cmd->add_option("--floor", rew.floor, "Probability floor")->check(CLI::Range(1e-300, 0.5))->capture_default_str();
  rew_cmd->add_option("--out", rew.out, "Output file (default stdout)");

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "Validate annotation documents and relevance annotations");
  val_cmd->add_option("files", val.files, "JSON or JSON-lines files")->required();
  val_cmd->add_flag("--all", val.all, "Report every violation instead of stopping at the first invalid record");

  StatsArgs st;
  auto* st_cmd = app.add_subcommand("stats", "Aggregate corpus statistics");
  st_cmd->add_option("files", st.files, "JSON or JSON-lines files")->required();
  st_cmd->add_option("--out", st.out, "Output file (default stdout)");

  AnnotateArgs ann;
  auto* ann_cmd = app.add_subcommand("annotate", "Build annotation documents with a captioning/scoring provider");
  ann_cmd->add_option("--manifest", ann.manifest, "Video manifest JSON")->required()->check(CLI::ExistingFile);
  ann_cmd->add_option("--out-dir", ann.out_dir, "Output directory")->capture_default_str();
  ann_cmd->add_flag("--force", ann.force, "Rebuild outputs that are already up to date");
  ann_cmd->add_option("--jobs", ann.jobs, "Videos processed in parallel")->check(CLI::PositiveNumber)->capture_default_str();
  ann_cmd->add_option("--endpoint", ann.endpoint, "Provider URL, or mock:[seed=N&malformed=a,b]")->capture_default_str();
  ann_cmd->add_option("--credential-env", ann.credential_env, "Environment variable holding the API key");
  ann_cmd->add_option("--timeout", ann.timeout, "Request timeout in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  ann_cmd->add_option("--max-retries", ann.max_retries, "Retries on transient failures")->check(CLI::NonNegativeNumber)->capture_default_str();
  ann_cmd->add_option("--max-concurrent", ann.max_concurrent, "Requests in flight")->check(CLI::Range(1, 1024))->capture_default_str();
  ann_cmd->add_option("--lambda", ann.lambda, "Scene boundary threshold")->capture_default_str();
  ann_cmd->add_option("--min-scene-len", ann.min_scene_len, "Shortest allowed scene")->check(CLI::PositiveNumber)->capture_default_str();
  ann_cmd->add_option("--fusion-weight", ann.weight, "Weight of the LLM score")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  ann_cmd->add_flag("--normalize", ann.normalize, "L1-normalize histogram rows");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Needle-in-a-haystack comparison of selection strategies");
  sim_cmd->add_option("--strategies", sim.strategies, "Comma-separated strategies")->delimiter(',')->check(strategies)->capture_default_str();
  sim_cmd->add_option("--k", sim.ks, "Comma-separated frame budgets")->delimiter(',')->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--T", sim.frames, "Frames per synthetic video")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--needle", sim.needle, "Evidence span length")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--seeds", sim.seeds, "Number of seeds")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--seed-base", sim.seed_base, "First seed")->capture_default_str();
  sim_cmd->add_option("--needles", sim.needles, "Evidence spans per video")->check(CLI::Range(1, 16))->capture_default_str();
  sim_cmd->add_option("--tau", sim.tau, "Reward temperature")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--p0", sim.p0, "Answer model base probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sim_cmd->add_option("--gain", sim.gain, "Answer model gain")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sim_cmd->add_option("--choices", sim.choices, "Candidate answers")->check(CLI::Range(2, 1000))->capture_default_str();
  sim_cmd->add_option("--jobs", sim.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "CSV report path (default: CSV on stdout)");
  sim_cmd->add_option("--summary", sim.summary, "Write per-cell mean/std JSON here");
  auto* sel_opt = sim_cmd->add_option("--selection", sim.selection, "Score a `select` output instead of running the sweep");
  sim_cmd->add_option("--evidence", sim.evidence, "Evidence spans START:END for --selection")->delimiter(',')->needs(sel_opt);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  Context ctx{out, err};
  try {
    app.parse(argv_rev);
    ctx.level = log_level == "error" ? LogLevel::Error
                : log_level == "info" ? LogLevel::Info
                : log_level == "debug" ? LogLevel::Debug
                                       : LogLevel::Warn;
    ctx.table = format == "table";
    if (sim_cmd->parsed() && !sim.selection.empty() && sim.evidence.empty()) {
      throw CLI::RequiredError("--evidence");
    }
    if (*seg_cmd) return do_segment(ctx, seg);
    if (*fuse_cmd) return do_fuse(ctx, fuse);
    if (*sel_cmd) return do_select(ctx, sel);
    if (*rew_cmd) return do_reward(ctx, rew);
    if (*val_cmd) return do_validate(ctx, val);
    if (*st_cmd) return do_stats(ctx, st);
    if (*ann_cmd) return do_annotate(ctx, ann);
    if (*sim_cmd) return do_simulate(ctx, sim);
    return kExitUsage;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "kframes 1.0.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "kframes: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "kframes: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "kframes: error: " << e.what() << '\n';
    return kExitDomain;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace kframes::cli
