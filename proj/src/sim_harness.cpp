#include "kframes/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <random>
#include <thread>

#include "kframes/error.hpp"

namespace kframes {

namespace {

// Unbiased draw in [0, n); std::uniform_int_distribution is not specified
// bit-for-bit across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr FrameIndex kMinDistractor = 16;
constexpr FrameIndex kMaxDistractor = 48;

// Cuts [lo, hi) into random-length scenes and appends the interior cut points.
void lay_out(FrameIndex lo, FrameIndex hi, std::mt19937_64& rng, std::vector<FrameIndex>& cuts) {
  FrameIndex at = lo;
  while (hi - at > kMaxDistractor) {
    at += kMinDistractor + static_cast<FrameIndex>(bounded(rng, kMaxDistractor - kMinDistractor + 1));
    if (hi - at < kMinDistractor / 2) break;
    cuts.push_back(at);
  }
}

}  // namespace

ClipSet SyntheticVideo::oracle_clips() const {
  ClipSet clips;
  for (const auto& e : evidence) clips.push_back({e, Priority::P1, "planted evidence"});
  return clips;
}

SyntheticVideo generate_video(FrameIndex frame_count, FrameIndex needle_len, std::uint64_t seed, int needles) {
  if (needles < 1) throw Error(ErrorCode::InvalidInput, "need at least one needle");
  if (needle_len < 1) throw Error(ErrorCode::InvalidInput, "needle length must be positive");
  const FrameIndex required = needles * needle_len + (needles - 1);
  if (required > frame_count) {
    throw Error(ErrorCode::InvalidInput, "needles of length " + std::to_string(needle_len) + " do not fit in " +
                                             std::to_string(frame_count) + " frames");
  }
  std::mt19937_64 rng(seed);
  std::vector<ClipSpan> evidence;
  // Free frames in front of each needle; sorted so needles keep their order.
  const FrameIndex slack = frame_count - required;
  std::vector<FrameIndex> offsets;
  for (int i = 0; i < needles; ++i) offsets.push_back(static_cast<FrameIndex>(bounded(rng, static_cast<std::uint64_t>(slack + 1))));
  std::sort(offsets.begin(), offsets.end());
  for (int i = 0; i < needles; ++i) {
    const FrameIndex start = offsets[static_cast<std::size_t>(i)] + i * (needle_len + 1);
    evidence.push_back({start, start + needle_len - 1});
  }

  std::vector<FrameIndex> cuts;
  FrameIndex cursor = 0;
  for (const auto& e : evidence) {
    lay_out(cursor, e.start, rng, cuts);
    if (e.start > 0) cuts.push_back(e.start);
    if (e.end + 1 < frame_count) cuts.push_back(e.end + 1);
    cursor = e.end + 1;
  }
  lay_out(cursor, frame_count, rng, cuts);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<FrameIndex> boundaries{0};
  boundaries.insert(boundaries.end(), cuts.begin(), cuts.end());
  boundaries.push_back(frame_count);
  return {Timeline(frame_count), std::move(evidence), ScenePartition(std::move(boundaries)), seed};
}

HistogramMatrix<double> synthesize_histograms(const SyntheticVideo& video, int bins) {
  if (bins < 3) throw Error(ErrorCode::InvalidInput, "synthetic histograms need at least 3 bins");
  std::mt19937_64 rng(video.seed ^ 0x5eed5eed5eed5eedULL);
  HistogramMatrix<double> h(video.timeline.frame_count(), bins);
  int previous = -1;
  for (const auto& scene : video.scenes.scenes()) {
    int dominant = static_cast<int>(bounded(rng, static_cast<std::uint64_t>(bins)));
    if (dominant == previous) dominant = (dominant + 1) % bins;
    previous = dominant;
    for (FrameIndex t = scene.start; t <= scene.end; ++t) {
      for (int b = 0; b < bins; ++b) h(t, b) = 0.3 / bins * (1.0 + 0.1 * unit(rng));
      h(t, dominant) += 0.7;
      h.row(t) /= h.row(t).sum();
    }
  }
  return h;
}

FrameIndex frames_in_evidence(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence) {
  FrameIndex hits = 0;
  for (FrameIndex t : selection) {
    if (std::any_of(evidence.begin(), evidence.end(), [t](const ClipSpan& e) { return e.contains(t); })) ++hits;
  }
  return hits;
}

double evidence_recall(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence) {
  if (evidence.empty()) throw Error(ErrorCode::InvalidInput, "evidence recall needs at least one evidence span");
  FrameIndex lo = evidence.front().start;
  FrameIndex hi = evidence.front().end;
  for (const auto& e : evidence) {
    if (e.empty()) throw Error(ErrorCode::InvalidInput, "empty evidence span");
    lo = std::min(lo, e.start);
    hi = std::max(hi, e.end);
  }
  std::vector<char> in_evidence(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const auto& e : evidence) {
    for (FrameIndex t = e.start; t <= e.end; ++t) in_evidence[static_cast<std::size_t>(t - lo)] = 1;
  }
  const auto total = std::count(in_evidence.begin(), in_evidence.end(), 1);
  std::vector<char> covered(in_evidence.size(), 0);
  for (FrameIndex t : selection) {
    if (t >= lo && t <= hi && in_evidence[static_cast<std::size_t>(t - lo)]) covered[static_cast<std::size_t>(t - lo)] = 1;
  }
  return static_cast<double>(std::count(covered.begin(), covered.end(), 1)) / static_cast<double>(total);
}

AnswerDistribution simulate_answer(double recall, const SimAnswerModel& model) {
  if (!(recall >= 0.0 && recall <= 1.0)) throw Error(ErrorCode::InvalidInput, "recall must lie in [0,1]");
  if (model.num_choices < 2) throw Error(ErrorCode::InvalidInput, "answer model needs at least 2 choices");
  if (model.base_prob < 0.0 || model.gain < 0.0 || model.base_prob + model.gain > 1.0) {
    throw Error(ErrorCode::InvalidInput, "answer model needs base_prob, gain >= 0 and base_prob + gain <= 1");
  }
  const double correct = model.base_prob + model.gain * recall;
  AnswerDistribution d;
  d.correct_index = 0;
  d.probabilities.assign(static_cast<std::size_t>(model.num_choices),
                         (1.0 - correct) / static_cast<double>(model.num_choices - 1));
  d.probabilities[0] = correct;
  return d;
}

SelectionScore evaluate_selection(const std::vector<FrameIndex>& selection, const std::vector<ClipSpan>& evidence,
                                  const SimAnswerModel& model, const RewardConfig& reward_config) {
  SelectionScore s;
  s.recall = evidence_recall(selection, evidence);
  s.reward = reward(simulate_answer(s.recall, model), reward_config);
  return s;
}

CellSummary summarize(Strategy strategy, FrameIndex k, const std::vector<const ExperimentRow*>& rows) {
  CellSummary c;
  c.strategy = strategy;
  c.k = k;
  c.runs = rows.size();
  if (rows.empty()) return c;
  const auto n = static_cast<double>(rows.size());
  double hits = 0.0;
  double fie = 0.0;
  for (const auto* r : rows) {
    c.mean_recall += r->recall;
    c.mean_reward += r->reward;
    fie += static_cast<double>(r->frames_in_evidence);
    if (r->frames_in_evidence > 0) hits += 1.0;
  }
  c.mean_recall /= n;
  c.mean_reward /= n;
  c.hit_rate = hits / n;
  c.mean_frames_in_evidence = fie / n;
  for (const auto* r : rows) {
    c.std_recall += (r->recall - c.mean_recall) * (r->recall - c.mean_recall);
    c.std_reward += (r->reward - c.mean_reward) * (r->reward - c.mean_reward);
  }
  c.std_recall = std::sqrt(c.std_recall / n);
  c.std_reward = std::sqrt(c.std_reward / n);
  return c;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.strategies.empty() || config.ks.empty()) {
    throw Error(ErrorCode::InvalidInput, "experiment needs at least one strategy and one k");
  }
  const std::size_t ns = config.strategies.size();
  const std::size_t nk = config.ks.size();
  const std::size_t seeds = config.seeds;
  ExperimentReport report;
  report.rows.resize(ns * nk * seeds);

  auto run_seed = [&](std::size_t i) {
    const std::uint64_t seed = config.seed_base + i;
    const SyntheticVideo video = generate_video(config.frame_count, config.needle_len, seed, config.needles);
    const ClipSet oracle = video.oracle_clips();
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t kk = 0; kk < nk; ++kk) {
        const FrameIndex k = config.ks[kk];
        const SelectionResult sel = select(config.strategies[s], oracle, k, video.timeline, config.select);
        const SelectionScore score = evaluate_selection(sel.indices, video.evidence, config.model, config.reward);
        report.rows[(s * nk + kk) * seeds + i] = {config.strategies[s], k, seed, score.recall, score.reward,
                                                  frames_in_evidence(sel.indices, video.evidence)};
      }
    }
  };

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(1, config.jobs)));
  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t i = next++; i < seeds; i = next++) run_seed(i);
    } catch (...) {
      errors[w] = std::current_exception();
      next = seeds;
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < errors.size(); ++w) pool.emplace_back(worker, w);
  worker(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t kk = 0; kk < nk; ++kk) {
      std::vector<const ExperimentRow*> cell;
      for (std::size_t i = 0; i < seeds; ++i) cell.push_back(&report.rows[(s * nk + kk) * seeds + i]);
      report.cells.push_back(summarize(config.strategies[s], config.ks[kk], cell));
    }
  }
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::string out = "strategy,k,seed,recall,reward\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%lld,%llu,%.17g,%.17g\n", std::string(kframes::to_string(r.strategy)).c_str(),
                  static_cast<long long>(r.k), static_cast<unsigned long long>(r.seed), r.recall, r.reward);
    out += buf;
  }
  return out;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& c : cells) {
    cells_json.push_back({{"strategy", std::string(kframes::to_string(c.strategy))},
                          {"k", c.k},
                          {"runs", c.runs},
                          {"recall", {{"mean", c.mean_recall}, {"std", c.std_recall}}},
                          {"reward", {{"mean", c.mean_reward}, {"std", c.std_reward}}},
                          {"hit_rate", c.hit_rate},
                          {"frames_in_evidence", c.mean_frames_in_evidence}});
  }
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"strategy", std::string(kframes::to_string(r.strategy))},
                         {"k", r.k},
                         {"seed", r.seed},
                         {"evidence_recall", r.recall},
                         {"reward", r.reward},
                         {"frames_in_evidence", r.frames_in_evidence}});
  }
  return {{"cells", cells_json}, {"rows", rows_json}};
}

}  // namespace kframes
