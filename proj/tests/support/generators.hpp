#pragma once

#include <random>
#include <string>
#include <vector>

#include "kframes/annotation.hpp"
#include "kframes/timeline.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline double real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline std::string word(Rng& rng, std::size_t max_len = 12) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz ,.'\"\\/{}[]:-_0123456789";
  std::string s;
  const auto n = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(max_len)));
  for (std::size_t i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(uniform(rng, 0, alphabet.size() - 1))];
  if (uniform(rng, 0, 9) == 0) s += "\xc3\xa9\xe2\x9c\x93";  // some UTF-8
  return s;
}

/// Arbitrary clips: may overlap, run off the timeline or be unsorted.
inline std::vector<kframes::KeyClip> raw_clips(Rng& rng, std::int64_t frames, int max_clips = 8) {
  std::vector<kframes::KeyClip> clips;
  const auto n = uniform(rng, 0, max_clips);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto a = uniform(rng, -3, frames + 2);
    const auto len = uniform(rng, 1, std::max<std::int64_t>(1, frames / 3));
    clips.push_back({{a, a + len - 1},
                     uniform(rng, 0, 2) == 0 ? kframes::Priority::P1 : kframes::Priority::P2,
                     "r" + std::to_string(i)});
  }
  return clips;
}

/// Sorted, disjoint, in-range clips.
inline kframes::ClipSet clean_clips(Rng& rng, std::int64_t frames, int max_clips = 6) {
  kframes::ClipSet clips;
  std::int64_t t = uniform(rng, 0, 3);
  const auto n = uniform(rng, 1, max_clips);
  for (std::int64_t i = 0; i < n && t < frames; ++i) {
    const auto len = uniform(rng, 1, std::max<std::int64_t>(1, std::min<std::int64_t>(frames - t, frames / 4 + 1)));
    clips.push_back({{t, t + len - 1}, uniform(rng, 0, 1) ? kframes::Priority::P1 : kframes::Priority::P2, ""});
    t += len + uniform(rng, 0, 12);
  }
  return clips;
}

inline kframes::AnnotationDocument document(Rng& rng) {
  kframes::AnnotationDocument d;
  d.video_id = "vid_" + std::to_string(uniform(rng, 0, 1 << 20));
  d.frame_count = uniform(rng, 1, 500);
  d.video_summary = word(rng, 40);
  if (uniform(rng, 0, 1)) d.input_hash = word(rng, 16);
  std::int64_t t = 0;
  int j = 0;
  while (t < d.frame_count) {
    const auto len = std::min(d.frame_count - t, uniform(rng, 1, 60));
    d.scenes.push_back({"s" + std::to_string(j++), {t, t + len - 1}, word(rng, 30)});
    t += len;
  }
  std::size_t next = 0;
  int c = 0;
  while (next < d.scenes.size()) {
    kframes::ChapterRecord ch{"c" + std::to_string(c++), {}, word(rng, 20)};
    const auto take = static_cast<std::size_t>(uniform(rng, 0, 4));
    for (std::size_t i = 0; i < take && next < d.scenes.size(); ++i) ch.scene_ids.push_back(d.scenes[next++].scene_id);
    if (take == 0) ++next;  // leave a scene unchaptered
    d.chapters.push_back(std::move(ch));
  }
  return d;
}

inline kframes::RelevanceAnnotation relevance(Rng& rng, const kframes::AnnotationDocument& doc) {
  kframes::RelevanceAnnotation r;
  r.video_id = doc.video_id;
  r.query = "q " + word(rng, 20) + "?";
  if (uniform(rng, 0, 1)) r.gold_answer = word(rng, 10);
  for (const auto& s : doc.scenes) {
    kframes::RelevanceEntry e{s.scene_id, static_cast<int>(uniform(rng, 1, 5)), word(rng, 20), std::nullopt, std::nullopt};
    if (uniform(rng, 0, 1)) e.fused = real(rng, 1.0, 5.0);
    if (uniform(rng, 0, 2) == 0) e.priority = uniform(rng, 0, 1) ? kframes::Priority::P1 : kframes::Priority::P2;
    if (e.priority) r.key_clips.push_back({s.span, *e.priority, word(rng, 8)});
    r.entries.push_back(std::move(e));
  }
  return r;
}

}  // namespace gen
