#include <doctest.h>

#include <set>

#include "kframes/allocation.hpp"
#include "kframes/error.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace kframes;

namespace {

KeyClip p1(FrameIndex a, FrameIndex b) { return {{a, b}, Priority::P1, ""}; }
KeyClip p2(FrameIndex a, FrameIndex b) { return {{a, b}, Priority::P2, ""}; }

using Idx = std::vector<FrameIndex>;

Idx range(FrameIndex a, FrameIndex b) {
  Idx r;
  for (FrameIndex t = a; t <= b; ++t) r.push_back(t);
  return r;
}

std::vector<std::int64_t> oracle_plan(const ClipSet& clips, FrameIndex k) {
  std::vector<oracle::Clip> oc;
  for (const auto& c : clips) oc.push_back({c.span.length(), c.priority == Priority::P1 ? 2 : 1});
  return oracle::apportion(oc, k);
}

void check_valid_selection(const SelectionResult& r, FrameIndex k, const Timeline& t) {
  REQUIRE(static_cast<FrameIndex>(r.indices.size()) == k);
  for (std::size_t i = 0; i < r.indices.size(); ++i) {
    CHECK(t.contains(r.indices[i]));
    if (i) CHECK(r.indices[i - 1] < r.indices[i]);
  }
}

}  // namespace

TEST_CASE("weighted_allocation examples") {
  CHECK(weighted_allocation({p1(10, 19), p2(30, 39)}, 6).quotas == Idx{4, 2});
  CHECK(weighted_allocation({p1(0, 9)}, 8).quotas == Idx{8});
  CHECK(weighted_allocation({p1(0, 0), p2(10, 19)}, 4).quotas == Idx{1, 3});
  CHECK(oracle_plan({p1(0, 0), p2(10, 19)}, 4) == std::vector<std::int64_t>{1, 3});
}

TEST_CASE("weighted_allocation caps at total length and rejects bad input") {
  const auto plan = weighted_allocation({p1(0, 2), p2(10, 11)}, 50);
  CHECK(plan.quotas == Idx{3, 2});
  CHECK(plan.total() == 5);
  CHECK_THROWS_AS(weighted_allocation({p1(0, 2)}, 0), Error);
  try {
    weighted_allocation({}, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoClips);
  }
}

TEST_CASE("weighted_allocation breaks remainder ties toward the earlier clip") {
  CHECK(weighted_allocation({p2(0, 9), p2(20, 29)}, 3).quotas == Idx{2, 1});
  CHECK(weighted_allocation({p2(0, 9), p2(20, 29), p2(40, 49)}, 4).quotas == Idx{2, 1, 1});
}

TEST_CASE("enforce_p1_guarantee examples") {
  CHECK(enforce_p1_guarantee({{0, 3}}, {p1(0, 0), p2(10, 30)}).quotas == Idx{1, 2});
  const AllocationPlan ok{{2, 1}};
  CHECK(enforce_p1_guarantee(ok, {p1(0, 5), p2(10, 20)}) == ok);
  // Three P1 clips and only two frames: the two longest get one each.
  const auto relaxed = enforce_p1_guarantee({{1, 1, 0}}, {p1(0, 9), p1(20, 22), p1(30, 34)});
  CHECK(relaxed.quotas == Idx{1, 0, 1});
}

TEST_CASE("enforce_p1_guarantee donor order") {
  // P2 donors with spare frames go first, largest quota first.
  CHECK(enforce_p1_guarantee({{0, 3, 2}}, {p1(0, 0), p2(10, 19), p2(30, 39)}).quotas == Idx{1, 2, 2});
  // Equal quotas: the later clip donates.
  CHECK(enforce_p1_guarantee({{0, 2, 2}}, {p1(0, 0), p2(10, 19), p2(30, 39)}).quotas == Idx{1, 2, 1});
  // No P2 spare: a P1 clip with spare frames donates.
  CHECK(enforce_p1_guarantee({{0, 3, 1}}, {p1(0, 0), p1(10, 19), p2(30, 39)}).quotas == Idx{1, 2, 1});
  // Only single-frame P2 clips left: one of them gives its frame up.
  CHECK(enforce_p1_guarantee({{0, 1, 1}}, {p1(0, 0), p2(10, 19), p2(30, 39)}).quotas == Idx{1, 1, 0});
}

TEST_CASE("equally_spaced examples") {
  CHECK(equally_spaced({10, 19}, 4) == Idx{10, 13, 16, 19});
  CHECK(equally_spaced({10, 19}, 10) == range(10, 19));
  CHECK(equally_spaced({10, 19}, 1) == Idx{14});
  CHECK(equally_spaced({10, 19}, 0).empty());
  CHECK(equally_spaced({10, 19}, 2) == Idx{10, 19});
  try {
    equally_spaced({10, 19}, 11);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverBudget);
  }
}

TEST_CASE("uniform_sample examples") {
  CHECK(uniform_sample(Timeline(256), 8).indices == Idx{16, 48, 80, 112, 144, 176, 208, 240});
  CHECK(uniform_sample(Timeline(8), 8).indices == range(0, 7));
  CHECK(uniform_sample(Timeline(100), 4).indices == Idx{12, 37, 62, 87});
  CHECK(uniform_sample(Timeline(100), 4).strategy == Strategy::Uniform);
}

TEST_CASE("focused_sample examples") {
  const auto a = focused_sample({p1(100, 107)}, 8, Timeline(256));
  CHECK(a.indices == range(100, 107));
  CHECK(a.strategy == Strategy::Focused);

  const auto b = focused_sample({p1(10, 19), p2(30, 39)}, 6, Timeline(50));
  CHECK(b.indices == Idx{10, 13, 16, 19, 30, 39});
  REQUIRE(b.plan.size() == 2);
  CHECK(b.plan[0].quota == 4);
  CHECK(b.plan[1].quota == 2);

  CHECK(focused_sample({p1(48, 49)}, 4, Timeline(50)).indices == Idx{0, 1, 48, 49});
}

TEST_CASE("focused top-up prefers the tail after the last clip") {
  const auto r = focused_sample({p1(10, 11)}, 6, Timeline(30));
  REQUIRE(r.indices.size() == 6);
  CHECK(r.indices[0] == 10);
  CHECK(r.indices[1] == 11);
  for (std::size_t i = 2; i < 6; ++i) CHECK(r.indices[i] > 11);
}

TEST_CASE("focused_sample merges close same-priority clips") {
  const auto r = focused_sample({p1(5, 10), p1(12, 15)}, 3, Timeline(40));
  REQUIRE(r.plan.size() == 1);
  CHECK(r.plan[0].span == ClipSpan{5, 15});
}

TEST_CASE("hybrid_shares examples") {
  const auto a = hybrid_shares(50, 150, 32);
  CHECK(a.predicted_raw == 18);
  CHECK(a.predicted == 18);
  CHECK(a.background == 14);

  const auto b = hybrid_shares(4, 252, 32);
  CHECK(b.predicted == 4);
  CHECK(b.background == 28);

  const auto c = hybrid_shares(0, 64, 8);
  CHECK(c.predicted == 0);
  CHECK(c.background == 8);

  const auto d = hybrid_shares(60, 4, 32);
  CHECK(d.predicted_raw == 31);
  CHECK(d.predicted == 31);
  CHECK(d.background == 1);
}

TEST_CASE("hybrid_sample with no clips equals uniform") {
  const Timeline t(64);
  CHECK(hybrid_sample({}, 8, t).indices == uniform_sample(t, 8).indices);
}

TEST_CASE("select dispatch") {
  const Timeline t(256);
  const ClipSet clips{p1(100, 107), p2(150, 180)};
  CHECK(select(Strategy::Auto, clips, 8, t).strategy == Strategy::Focused);
  CHECK(select(Strategy::Auto, clips, 32, t).strategy == Strategy::Hybrid);
  const auto empty = select(Strategy::Auto, {}, 8, t);
  CHECK(empty.strategy == Strategy::Uniform);
  CHECK(empty.indices == Idx{16, 48, 80, 112, 144, 176, 208, 240});
  CHECK(select(Strategy::Focused, {p1(300, 310)}, 8, t).strategy == Strategy::Uniform);
  CHECK_THROWS_AS(select(Strategy::Auto, clips, 0, t), Error);
  try {
    select(Strategy::Auto, clips, 257, t);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverBudget);
  }
}

TEST_CASE("strategy names") {
  for (auto s : {Strategy::Auto, Strategy::Uniform, Strategy::Focused, Strategy::Hybrid}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_FALSE(parse_strategy("random").has_value());
}

TEST_CASE("property: allocation matches the brute-force oracle") {
  gen::Rng rng(808);
  for (int i = 0; i < 4000; ++i) {
    ClipSet clips;
    FrameIndex t = 0;
    const auto n = gen::uniform(rng, 1, 6);
    for (int j = 0; j < n; ++j) {
      const auto len = gen::uniform(rng, 1, 15);
      clips.push_back({{t, t + len - 1}, gen::uniform(rng, 0, 1) ? Priority::P1 : Priority::P2, ""});
      t += len + 1;
    }
    const FrameIndex k = gen::uniform(rng, 1, 40);
    const auto plan = weighted_allocation(clips, k);
    const auto want = oracle_plan(clips, k);
    CHECK(plan.quotas == Idx(want.begin(), want.end()));
  }
}

TEST_CASE("property: every strategy spends exactly k distinct in-range frames") {
  gen::Rng rng(909);
  for (int i = 0; i < 3000; ++i) {
    const Timeline t(gen::uniform(rng, 1, 300));
    const auto clips = gen::raw_clips(rng, t.frame_count());
    const FrameIndex k = gen::uniform(rng, 1, t.frame_count());
    for (auto s : {Strategy::Auto, Strategy::Uniform, Strategy::Focused, Strategy::Hybrid}) {
      check_valid_selection(select(s, clips, k, t), k, t);
    }
  }
}

TEST_CASE("property: P1 guarantee and hybrid floor") {
  gen::Rng rng(1001);
  for (int i = 0; i < 3000; ++i) {
    const Timeline t(gen::uniform(rng, 20, 400));
    const auto clips = gen::clean_clips(rng, t.frame_count());
    const FrameIndex k = gen::uniform(rng, 1, std::min<FrameIndex>(64, t.frame_count()));

    const auto focused = focused_sample(clips, k, t);
    std::size_t p1_count = 0;
    for (const auto& q : focused.plan) p1_count += q.priority == Priority::P1;
    if (static_cast<std::size_t>(k) >= p1_count) {
      for (const auto& q : focused.plan) {
        if (q.priority == Priority::P1) CHECK(q.quota >= 1);
      }
    }

    const double r_min = gen::real(rng, 0.0, 1.0);
    const auto part = partition_frames(normalize_clipset(clips, t), t);
    const auto floor_frames = static_cast<FrameIndex>(std::ceil(static_cast<double>(k) * r_min - 1e-9));
    const auto hybrid = hybrid_sample(clips, k, t, 4.0, r_min);
    const std::set<FrameIndex> pred(part.predicted.begin(), part.predicted.end());
    FrameIndex in_pred = 0;
    for (FrameIndex f : hybrid.indices) in_pred += pred.count(f);
    if (static_cast<FrameIndex>(part.predicted.size()) >= floor_frames) CHECK(in_pred >= floor_frames);
    check_valid_selection(hybrid, k, t);
  }
}

TEST_CASE("property: focused frames stay inside key clips when they have room") {
  gen::Rng rng(1102);
  for (int i = 0; i < 3000; ++i) {
    const Timeline t(gen::uniform(rng, 10, 300));
    const auto clips = gen::clean_clips(rng, t.frame_count());
    const FrameIndex room = covered_length(normalize_clipset(clips, t));
    const FrameIndex k = gen::uniform(rng, 1, room);
    const auto r = focused_sample(clips, k, t);
    for (FrameIndex f : r.indices) {
      bool inside = false;
      for (const auto& q : r.plan) inside |= q.span.contains(f);
      CHECK(inside);
    }
  }
}

TEST_CASE("property: selection is deterministic") {
  gen::Rng rng(1203);
  for (int i = 0; i < 500; ++i) {
    const Timeline t(gen::uniform(rng, 1, 300));
    const auto clips = gen::raw_clips(rng, t.frame_count());
    const FrameIndex k = gen::uniform(rng, 1, t.frame_count());
    const auto a = select(Strategy::Auto, clips, k, t);
    const auto b = select(Strategy::Auto, clips, k, t);
    CHECK(a.indices == b.indices);
    CHECK(a.strategy == b.strategy);
  }
}
