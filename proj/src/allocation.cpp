#include "kframes/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kframes/error.hpp"

namespace kframes {

FrameIndex AllocationPlan::total() const noexcept {
  return std::accumulate(quotas.begin(), quotas.end(), FrameIndex{0});
}

namespace {

void check_budget(FrameIndex k, const Timeline& timeline) {
  if (k <= 0) throw Error(ErrorCode::InvalidBudget, "frame budget must be positive, got " + std::to_string(k));
  if (k > timeline.frame_count()) {
    throw Error(ErrorCode::OverBudget, "frame budget " + std::to_string(k) + " exceeds " +
                                           std::to_string(timeline.frame_count()) + " frames");
  }
}

std::vector<ClipQuota> describe_plan(const ClipSet& clips, const AllocationPlan& plan) {
  std::vector<ClipQuota> out;
  out.reserve(clips.size());
  for (std::size_t j = 0; j < clips.size(); ++j) {
    out.push_back({j, clips[j].span, clips[j].priority, plan.quotas[j]});
  }
  return out;
}

// Evenly spread `n` picks over `count` list positions, centred in each cell.
std::vector<std::size_t> uniform_positions(std::size_t count, std::size_t n) {
  std::vector<std::size_t> pos;
  pos.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pos.push_back(((2 * i + 1) * count) / (2 * n));
  return pos;
}

}  // namespace

AllocationPlan weighted_allocation(const ClipSet& clips, FrameIndex k) {
  if (k <= 0) throw Error(ErrorCode::InvalidBudget, "frame budget must be positive, got " + std::to_string(k));
  if (clips.empty()) throw Error(ErrorCode::NoClips, "cannot allocate frames without key clips");

  const std::size_t n = clips.size();
  std::vector<FrameIndex> length(n);
  std::vector<FrameIndex> mass(n);
  for (std::size_t j = 0; j < n; ++j) {
    length[j] = clips[j].span.length();
    mass[j] = weight(clips[j].priority) * length[j];
  }
  const FrameIndex budget = std::min(k, std::accumulate(length.begin(), length.end(), FrameIndex{0}));

  // Water-fill: clips whose proportional share reaches their length are
  // pinned at that length and the rest of the budget is re-shared. Shares
  // are exact rationals budget_left * mass_j / mass_left.
  std::vector<bool> capped(n, false);
  FrameIndex budget_left = budget;
  FrameIndex mass_left = std::accumulate(mass.begin(), mass.end(), FrameIndex{0});
  for (bool changed = true; changed && mass_left > 0;) {
    changed = false;
    const FrameIndex b = budget_left;
    const FrameIndex m = mass_left;
    for (std::size_t j = 0; j < n; ++j) {
      if (!capped[j] && b * mass[j] >= length[j] * m) {
        capped[j] = true;
        budget_left -= length[j];
        mass_left -= mass[j];
        changed = true;
      }
    }
  }

  AllocationPlan plan{std::vector<FrameIndex>(n, 0)};
  std::vector<std::size_t> open;
  FrameIndex seats = budget_left;
  for (std::size_t j = 0; j < n; ++j) {
    if (capped[j]) {
      plan.quotas[j] = length[j];
    } else {
      plan.quotas[j] = budget_left * mass[j] / mass_left;
      seats -= plan.quotas[j];
      open.push_back(j);
    }
  }
  // Largest remainder; the sort is stable so equal remainders keep clip order.
  std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) {
    return (budget_left * mass[a]) % mass_left > (budget_left * mass[b]) % mass_left;
  });
  for (std::size_t i = 0; i < open.size() && seats > 0; ++i, --seats) ++plan.quotas[open[i]];
  return plan;
}

AllocationPlan enforce_p1_guarantee(const AllocationPlan& plan, const ClipSet& clips) {
  if (plan.quotas.size() != clips.size()) {
    throw Error(ErrorCode::Dimension, "allocation plan does not match clip set");
  }
  std::vector<std::size_t> p1;
  for (std::size_t j = 0; j < clips.size(); ++j) {
    if (clips[j].priority == Priority::P1) p1.push_back(j);
  }
  std::stable_sort(p1.begin(), p1.end(), [&](std::size_t a, std::size_t b) {
    return clips[a].span.length() > clips[b].span.length();
  });

  const FrameIndex budget = plan.total();
  AllocationPlan out = plan;
  if (budget < static_cast<FrameIndex>(p1.size())) {
    std::fill(out.quotas.begin(), out.quotas.end(), 0);
    for (FrameIndex i = 0; i < budget; ++i) out.quotas[p1[static_cast<std::size_t>(i)]] = 1;
    return out;
  }

  auto find_donor = [&](std::size_t receiver) -> std::optional<std::size_t> {
    auto pick = [&](Priority tier, FrameIndex min_quota) -> std::optional<std::size_t> {
      std::optional<std::size_t> best;
      for (std::size_t j = 0; j < clips.size(); ++j) {
        if (j == receiver || clips[j].priority != tier || out.quotas[j] < min_quota) continue;
        // Later start wins ties because clips are sorted and we scan forward.
        if (!best || out.quotas[j] >= out.quotas[*best]) best = j;
      }
      return best;
    };
    if (auto d = pick(Priority::P2, 2)) return d;
    if (auto d = pick(Priority::P1, 2)) return d;
    return pick(Priority::P2, 1);
  };

  for (std::size_t j : p1) {
    if (out.quotas[j] > 0) continue;
    auto donor = find_donor(j);
    if (!donor) break;
    --out.quotas[*donor];
    ++out.quotas[j];
  }
  return out;
}

std::vector<FrameIndex> equally_spaced(const ClipSpan& span, FrameIndex n) {
  if (n < 0) throw Error(ErrorCode::InvalidBudget, "negative frame count");
  const FrameIndex len = span.length();
  if (n > len) {
    throw Error(ErrorCode::OverBudget, "cannot pick " + std::to_string(n) + " frames from a clip of " +
                                           std::to_string(len));
  }
  std::vector<FrameIndex> out;
  if (n == 0) return out;
  if (n == 1) {
    out.push_back((span.start + span.end) / 2);
    return out;
  }
  out.reserve(static_cast<std::size_t>(n));
  for (FrameIndex i = 0; i < n; ++i) {
    // round(i * (len - 1) / (n - 1)), half up
    out.push_back(span.start + (2 * i * (len - 1) + (n - 1)) / (2 * (n - 1)));
  }
  return out;
}

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::Auto: return "auto";
    case Strategy::Uniform: return "uniform";
    case Strategy::Focused: return "focused";
    case Strategy::Hybrid: return "hybrid";
  }
  return "auto";
}

std::optional<Strategy> parse_strategy(std::string_view text) noexcept {
  if (text == "auto") return Strategy::Auto;
  if (text == "uniform") return Strategy::Uniform;
  if (text == "focused") return Strategy::Focused;
  if (text == "hybrid") return Strategy::Hybrid;
  return std::nullopt;
}

HybridShares hybrid_shares(FrameIndex predicted_count, FrameIndex background_count, FrameIndex k,
                           double alpha_pred, double r_min) {
  if (k <= 0) throw Error(ErrorCode::InvalidBudget, "frame budget must be positive");
  if (predicted_count < 0 || background_count < 0) {
    throw Error(ErrorCode::InvalidInput, "frame counts must be nonnegative");
  }
  if (!(alpha_pred > 0.0) || !std::isfinite(alpha_pred)) {
    throw Error(ErrorCode::InvalidInput, "alpha_pred must be positive");
  }
  if (!(r_min >= 0.0 && r_min <= 1.0)) throw Error(ErrorCode::InvalidInput, "r_min must lie in [0,1]");

  const double weighted_pred = alpha_pred * static_cast<double>(predicted_count);
  const double denom = weighted_pred + static_cast<double>(background_count);
  HybridShares s;
  s.predicted_raw =
      denom > 0.0 ? static_cast<FrameIndex>(std::floor(static_cast<double>(k) * weighted_pred / denom + 0.5)) : 0;
  const auto floor_share = static_cast<FrameIndex>(std::ceil(static_cast<double>(k) * r_min - 1e-9));
  s.predicted = std::min(predicted_count, std::max(floor_share, s.predicted_raw));
  s.background = std::min(background_count, k - s.predicted);
  const FrameIndex short_by = k - s.predicted - s.background;
  if (short_by > 0) {
    const FrameIndex to_pred = std::min(predicted_count - s.predicted, short_by);
    s.predicted += to_pred;
    s.background += std::min(background_count - s.background, short_by - to_pred);
  }
  return s;
}

SelectionResult uniform_sample(const Timeline& timeline, FrameIndex k) {
  check_budget(k, timeline);
  SelectionResult r;
  r.strategy = Strategy::Uniform;
  const FrameIndex T = timeline.frame_count();
  r.indices.reserve(static_cast<std::size_t>(k));
  for (FrameIndex i = 0; i < k; ++i) r.indices.push_back(((2 * i + 1) * T) / (2 * k));
  return r;
}

SelectionResult focused_sample(const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                               FrameIndex tolerance) {
  check_budget(k, timeline);
  const ClipSet merged = merge_adjacent(normalize_clipset(clips, timeline), tolerance);
  if (merged.empty()) throw Error(ErrorCode::NoClips, "focused sampling needs at least one key clip");

  const AllocationPlan plan = enforce_p1_guarantee(weighted_allocation(merged, k), merged);

  SelectionResult r;
  r.strategy = Strategy::Focused;
  r.plan = describe_plan(merged, plan);
  FrameIndex last_id = -1;
  for (std::size_t j = 0; j < merged.size(); ++j) {
    const ClipSpan candidates{std::max(merged[j].span.start, last_id + 1), merged[j].span.end};
    if (candidates.empty() || plan.quotas[j] == 0) continue;
    const auto picks = equally_spaced(candidates, std::min(plan.quotas[j], candidates.length()));
    r.indices.insert(r.indices.end(), picks.begin(), picks.end());
    last_id = picks.back();
  }

  const auto T = static_cast<std::size_t>(timeline.frame_count());
  const auto target = static_cast<std::size_t>(k);
  if (r.indices.size() < target) {
    std::vector<bool> key(T, false);
    for (const auto& c : merged) {
      for (FrameIndex t = c.span.start; t <= c.span.end; ++t) key[static_cast<std::size_t>(t)] = true;
    }
    std::vector<FrameIndex> tail;
    for (FrameIndex t = last_id + 1; t < timeline.frame_count(); ++t) {
      if (!key[static_cast<std::size_t>(t)]) tail.push_back(t);
    }
    const auto need = static_cast<FrameIndex>(std::min(target - r.indices.size(), tail.size()));
    if (need > 0) {
      for (FrameIndex p : equally_spaced({0, static_cast<FrameIndex>(tail.size()) - 1}, need)) {
        r.indices.push_back(tail[static_cast<std::size_t>(p)]);
      }
    }
  }
  if (r.indices.size() < target) {
    std::vector<bool> used(T, false);
    for (FrameIndex t : r.indices) used[static_cast<std::size_t>(t)] = true;
    for (std::size_t t = 0; t < T && r.indices.size() < target; ++t) {
      if (!used[t]) r.indices.push_back(static_cast<FrameIndex>(t));
    }
  }
  std::sort(r.indices.begin(), r.indices.end());
  r.indices.erase(std::unique(r.indices.begin(), r.indices.end()), r.indices.end());
  return r;
}

SelectionResult hybrid_sample(const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                              double alpha_pred, double r_min) {
  check_budget(k, timeline);
  const ClipSet normalized = normalize_clipset(clips, timeline);
  const FramePartition parts = partition_frames(normalized, timeline);
  const HybridShares shares =
      hybrid_shares(static_cast<FrameIndex>(parts.predicted.size()),
                    static_cast<FrameIndex>(parts.background.size()), k, alpha_pred, r_min);

  SelectionResult r;
  r.strategy = Strategy::Hybrid;
  r.indices.reserve(static_cast<std::size_t>(k));
  if (shares.predicted > 0) {
    const AllocationPlan plan =
        enforce_p1_guarantee(weighted_allocation(normalized, shares.predicted), normalized);
    r.plan = describe_plan(normalized, plan);
    for (std::size_t j = 0; j < normalized.size(); ++j) {
      const auto picks = equally_spaced(normalized[j].span, plan.quotas[j]);
      r.indices.insert(r.indices.end(), picks.begin(), picks.end());
    }
  } else if (!normalized.empty()) {
    r.plan = describe_plan(normalized, AllocationPlan{std::vector<FrameIndex>(normalized.size(), 0)});
  }
  for (std::size_t p : uniform_positions(parts.background.size(), static_cast<std::size_t>(shares.background))) {
    r.indices.push_back(parts.background[p]);
  }
  std::sort(r.indices.begin(), r.indices.end());
  r.indices.erase(std::unique(r.indices.begin(), r.indices.end()), r.indices.end());
  return r;
}

SelectionResult select(Strategy strategy, const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                       const SelectConfig& config) {
  check_budget(k, timeline);
  const ClipSet normalized = normalize_clipset(clips, timeline);
  if (normalized.empty() || strategy == Strategy::Uniform) return uniform_sample(timeline, k);
  if (strategy == Strategy::Auto) {
    strategy = k <= config.focused_max_k ? Strategy::Focused : Strategy::Hybrid;
  }
  if (strategy == Strategy::Focused) return focused_sample(normalized, k, timeline, config.merge_tolerance);
  return hybrid_sample(normalized, k, timeline, config.alpha_pred, config.r_min);
}

}  // namespace kframes
