#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "kframes/timeline.hpp"

namespace kframes {

/// Per-clip frame quotas aligned with the clip set they were computed for.
struct AllocationPlan {
  std::vector<FrameIndex> quotas;

  FrameIndex total() const noexcept;
  friend bool operator==(const AllocationPlan&, const AllocationPlan&) = default;
};

/// Weighted proportional quotas k * w_j * l_j / sum(w_i * l_i), rounded by
/// largest remainder so they sum to min(k, total clip length). Quotas never
/// exceed clip length; budget above a cap is re-shared proportionally among
/// the clips still below theirs. Remainder ties go to the earlier clip.
/// Throws Error(InvalidBudget) for k <= 0 and Error(NoClips) for no clips.
AllocationPlan weighted_allocation(const ClipSet& clips, FrameIndex k);

/// Gives every P1 clip at least one frame by taking from donors: P2 clips
/// with quota > 1 first, then P1 clips with quota > 1, then P2 clips with
/// quota 1; larger quota first, later start on ties. If the plan total is
/// below the number of P1 clips, the whole budget goes one frame each to the
/// longest P1 clips. The plan total is preserved.
AllocationPlan enforce_p1_guarantee(const AllocationPlan& plan, const ClipSet& clips);

/// n equally spaced frames of span, endpoint-inclusive for n >= 2 and the
/// floor midpoint for n == 1. Throws Error(OverBudget) for n > length.
std::vector<FrameIndex> equally_spaced(const ClipSpan& span, FrameIndex n);

enum class Strategy { Auto, Uniform, Focused, Hybrid };

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view text) noexcept;

struct ClipQuota {
  std::size_t clip = 0;
  ClipSpan span;
  Priority priority = Priority::P2;
  FrameIndex quota = 0;
};

struct SelectionResult {
  std::vector<FrameIndex> indices;
  Strategy strategy = Strategy::Uniform;
  std::vector<ClipQuota> plan;
};

struct HybridShares {
  FrameIndex predicted_raw = 0;
  FrameIndex predicted = 0;
  FrameIndex background = 0;
};

/// Splits k between predicted and background frames:
///   raw  = round(k * a|p| / (a|p| + |b|))
///   k_p  = min(|p|, max(ceil(k * r_min), raw))
///   k_b  = min(|b|, k - k_p)
/// with any shortfall moved to whichever side still has room.
HybridShares hybrid_shares(FrameIndex predicted_count, FrameIndex background_count, FrameIndex k,
                           double alpha_pred = 4.0, double r_min = 0.5);

/// floor((i + 0.5) * T / k) for i = 0..k-1.
SelectionResult uniform_sample(const Timeline& timeline, FrameIndex k);

SelectionResult focused_sample(const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                               FrameIndex tolerance = 2);

SelectionResult hybrid_sample(const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                              double alpha_pred = 4.0, double r_min = 0.5);

struct SelectConfig {
  FrameIndex merge_tolerance = 2;
  double alpha_pred = 4.0;
  double r_min = 0.5;
  FrameIndex focused_max_k = 8;  // Auto: k <= this uses Focused, else Hybrid
};

/// Dispatches to a sampler. Clip sets that are empty after normalization
/// always fall back to uniform sampling.
SelectionResult select(Strategy strategy, const ClipSet& clips, FrameIndex k, const Timeline& timeline,
                       const SelectConfig& config = {});

}  // namespace kframes
