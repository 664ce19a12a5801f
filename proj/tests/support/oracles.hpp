#pragma once

// Reference implementations used only by tests. They are written from the
// definitions, deliberately slow, and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

struct Clip {
  std::int64_t length;
  int weight;  // 2 for P1, 1 for P2
};

// Continuous capped shares q_j = min(l_j, c * w_j * l_j) with sum q = budget,
// found by bisection on the water level c.
inline std::vector<double> capped_shares(const std::vector<Clip>& clips, std::int64_t budget) {
  auto total_at = [&](double c) {
    double s = 0.0;
    for (const auto& x : clips) s += std::min<double>(x.length, c * x.weight * x.length);
    return s;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (total_at(hi) < budget) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (total_at(mid) < budget ? lo : hi) = mid;
  }
  std::vector<double> q;
  for (const auto& x : clips) q.push_back(std::min<double>(x.length, hi * x.weight * x.length));
  return q;
}

// Largest-remainder apportionment by exhaustive search: every integer vector
// with k_j in [floor(q_j) - 1, floor(q_j) + 1], 0 <= k_j <= l_j and
// sum = min(k, sum l) is scored by L1 distance to the capped shares. Ties
// (within 1e-9) go to the lexicographically largest vector, which favours
// earlier clips.
inline std::vector<std::int64_t> apportion(const std::vector<Clip>& clips, std::int64_t k) {
  std::int64_t total_len = 0;
  for (const auto& c : clips) total_len += c.length;
  const std::int64_t budget = std::min(k, total_len);
  const std::vector<double> q = capped_shares(clips, budget);
  const std::size_t n = clips.size();

  std::vector<std::int64_t> best;
  double best_cost = 1e300;
  std::vector<std::int64_t> cur(n);
  auto rec = [&](auto&& self, std::size_t j, std::int64_t sum, double cost) -> void {
    if (cost > best_cost + 1e-9) return;
    if (j == n) {
      if (sum != budget) return;
      if (cost < best_cost - 1e-9 || (std::abs(cost - best_cost) <= 1e-9 && cur > best)) {
        best = cur;
        best_cost = std::min(best_cost, cost);
      }
      return;
    }
    const auto base = static_cast<std::int64_t>(std::floor(q[j] + 1e-12));
    for (std::int64_t v = base + 1; v >= base - 1; --v) {
      if (v < 0 || v > clips[j].length) continue;
      cur[j] = v;
      self(self, j + 1, sum + v, cost + std::abs(static_cast<double>(v) - q[j]));
    }
  };
  rec(rec, 0, 0, 0.0);
  return best;
}

// Segmentation straight from the definition: z_t = (s_t - mean) / std with
// population std; boundary after t when z_t >= lambda; then greedy left to
// right removal of boundaries that would open a scene shorter than min_len,
// and finally trailing boundaries are removed while the last scene is short.
inline std::vector<std::int64_t> segment(const std::vector<double>& s, double lambda, std::int64_t min_len) {
  const auto T = static_cast<std::int64_t>(s.size()) + 1;
  double mean = 0.0;
  for (double x : s) mean += x;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double x : s) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(s.size()));
  std::vector<std::int64_t> b{0};
  if (sd > 0.0) {
    for (std::size_t t = 0; t < s.size(); ++t) {
      if ((s[t] - mean) / sd >= lambda - 1e-9) {
        const auto cut = static_cast<std::int64_t>(t) + 1;
        if (cut - b.back() >= min_len) b.push_back(cut);
      }
    }
  }
  while (b.size() > 1 && T - b.back() < min_len) b.pop_back();
  b.push_back(T);
  return b;
}

inline double reward(const std::vector<double>& p, std::size_t correct, double tau, double eps = 1e-9) {
  double other = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i != correct) other += std::max(p[i], eps);
  }
  other /= static_cast<double>(p.size() - 1);
  return std::tanh(std::log(std::max(p[correct], eps) / other) / tau);
}

inline double recall(const std::vector<std::int64_t>& sel, std::int64_t start, std::int64_t end) {
  std::int64_t hit = 0;
  for (std::int64_t t = start; t <= end; ++t) {
    if (std::find(sel.begin(), sel.end(), t) != sel.end()) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(end - start + 1);
}

}  // namespace oracle
