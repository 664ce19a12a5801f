#include "kframes/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kframes/error.hpp"

namespace kframes {

double reward(const AnswerDistribution& dist, const RewardConfig& config) {
  const auto& p = dist.probabilities;
  if (p.size() < 2) {
    throw Error(ErrorCode::InsufficientCandidates,
                "reward needs at least 2 candidate answers, got " + std::to_string(p.size()));
  }
  if (dist.correct_index >= p.size()) {
    throw Error(ErrorCode::InvalidInput, "correct answer index out of range");
  }
  if (!(config.temperature > 0.0) || !std::isfinite(config.temperature)) {
    throw Error(ErrorCode::InvalidInput, "temperature must be positive");
  }
  if (!(config.probability_floor > 0.0 && config.probability_floor < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "probability floor must lie in (0,1)");
  }
  double incorrect = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0) || !std::isfinite(p[i])) {
      throw Error(ErrorCode::InvalidInput, "probabilities must be finite and nonnegative");
    }
    if (i != dist.correct_index) incorrect += std::max(p[i], config.probability_floor);
  }
  incorrect /= static_cast<double>(p.size() - 1);
  const double correct = std::max(p[dist.correct_index], config.probability_floor);
  return std::tanh(std::log(correct / incorrect) / config.temperature);
}

std::vector<double> group_advantage(const std::vector<double>& rewards) {
  if (rewards.empty()) return {};
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back(r - mean);
  return out;
}

}  // namespace kframes
