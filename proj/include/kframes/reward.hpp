#pragma once

#include <cstddef>
#include <vector>

namespace kframes {

/// Candidate answers with (possibly unnormalized) probabilities from the
/// downstream model.
struct AnswerDistribution {
  std::vector<double> probabilities;
  std::size_t correct_index = 0;
};

struct RewardConfig {
  double temperature = 1.0;
  double probability_floor = 1e-9;
};

/// tanh((1/temperature) * log(p(ans) / mean of the incorrect probabilities)),
/// with every probability floored at config.probability_floor first.
double reward(const AnswerDistribution& dist, const RewardConfig& config = {});

/// Mean-centred rewards, no scale normalization.
std::vector<double> group_advantage(const std::vector<double>& rewards);

}  // namespace kframes
