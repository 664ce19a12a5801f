#include <doctest.h>

#include <cmath>

#include "kframes/error.hpp"
#include "kframes/reward.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace kframes;

TEST_CASE("reward examples") {
  CHECK(reward({{0.25, 0.25, 0.25, 0.25}, 0}) == 0.0);
  CHECK(std::abs(reward({{0.7, 0.1, 0.1, 0.1}, 0}) - std::tanh(std::log(7.0))) < 1e-12);
  CHECK(reward({{0.7, 0.1, 0.1, 0.1}, 0}) == doctest::Approx(0.96));
  CHECK(reward({{0.7, 0.1, 0.1, 0.1}, 0}, {1e-3}) == doctest::Approx(1.0));
  CHECK(reward({{0.1, 0.7, 0.1, 0.1}, 0}) < 0.0);
}

TEST_CASE("reward floors zero probabilities") {
  const double r = reward({{1.0, 0.0, 0.0}, 0});
  CHECK(r == doctest::Approx(1.0));
  CHECK(r < 1.0 + 1e-15);
  CHECK(std::isfinite(reward({{0.0, 1.0}, 0})));
  CHECK(reward({{0.0, 1.0}, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("reward rejects bad input") {
  try {
    reward({{1.0}, 0});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientCandidates);
  }
  CHECK_THROWS_AS(reward({{0.5, 0.5}, 2}), Error);
  CHECK_THROWS_AS(reward({{0.5, -0.5}, 0}), Error);
  CHECK_THROWS_AS(reward({{0.5, 0.5}, 0}, {0.0}), Error);
}

TEST_CASE("group_advantage examples") {
  CHECK(group_advantage({1, 1, 1}) == std::vector<double>{0, 0, 0});
  CHECK(group_advantage({0.5, -0.5}) == std::vector<double>{0.5, -0.5});
  const auto a = group_advantage({0.9, 0.3, 0.0});
  CHECK(a[0] == doctest::Approx(0.5));
  CHECK(a[1] == doctest::Approx(-0.1));
  CHECK(a[2] == doctest::Approx(-0.4));
  CHECK(group_advantage({}).empty());
}

TEST_CASE("property: reward range, oracle agreement, antisymmetry, scale invariance") {
  gen::Rng rng(1301);
  for (int i = 0; i < 3000; ++i) {
    const auto n = static_cast<std::size_t>(gen::uniform(rng, 2, 10));
    std::vector<double> p(n);
    for (auto& x : p) x = gen::real(rng, 0.01, 1.0);
    const auto c = static_cast<std::size_t>(gen::uniform(rng, 0, static_cast<std::int64_t>(n) - 1));
    const double tau = gen::real(rng, 0.2, 4.0);
    const double r = reward({p, c}, {tau});
    CHECK(r > -1.0);
    CHECK(r < 1.0);
    CHECK(r == doctest::Approx(oracle::reward(p, c, tau)).epsilon(1e-12));

    const double scale = gen::real(rng, 0.01, 100.0);
    std::vector<double> scaled = p;
    for (auto& x : scaled) x *= scale;
    CHECK(reward({scaled, c}, {tau}) == doctest::Approx(r).epsilon(1e-12));

    // Swap p(ans) with the incorrect mean: the inverted ratio flips the sign.
    double mean_other = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != c) mean_other += p[j];
    }
    mean_other /= static_cast<double>(n - 1);
    std::vector<double> swapped(n, p[c]);
    swapped[c] = mean_other;
    CHECK(reward({swapped, c}, {tau}) == doctest::Approx(-r).epsilon(1e-12));

    std::vector<double> more = p;
    more[c] += gen::real(rng, 0.0, 1.0);
    CHECK(reward({more, c}, {tau}) >= r);
  }
}

TEST_CASE("property: advantages sum to zero and ignore constant shifts") {
  gen::Rng rng(1402);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> r(static_cast<std::size_t>(gen::uniform(rng, 1, 16)));
    for (auto& x : r) x = gen::real(rng, -1.0, 1.0);
    const auto a = group_advantage(r);
    double sum = 0.0;
    for (double x : a) sum += x;
    CHECK(std::abs(sum) < 1e-12);
    const double shift = gen::real(rng, -3.0, 3.0);
    std::vector<double> shifted = r;
    for (auto& x : shifted) x += shift;
    const auto b = group_advantage(shifted);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(b[j] == doctest::Approx(a[j]).epsilon(1e-9).scale(1.0));
  }
}
