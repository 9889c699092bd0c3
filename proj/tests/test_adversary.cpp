#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fedmon/adversary.hpp"
#include "fedmon/errors.hpp"
#include "fedmon/rng.hpp"
#include "test_util.hpp"

using namespace fedmon;

TEST_CASE("static roles") {
  const auto p = AttackPattern::static_set({2, 5});
  for (std::size_t t = 0; t < 50; ++t) {
    CHECK(role_at(p, 2, t, 1) == Role::malicious);
    CHECK(role_at(p, 5, t, 1) == Role::malicious);
    CHECK(role_at(p, 3, t, 1) == Role::benign);
  }
}

TEST_CASE("pretence switches at the start round") {
  const auto p = AttackPattern::pretence({1, 4}, 10);
  CHECK(role_at(p, 1, 9, 3) == Role::benign);
  CHECK(role_at(p, 1, 10, 3) == Role::malicious);
  CHECK(role_at(p, 4, 79, 3) == Role::malicious);
  CHECK(role_at(p, 0, 79, 3) == Role::benign);
}

TEST_CASE("randomized degenerate probabilities") {
  const auto always = AttackPattern::randomized({0, 3}, 1.0);
  const auto never = AttackPattern::randomized({0, 3}, 0.0);
  for (std::size_t t = 0; t < 100; ++t) {
    CHECK(role_at(always, 0, t, 8) == Role::malicious);
    CHECK(role_at(always, 3, t, 8) == Role::malicious);
    CHECK(role_at(never, 0, t, 8) == Role::benign);
  }
}

TEST_CASE("randomized draws are per worker and round") {
  const auto p = AttackPattern::randomized({0, 1, 2}, 0.5);
  // Order of calls does not matter.
  std::vector<Role> forward, backward(200);
  for (std::size_t t = 0; t < 200; ++t) forward.push_back(role_at(p, 1, t, 42));
  for (std::size_t t = 200; t-- > 0;) backward[t] = role_at(p, 1, t, 42);
  CHECK(forward == backward);

  int malicious = 0;
  for (std::size_t t = 0; t < 2000; ++t) malicious += role_at(p, 2, t, 42) == Role::malicious;
  // 2000 Bernoulli(0.5) draws: sd ~ 22.4, allow 5 sd.
  CHECK(std::abs(malicious - 1000) < 112);
}

TEST_CASE("non-compromised workers are always benign") {
  auto g = fedmon::testing::gen_for(21);
  for (int k = 0; k < 200; ++k) {
    std::set<std::size_t> ids;
    for (int i = 0; i < 4; ++i) ids.insert(fedmon::testing::pick(g, 0, 9));
    const std::size_t w = fedmon::testing::pick(g, 0, 9);
    const std::size_t t = fedmon::testing::pick(g, 0, 80);
    const AttackPattern patterns[] = {
        AttackPattern::none(), AttackPattern::static_set(ids),
        AttackPattern::pretence(ids, fedmon::testing::pick(g, 0, 20)),
        AttackPattern::randomized(ids, fedmon::testing::uniform(g, 0, 1))};
    for (const auto& p : patterns) {
      if (p.kind == AttackKind::none || !ids.contains(w)) CHECK(role_at(p, w, t, k) == Role::benign);
    }
  }
}

TEST_CASE("pattern validation and truth") {
  CHECK_THROWS_AS(AttackPattern::static_set({10}).validate(10), PreconditionError);
  CHECK_NOTHROW(AttackPattern::static_set({9}).validate(10));
  CHECK_THROWS_AS((AttackPattern::randomized({1}, 1.5).validate(10)), PreconditionError);
  CHECK(AttackPattern::none().truth().empty());
  CHECK(AttackPattern::randomized({1, 2}, 0.1).truth() == std::set<std::size_t>{1, 2});
  CHECK(attack_kind_from_string("pretence") == AttackKind::pretence);
  CHECK(to_string(AttackKind::static_set) == "static");
  CHECK_THROWS_AS(attack_kind_from_string("burst"), PreconditionError);
}

TEST_CASE("fabrication") {
  SUBCASE("vanishing sigma") {
    auto g = rng::stream(1, rng::Purpose::fabricate);
    for (double v : fabricate_update(100, {0.5, 1e-12}, g)) CHECK(std::abs(v - 0.5) < 1e-6);
  }
  SUBCASE("sample mean within the CLT bound") {
    auto g = rng::stream(2, rng::Purpose::fabricate, 3, 4);
    const std::size_t d = 10000;
    const auto v = fabricate_update(d, {}, g);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(d);
    CHECK(std::abs(mean - 0.5) < 1.5 * 2e6 / std::sqrt(static_cast<double>(d)));
    for (double x : v) CHECK(std::isfinite(x));
  }
  SUBCASE("same stream state, same vector") {
    auto a = rng::stream(5, rng::Purpose::fabricate, 1, 2);
    auto b = rng::stream(5, rng::Purpose::fabricate, 1, 2);
    CHECK(fabricate_update(50, {}, a) == fabricate_update(50, {}, b));
  }
  SUBCASE("preconditions") {
    auto g = rng::stream(1, rng::Purpose::fabricate);
    CHECK_THROWS_AS((fabricate_update(0, {}, g)), PreconditionError);
    CHECK_THROWS_AS((fabricate_update(3, {0.5, 0.0}, g)), PreconditionError);
  }
}

TEST_CASE("seed derivation separates streams") {
  CHECK(rng::derive_seed(1, rng::Purpose::train, 2, 3) == rng::derive_seed(1, rng::Purpose::train, 2, 3));
  CHECK(rng::derive_seed(1, rng::Purpose::train, 2, 3) != rng::derive_seed(1, rng::Purpose::train, 3, 2));
  CHECK(rng::derive_seed(1, rng::Purpose::train, 2, 3) != rng::derive_seed(1, rng::Purpose::role, 2, 3));
  CHECK(rng::derive_seed(1, rng::Purpose::train, 2, 3) != rng::derive_seed(2, rng::Purpose::train, 2, 3));
}
