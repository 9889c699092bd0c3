#include <doctest.h>

#include <cmath>

#include "fedmon/adversary.hpp"
#include "fedmon/defense.hpp"
#include "fedmon/errors.hpp"
#include "fedmon/rng.hpp"
#include "test_util.hpp"

using namespace fedmon;
using fedmon::testing::gen_for;
using fedmon::testing::pick;
using fedmon::testing::uniform;

namespace {

MonitorConfig monitor(std::size_t delta, std::size_t strikes = 3, std::size_t window = 5,
                      double tau = 0.0) {
  return {delta, window, tau, strikes};
}

}  // namespace

TEST_CASE("is_active") {
  CHECK_FALSE(is_active(9, 10));
  CHECK(is_active(10, 10));
  for (std::size_t t = 0; t < 20; ++t) CHECK(is_active(t, 0));
}

TEST_CASE("record returns the error delta") {
  AttestationState s(2);
  CHECK(s.record(0, 0.5, 0) == 0.0);
  CHECK(s.record(0, 0.4, 1) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(s.history(0) == std::vector<double>{0.5, 0.4});
  CHECK(s.history(1).empty());
  CHECK_THROWS_AS((s.record(2, 0.1, 0)), PreconditionError);
}

TEST_CASE("attest evaluates the local model") {
  const MlpArchitecture arch{{2, 3}};
  Dataset val{2, 3, {0.0, 0.0, 1.0, 1.0}, {0, 2}};
  AttestationState s(1);
  const ParamVector zero(arch.param_count(), 0.0);  // predicts class 0 everywhere
  CHECK(s.attest(0, zero, arch, val, 0) == 0.0);
  CHECK(s.history(0).back() == 0.5);
  Dataset empty{2, 3, {}, {}};
  CHECK_THROWS_AS((s.attest(0, zero, arch, empty, 1)), PreconditionError);
}

TEST_CASE("fabricated models sit near chance error") {
  const MlpArchitecture arch{{20, 30, 10}};
  const auto val = gen_blobs(10, 20, 50, 0.1, 3);
  const auto global = init_params(arch, 1);
  AttestationState s(1);
  for (std::size_t t = 0; t < 10; ++t) {
    auto g = rng::stream(9, rng::Purpose::fabricate, 0, t);
    auto local = global;
    const auto fake = fabricate_update(local.size(), {}, g);
    for (std::size_t i = 0; i < local.size(); ++i) local[i] += fake[i];
    const double d = s.attest(0, local, arch, val, t);
    CHECK(s.history(0).back() > 0.7);
    CHECK(std::abs(d) < 0.3);
  }
}

TEST_CASE("strikes exclude at the third failing round") {
  AttestationState s(1);
  const auto cfg = monitor(0);
  s.record(0, 0.5, 0);
  CHECK(s.update_verdicts(cfg, 0).empty());  // first observation: delta 0
  s.record(0, 0.6, 1);
  CHECK(s.update_verdicts(cfg, 1).empty());
  s.record(0, 0.7, 2);
  CHECK(s.update_verdicts(cfg, 2).empty());
  CHECK(s.strikes(0) == 2);
  s.record(0, 0.8, 3);
  CHECK(s.update_verdicts(cfg, 3) == std::set<std::size_t>{0});
  CHECK(s.is_excluded(0));
  CHECK(s.excluded_at().at(0) == 3);
  REQUIRE(s.events().size() == 1);
  CHECK(s.events()[0].round == 3);
  CHECK_THROWS_AS((s.record(0, 0.9, 4)), PreconditionError);
}

TEST_CASE("improvement clears strikes") {
  AttestationState s(1);
  const auto cfg = monitor(0);
  const double errors[] = {0.5, 0.6, 0.7, 0.65, 0.7, 0.75};
  for (std::size_t t = 0; t < 6; ++t) {
    s.record(0, errors[t], t);
    CHECK(s.update_verdicts(cfg, t).empty());
  }
  CHECK(s.strikes(0) == 2);
  CHECK_FALSE(s.is_excluded(0));
}

TEST_CASE("a flat error earns no strike at tau zero") {
  AttestationState s(1);
  for (std::size_t t = 0; t < 20; ++t) {
    s.record(0, 0.9, t);
    CHECK(s.update_verdicts(monitor(0), t).empty());
  }
  CHECK(s.strikes(0) == 0);
}

TEST_CASE("gate: steady regression is excluded no earlier than delta") {
  AttestationState s(1);
  const auto cfg = monitor(10);
  std::size_t excluded_at = 0;
  for (std::size_t t = 0; t < 30 && !s.is_excluded(0); ++t) {
    s.record(0, 0.3 * static_cast<double>(t) / 30.0 + 0.01 * t, t);
    if (!s.update_verdicts(cfg, t).empty()) excluded_at = t;
  }
  CHECK(s.is_excluded(0));
  CHECK(excluded_at >= 10);
  CHECK(excluded_at == 12);
}

TEST_CASE("gate invariant on random delta streams") {
  auto g = gen_for(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t workers = pick(g, 1, 6);
    const std::size_t strikes = pick(g, 1, 4);
    const auto cfg = monitor(pick(g, 0, 30), strikes, pick(g, strikes, 6), uniform(g, -0.05, 0.05));
    AttestationState s(workers);
    std::vector<double> err(workers, 0.5);
    for (std::size_t t = 0; t < 40; ++t) {
      for (std::size_t w = 0; w < workers; ++w) {
        if (s.is_excluded(w)) continue;
        err[w] = std::clamp(err[w] + uniform(g, -0.1, 0.12), 0.0, 1.0);
        s.record(w, err[w], t);
      }
      const auto before = s.excluded();
      const auto newly = s.update_verdicts(cfg, t);
      if (t < cfg.delta) {
        CHECK(newly.empty());
        for (std::size_t w = 0; w < workers; ++w) CHECK(s.strikes(w) == 0);
      }
      for (auto w : before) CHECK(s.excluded().contains(w));  // only grows
      for (auto w : newly) CHECK_FALSE(before.contains(w));
    }
    for (const auto& [w, round] : s.excluded_at()) CHECK(round >= cfg.delta);
    for (const auto& e : s.events()) CHECK(e.round >= cfg.delta);
    for (std::size_t w = 0; w < workers; ++w)
      if (!s.is_excluded(w)) CHECK(s.history(w).size() == 40);
  }
}

TEST_CASE("window caps the strike count") {
  AttestationState s(1);
  // Needs 3 strikes inside a window of 3; every round fails.
  const auto cfg = monitor(0, 3, 3);
  for (std::size_t t = 0; t < 3; ++t) {
    s.record(0, 0.1 * static_cast<double>(t), t);
    s.update_verdicts(cfg, t);
  }
  CHECK(s.strikes(0) == 2);
  CHECK(s.strikes(0) <= cfg.window);
}

TEST_CASE("monitor config validation") {
  CHECK_THROWS_AS((monitor(0, 3, 0).validate()), PreconditionError);
  CHECK_THROWS_AS((monitor(0, 0, 5).validate()), PreconditionError);
  CHECK_THROWS_AS((monitor(0, 6, 5).validate()), PreconditionError);
  CHECK_NOTHROW(monitor(0, 5, 5).validate());
  AttestationState s(1);
  CHECK_THROWS_AS((s.update_verdicts(monitor(0, 0, 5), 0)), PreconditionError);
}

TEST_CASE("identical inputs give identical exclusion logs") {
  auto run = [] {
    auto g = gen_for(42);
    AttestationState s(4);
    for (std::size_t t = 0; t < 30; ++t) {
      for (std::size_t w = 0; w < 4; ++w)
        if (!s.is_excluded(w)) s.record(w, uniform(g, 0, 1), t);
      s.update_verdicts(monitor(5), t);
    }
    std::vector<std::pair<std::size_t, std::size_t>> log;
    for (const auto& e : s.events()) log.emplace_back(e.worker, e.round);
    return log;
  };
  CHECK(run() == run());
}
