#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedmon/errors.hpp"
#include "fedmon/model.hpp"
#include "test_util.hpp"

using namespace fedmon;
using fedmon::testing::gen_for;
using fedmon::testing::random_dataset;
using fedmon::testing::uniform;

namespace {

// Central differences of the mean loss, one coordinate at a time.
ParamVector numeric_gradient(const MlpArchitecture& arch, ParamVector params, const Dataset& data,
                             double h) {
  ParamVector g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss_and_grad(arch, params, data).loss;
    params[i] = keep - h;
    const double down = loss_and_grad(arch, params, data).loss;
    params[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

double max_relative_error(const ParamVector& a, const ParamVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

// Direct cross-entropy for one example, written out long-hand.
double manual_loss(const std::vector<double>& logits, std::size_t label) {
  double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double z : logits) s += std::exp(z - m);
  return -(logits[label] - m - std::log(s));
}

}  // namespace

TEST_CASE("parameter count") {
  CHECK(MlpArchitecture::mnist().param_count() == 785 * 30 + 31 * 10);
  CHECK(MlpArchitecture::mnist().param_count() == 23860);
  CHECK(MlpArchitecture{{1, 1}}.param_count() == 2);
  CHECK(MlpArchitecture{{4, 3, 2}}.param_count() == 4 * 3 + 3 + 3 * 2 + 2);
}

TEST_CASE("architecture validation") {
  CHECK_THROWS_AS(MlpArchitecture{{5}}.validate(), PreconditionError);
  CHECK_THROWS_AS(MlpArchitecture{{}}.validate(), PreconditionError);
  CHECK_THROWS_AS((MlpArchitecture{{3, 0, 2}}.validate()), PreconditionError);
  CHECK_THROWS_AS((init_params(MlpArchitecture{{3, 0}}, 1)), PreconditionError);
}

TEST_CASE("init is deterministic, bounded, zero bias") {
  const MlpArchitecture arch{{2, 2}};
  CHECK(init_params(arch, 7) == init_params(arch, 7));
  CHECK(init_params(arch, 7) != init_params(arch, 8));

  const auto one = init_params(MlpArchitecture{{1, 1}}, 3);
  REQUIRE(one.size() == 2);
  CHECK(one[1] == 0.0);

  const MlpArchitecture big{{6, 4, 3}};
  const auto p = init_params(big, 11);
  const double b1 = std::sqrt(6.0 / 10.0), b2 = std::sqrt(6.0 / 7.0);
  for (std::size_t i = 0; i < 24; ++i) CHECK(std::abs(p[i]) <= b1);
  for (std::size_t i = 24; i < 28; ++i) CHECK(p[i] == 0.0);
  for (std::size_t i = 28; i < 40; ++i) CHECK(std::abs(p[i]) <= b2);
  for (std::size_t i = 40; i < 43; ++i) CHECK(p[i] == 0.0);
}

TEST_CASE("forward gives a distribution") {
  auto g = gen_for(1);
  const MlpArchitecture arch{{5, 8, 4}};
  const auto params = init_params(arch, 2);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> x(5);
    for (auto& v : x) v = uniform(g, -3, 3);
    const auto p = forward(arch, params, x);
    REQUIRE(p.size() == 4);
    double s = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("all-zero params predict uniformly") {
  const MlpArchitecture arch{{3, 4, 10}};
  const ParamVector zero(arch.param_count(), 0.0);
  const std::vector<double> x = {0.3, -2.0, 5.0};
  for (double p : forward(arch, zero, x)) CHECK(p == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(predict(arch, zero, x) == 0);  // ties go to class 0

  Dataset one{3, 10, {0.3, -2.0, 5.0}, {4}};
  CHECK(loss_and_grad(arch, zero, one).loss == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("softmax survives huge logits") {
  const MlpArchitecture arch{{2, 3}};
  ParamVector p = {2e6, -1e6, 4e6, 3e6, -5e6, 1e6, 0, 0, 0};
  const auto probs = forward(arch, p, std::vector<double>{1.0, 1.0});
  for (double v : probs) CHECK(std::isfinite(v));
  const std::vector<double> x = {1.0, 1.0};
  Dataset d{2, 3, {1.0, 1.0}, {0}};
  CHECK(std::isfinite(loss_and_grad(arch, p, d).loss));
}

TEST_CASE("scaling the output layer keeps the argmax") {
  auto g = gen_for(2);
  const MlpArchitecture arch{{4, 6, 5}};
  for (int k = 0; k < 50; ++k) {
    auto p = init_params(arch, 100 + k);
    for (auto& v : p) v += uniform(g, -0.5, 0.5);
    std::vector<double> x(4);
    for (auto& v : x) v = uniform(g, -2, 2);
    const auto before = predict(arch, p, x);
    const double c = uniform(g, 0.01, 1000.0);
    for (std::size_t i = 4 * 6 + 6; i < p.size(); ++i) p[i] *= c;
    CHECK(predict(arch, p, x) == before);
  }
}

TEST_CASE("manual cross-entropy agrees") {
  const MlpArchitecture arch{{2, 2}};
  // Linear layer: logits = W x + b.
  const ParamVector p = {1.0, -1.0, 0.5, 2.0, 0.1, -0.2};
  Dataset d{2, 2, {0.5, 1.5, -1.0, 0.25}, {0, 1}};
  const double l0 = manual_loss({1.0 * 0.5 - 1.0 * 1.5 + 0.1, 0.5 * 0.5 + 2.0 * 1.5 - 0.2}, 0);
  const double l1 = manual_loss({-1.0 - 0.25 + 0.1, -0.5 + 0.5 - 0.2}, 1);
  CHECK(loss_and_grad(arch, p, d).loss == doctest::Approx((l0 + l1) / 2).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
  auto g = gen_for(3);
  for (int k = 0; k < 20; ++k) {
    const MlpArchitecture arch = k % 2 ? MlpArchitecture{{5, 8, 3}} : MlpArchitecture{{4, 3, 2}};
    auto params = init_params(arch, 500 + k);
    for (auto& v : params) v += uniform(g, -0.3, 0.3);
    const auto data = random_dataset(g, 1 + k % 7, arch.input_size(), arch.class_count());
    const auto analytic = loss_and_grad(arch, params, data).gradient;
    const auto numeric = numeric_gradient(arch, params, data, 1e-5);
    CHECK(max_relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("duplicating a batch changes nothing") {
  auto g = gen_for(4);
  const MlpArchitecture arch{{3, 5, 4}};
  const auto params = init_params(arch, 9);
  const auto data = random_dataset(g, 6, 3, 4);
  std::vector<std::size_t> once = {0, 1, 2, 3, 4, 5};
  std::vector<std::size_t> twice = {0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5};
  const auto a = loss_and_grad(arch, params, data, once);
  const auto b = loss_and_grad(arch, params, data, twice);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
  for (std::size_t i = 0; i < a.gradient.size(); ++i)
    CHECK(a.gradient[i] == doctest::Approx(b.gradient[i]).epsilon(1e-12));
}

TEST_CASE("bad labels and shapes are rejected") {
  const MlpArchitecture arch{{2, 3}};
  const auto p = init_params(arch, 1);
  Dataset bad{2, 3, {0.0, 1.0}, {3}};
  CHECK_THROWS_AS((loss_and_grad(arch, p, bad)), PreconditionError);
  Dataset wrong_dim{3, 3, {0.0, 1.0, 2.0}, {0}};
  CHECK_THROWS_AS((loss_and_grad(arch, p, wrong_dim)), DimensionError);
  CHECK_THROWS_AS((forward(arch, p, std::vector<double>{1.0})), DimensionError);
  CHECK_THROWS_AS((forward(arch, ParamVector(3), std::vector<double>{1.0, 2.0})), DimensionError);
  Dataset empty{2, 3, {}, {}};
  CHECK_THROWS_AS((evaluate(arch, p, empty)), PreconditionError);
  CHECK_THROWS_AS((sgd_train(arch, p, empty, {}, 1)), PreconditionError);
}

TEST_CASE("sgd degenerate settings return the start") {
  auto g = gen_for(5);
  const MlpArchitecture arch{{3, 4, 2}};
  const auto start = init_params(arch, 5);
  const auto data = random_dataset(g, 40, 3, 2);
  TrainSpec zero_lr{1, 8, 0.0};
  CHECK(sgd_train(arch, start, data, zero_lr, 1) == start);
  TrainSpec no_epochs{0, 8, 0.1};
  CHECK(sgd_train(arch, start, data, no_epochs, 1) == start);
  TrainSpec too_big{1, 41, 0.1};
  CHECK_THROWS_AS((sgd_train(arch, start, data, too_big, 1)), PreconditionError);
}

TEST_CASE("sgd is deterministic for a seed") {
  auto g = gen_for(6);
  const MlpArchitecture arch{{3, 4, 2}};
  const auto start = init_params(arch, 5);
  const auto data = random_dataset(g, 50, 3, 2);
  TrainSpec spec{2, 7, 0.05};
  CHECK(sgd_train(arch, start, data, spec, 99) == sgd_train(arch, start, data, spec, 99));
  CHECK(sgd_train(arch, start, data, spec, 99) != sgd_train(arch, start, data, spec, 98));
}

TEST_CASE("sgd reduces training error on separable blobs") {
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto data = gen_blobs(2, 4, 50, 0.05, seed);
    const MlpArchitecture arch{{4, 8, 2}};
    const auto start = init_params(arch, seed);
    const auto trained = sgd_train(arch, start, data, TrainSpec{5, 10, 0.1}, seed);
    if (evaluate(arch, trained, data).error_rate < evaluate(arch, start, data).error_rate)
      ++improved;
  }
  CHECK(improved > 5);
}

TEST_CASE("evaluate") {
  const MlpArchitecture arch{{2, 3}};
  auto g = gen_for(7);
  const auto p = init_params(arch, 4);
  auto data = random_dataset(g, 30, 2, 3);
  for (std::size_t i = 0; i < data.size(); ++i)
    data.labels[i] = static_cast<std::uint32_t>(predict(arch, p, data.row(i)));
  const auto ev = evaluate(arch, p, data);
  CHECK(ev.accuracy == 1.0);
  CHECK(ev.accuracy + ev.error_rate == 1.0);

  auto other = random_dataset(g, 37, 2, 3);
  const auto a = evaluate(arch, p, other);
  const auto b = evaluate(arch, p, other);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.accuracy + a.error_rate == 1.0);
}

TEST_CASE("all-zero params on a balanced set score near chance") {
  // Balanced 10-class data: every prediction is class 0, so exactly 1/10 correct.
  const MlpArchitecture arch{{20, 30, 10}};
  const auto data = gen_blobs(10, 20, 50, 0.1, 3);
  const ParamVector zero(arch.param_count(), 0.0);
  CHECK(evaluate(arch, zero, data).accuracy == doctest::Approx(0.1).epsilon(1e-12));
}
