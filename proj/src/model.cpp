#include "fedmon/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fedmon/errors.hpp"
#include "fedmon/rng.hpp"

namespace fedmon {

void MlpArchitecture::validate() const {
  if (layer_sizes.size() < 2)
    throw PreconditionError("architecture needs at least an input and an output layer");
  for (auto n : layer_sizes)
    if (n == 0) throw PreconditionError("architecture has a zero-size layer");
}

std::size_t MlpArchitecture::param_count() const {
  validate();
  std::size_t d = 0;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i)
    d += layer_sizes[i] * layer_sizes[i + 1] + layer_sizes[i + 1];
  return d;
}

namespace {

// Per-call scratch for one example's activations and backpropagated errors.
class Network {
 public:
  Network(const MlpArchitecture& arch, std::span<const double> params)
      : sizes_(arch.layer_sizes), params_(params) {
    if (params.size() != arch.param_count())
      throw DimensionError("parameter vector length does not match architecture");
    const std::size_t layers = sizes_.size() - 1;
    offsets_.resize(layers);
    std::size_t off = 0;
    for (std::size_t i = 0; i < layers; ++i) {
      offsets_[i] = off;
      off += sizes_[i] * sizes_[i + 1] + sizes_[i + 1];
    }
    act_.resize(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) act_[i].resize(sizes_[i]);
    err_.resize(sizes_.size());
    for (std::size_t i = 1; i < sizes_.size(); ++i) err_[i].resize(sizes_[i]);
  }

  // Fills activations; the last layer holds raw logits.
  std::span<const double> logits(std::span<const double> input) {
    if (input.size() != sizes_.front())
      throw DimensionError("input length does not match architecture");
    std::copy(input.begin(), input.end(), act_[0].begin());
    const std::size_t layers = sizes_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t n_in = sizes_[l];
      const std::size_t n_out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      const double* b = w + n_in * n_out;
      const auto& in = act_[l];
      auto& out = act_[l + 1];
      const bool hidden = l + 1 < layers;
      for (std::size_t o = 0; o < n_out; ++o) {
        const double* row = w + o * n_in;
        double z = b[o];
        for (std::size_t i = 0; i < n_in; ++i) z += row[i] * in[i];
        out[o] = hidden ? std::max(z, 0.0) : z;
      }
    }
    return act_.back();
  }

  // Adds this example's gradient (given d loss / d logits) into `grad`.
  void backward(std::span<const double> logit_error, std::span<double> grad) {
    const std::size_t layers = sizes_.size() - 1;
    std::copy(logit_error.begin(), logit_error.end(), err_[layers].begin());
    for (std::size_t l = layers; l-- > 0;) {
      const std::size_t n_in = sizes_[l];
      const std::size_t n_out = sizes_[l + 1];
      const double* w = params_.data() + offsets_[l];
      double* gw = grad.data() + offsets_[l];
      double* gb = gw + n_in * n_out;
      const auto& in = act_[l];
      const auto& e = err_[l + 1];
      for (std::size_t o = 0; o < n_out; ++o) {
        const double eo = e[o];
        if (eo == 0.0) continue;
        double* grow = gw + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) grow[i] += eo * in[i];
        gb[o] += eo;
      }
      if (l == 0) break;
      auto& prev = err_[l];
      std::fill(prev.begin(), prev.end(), 0.0);
      for (std::size_t o = 0; o < n_out; ++o) {
        const double eo = e[o];
        if (eo == 0.0) continue;
        const double* row = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) prev[i] += row[i] * eo;
      }
      // ReLU derivative, taken as 0 at the kink.
      for (std::size_t i = 0; i < n_in; ++i)
        if (!(in[i] > 0.0)) prev[i] = 0.0;
    }
  }

 private:
  const std::vector<std::size_t>& sizes_;
  std::span<const double> params_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<double>> act_;
  std::vector<std::vector<double>> err_;
};

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out[c] = std::exp(logits[c] - mx);
    sum += out[c];
  }
  for (auto& p : out) p /= sum;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c)
    if (v[c] > v[best]) best = c;
  return best;
}

void check_data(const MlpArchitecture& arch, const Dataset& data) {
  if (data.empty()) throw PreconditionError("empty dataset");
  if (data.dim != arch.input_size())
    throw DimensionError("dataset dimension does not match architecture input");
}

}  // namespace

ParamVector init_params(const MlpArchitecture& arch, std::uint64_t seed) {
  ParamVector params(arch.param_count(), 0.0);
  auto gen = rng::stream(seed, rng::Purpose::init);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
    const std::size_t n_in = arch.layer_sizes[l];
    const std::size_t n_out = arch.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(n_in + n_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < n_in * n_out; ++i) params[off + i] = dist(gen);
    off += n_in * n_out + n_out;
  }
  return params;
}

std::vector<double> forward(const MlpArchitecture& arch, std::span<const double> params,
                            std::span<const double> input) {
  Network net(arch, params);
  auto z = net.logits(input);
  std::vector<double> probs(z.size());
  softmax_into(z, probs);
  return probs;
}

std::size_t predict(const MlpArchitecture& arch, std::span<const double> params,
                    std::span<const double> input) {
  Network net(arch, params);
  return argmax(net.logits(input));
}

LossAndGrad loss_and_grad(const MlpArchitecture& arch, std::span<const double> params,
                          const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw PreconditionError("loss_and_grad: empty batch");
  check_data(arch, data);
  Network net(arch, params);
  const std::size_t classes = arch.class_count();

  LossAndGrad out;
  out.gradient.assign(params.size(), 0.0);
  std::vector<double> err(classes);
  for (auto r : rows) {
    if (r >= data.size()) throw PreconditionError("loss_and_grad: row out of range");
    const auto label = data.labels[r];
    if (label >= classes) throw PreconditionError("loss_and_grad: label outside class range");
    auto z = net.logits(data.row(r));
    softmax_into(z, err);
    // log-sum-exp form keeps the loss finite for extreme logits.
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto v : z) sum += std::exp(v - mx);
    out.loss += mx + std::log(sum) - z[label];
    err[label] -= 1.0;
    net.backward(err, out.gradient);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (auto& g : out.gradient) g *= inv;
  return out;
}

LossAndGrad loss_and_grad(const MlpArchitecture& arch, std::span<const double> params,
                          const Dataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_grad(arch, params, data, rows);
}

ParamVector sgd_train(const MlpArchitecture& arch, const ParamVector& start,
                      const Dataset& data, const TrainSpec& spec, std::uint64_t rng_seed) {
  check_data(arch, data);
  if (start.size() != arch.param_count())
    throw DimensionError("sgd_train: start vector length does not match architecture");
  if (spec.batch_size == 0) throw PreconditionError("sgd_train: batch size must be positive");
  if (spec.batch_size > data.size())
    throw PreconditionError("sgd_train: batch size exceeds local dataset size");

  ParamVector params = start;
  const std::size_t batches_per_epoch = (data.size() + spec.batch_size - 1) / spec.batch_size;
  const std::size_t total_steps = spec.epochs * batches_per_epoch;
  if (total_steps == 0 || spec.learning_rate == 0.0) return params;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(rng_seed);
  std::size_t begin = order.size();
  for (std::size_t step = 0; step < total_steps; ++step) {
    if (begin >= order.size()) {
      std::shuffle(order.begin(), order.end(), gen);
      begin = 0;
    }
    const std::size_t len = std::min(spec.batch_size, order.size() - begin);
    auto grad = loss_and_grad(arch, params, data,
                              std::span<const std::size_t>(order).subspan(begin, len));
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= spec.learning_rate * grad.gradient[i];
    begin += len;
  }
  return params;
}

Evaluation evaluate(const MlpArchitecture& arch, std::span<const double> params,
                    const Dataset& data) {
  check_data(arch, data);
  Network net(arch, params);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (argmax(net.logits(data.row(i))) == data.labels[i]) ++correct;
  Evaluation ev;
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  ev.error_rate = 1.0 - ev.accuracy;
  return ev;
}

}  // namespace fedmon
