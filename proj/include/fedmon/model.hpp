#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedmon/dataset.hpp"

namespace fedmon {

// Flat parameter vector: for each layer, the out x in weight matrix
// (row-major) followed by the out biases.
using ParamVector = std::vector<double>;

// Fully connected network; ReLU on hidden layers, softmax on the output.
struct MlpArchitecture {
  std::vector<std::size_t> layer_sizes;

  static MlpArchitecture mnist() { return {{784, 30, 10}}; }

  // Throws PreconditionError for fewer than two layers or a zero-size layer.
  void validate() const;
  std::size_t param_count() const;
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t class_count() const { return layer_sizes.back(); }
};

struct TrainSpec {
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector gradient;
};

struct Evaluation {
  double accuracy = 0.0;
  double error_rate = 1.0;
};

/// Xavier-uniform weights in +-sqrt(6 / (n_in + n_out)) per layer, zero biases.
ParamVector init_params(const MlpArchitecture& arch, std::uint64_t seed);

/// Class probabilities for one input.
std::vector<double> forward(const MlpArchitecture& arch, std::span<const double> params,
                            std::span<const double> input);

/// Index of the largest output logit; ties go to the lowest class index.
std::size_t predict(const MlpArchitecture& arch, std::span<const double> params,
                    std::span<const double> input);

/// Mean cross-entropy and its gradient over the selected rows of `data`.
LossAndGrad loss_and_grad(const MlpArchitecture& arch, std::span<const double> params,
                          const Dataset& data, std::span<const std::size_t> rows);
LossAndGrad loss_and_grad(const MlpArchitecture& arch, std::span<const double> params,
                          const Dataset& data);

/// Shuffled mini-batch SGD starting from `start`. The final batch of an
/// epoch may be smaller than `batch_size`.
ParamVector sgd_train(const MlpArchitecture& arch, const ParamVector& start,
                      const Dataset& data, const TrainSpec& spec, std::uint64_t rng_seed);

Evaluation evaluate(const MlpArchitecture& arch, std::span<const double> params,
                    const Dataset& data);

}  // namespace fedmon
