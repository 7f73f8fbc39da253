#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sffnn/network.h"

namespace sffnn {

struct TrainingConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;           // in [0, 1)
  uint64_t decay_gamma = 10000;    // steps between learning-rate decays
  double decay_factor = 0.96;
  uint64_t max_steps = 10000;
  uint32_t batch_size = 32;
  double l2_lambda = 1e-4;         // applied to hidden weights and biases
  double dropout_p = 0.0;          // on h0, training only
  std::string eval_metric = "accuracy";
  uint32_t early_stop_patience = 10;  // counted in dev evaluations
  uint64_t eval_every = 0;            // 0: max(decay_gamma / 4, 100)
  uint64_t seed = 1;
  bool averaging = false;  // Polyak averaging of parameter iterates

  void Validate() const;
  uint64_t EvalEvery() const;
};

// Staircase schedule: learning_rate * 0.96^floor(step / decay_gamma).
double LearningRateAt(const TrainingConfig& config, uint64_t step);

struct Example {
  FeatureVector features;
  uint32_t label = 0;
};

// Mean cross-entropy over the batch plus l2 * (|hidden_w|^2 + |hidden_b|^2
// + |output_b|^2). Embeddings and output weight vectors are not
// regularized.
double Loss(const NetworkModel& model, std::span<const Example> batch,
            double l2_lambda);

// Dense gradients, one tensor per parameter tensor of the model.
struct Gradients {
  std::vector<std::vector<double>> embeddings;
  std::vector<double> hidden_weights, hidden_bias;
  std::vector<double> output_weights, output_bias;

  static Gradients ZerosLike(const NetworkModel& model);
  void Reset();
};

// Accumulates d(mean batch loss)/d(params) into grads (which must be
// zeroed by the caller) and returns the batch loss. dropout_mask, when
// non-empty, holds the inverted-dropout scale per h0 coordinate (0 for
// dropped units, 1/(1-p) otherwise).
double LossAndGradients(const NetworkModel& model,
                        std::span<const Example> batch, double l2_lambda,
                        std::span<const float> dropout_mask, Gradients* grads);

struct TrainLogRow {
  uint64_t step = 0;
  double lr = 0;
  double train_loss = 0;
  double dev_metric = 0;
};

struct TrainResult {
  NetworkModel model;  // best-dev checkpoint (or averaged parameters)
  std::vector<TrainLogRow> log;
  double best_dev_metric = 0;
  uint64_t best_dev_step = 0;
  uint64_t steps_run = 0;
};

using DevEvaluator = std::function<double(const NetworkModel&)>;

// Minibatch SGD with momentum, exponentially decaying learning rate,
// dropout on h0, periodic dev evaluation and early stopping. The dataset
// is reshuffled every epoch from the run seed; the whole procedure is
// deterministic for a fixed seed.
TrainResult Train(NetworkModel model, std::span<const Example> dataset,
                  const TrainingConfig& config, const DevEvaluator& dev_eval);

// Cartesian grid over training hyperparameters, in declaration order.
struct GridSpec {
  std::vector<double> learning_rate;
  std::vector<double> momentum;
  std::vector<uint64_t> decay_gamma;
  std::vector<double> dropout_p;
  std::vector<double> l2_lambda;

  bool Empty() const;
  std::vector<TrainingConfig> Cells(const TrainingConfig& base) const;
};

struct GridCellResult {
  TrainingConfig config;
  double dev_metric = 0;
  uint64_t steps_run = 0;
};

struct GridSearchResult {
  TrainResult best;            // the retained model of the winning cell
  size_t best_cell = 0;
  std::vector<GridCellResult> cells;
};

// Trains one model per cell; ties break toward the earlier cell. The model
// factory must return a freshly initialized model (it is called once per
// cell so every cell starts from the same parameters for a fixed seed).
GridSearchResult GridSearch(
    const std::function<NetworkModel()>& model_factory,
    std::span<const Example> dataset, const GridSpec& grid,
    const TrainingConfig& base, const DevEvaluator& dev_eval);

std::string TrainLogTsv(std::span<const TrainLogRow> rows);
std::string GridResultsTsv(std::span<const GridCellResult> cells);

}  // namespace sffnn
