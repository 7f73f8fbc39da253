#include "sffnn/train.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sffnn/errors.h"

namespace sffnn {

void TrainingConfig::Validate() const {
  if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (momentum < 0 || momentum >= 1) throw ConfigError("momentum must be in [0, 1)");
  if (decay_gamma == 0) throw ConfigError("decay_gamma must be positive");
  if (decay_factor <= 0 || decay_factor > 1) throw ConfigError("decay_factor must be in (0, 1]");
  if (max_steps == 0) throw ConfigError("max_steps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (l2_lambda < 0) throw ConfigError("l2_lambda must be non-negative");
  if (dropout_p < 0 || dropout_p >= 1) throw ConfigError("dropout_p must be in [0, 1)");
  if (early_stop_patience == 0) throw ConfigError("early_stop_patience must be positive");
}

uint64_t TrainingConfig::EvalEvery() const {
  if (eval_every > 0) return eval_every;
  return std::max<uint64_t>(decay_gamma / 4, 100);
}

double LearningRateAt(const TrainingConfig& config, uint64_t step) {
  uint64_t decays = step / config.decay_gamma;
  return config.learning_rate * std::pow(config.decay_factor,
                                         static_cast<double>(decays));
}

namespace {

double L2Term(const NetworkModel& model, double l2_lambda) {
  if (l2_lambda == 0) return 0;
  double sq = 0;
  for (float v : model.hidden_weights) sq += static_cast<double>(v) * v;
  for (float v : model.hidden_bias) sq += static_cast<double>(v) * v;
  for (float v : model.output_bias) sq += static_cast<double>(v) * v;
  return l2_lambda * sq;
}

// xorshift-free portable generator for shuffling and dropout draws.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0xD1B54A32D192ED03ull) {}

  uint64_t Next() {
    state_ = state_ * 6364136223846793005ull + 1442695040888963407ull;
    uint64_t x = state_;
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    return x;
  }

  // [0, bound)
  uint64_t Below(uint64_t bound) { return Next() % bound; }

  double Unit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

 private:
  uint64_t state_;
};

void FisherYates(std::vector<uint32_t>* order, Rng* rng) {
  for (size_t i = order->size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng->Below(i));
    std::swap((*order)[i - 1], (*order)[j]);
  }
}

}  // namespace

double Loss(const NetworkModel& model, std::span<const Example> batch,
            double l2_lambda) {
  if (batch.empty()) throw DataError("loss: empty batch");
  double ce = 0;
  for (const Example& ex : batch) {
    if (ex.label >= model.num_labels()) {
      throw DataError("loss: gold label " + std::to_string(ex.label) +
                      " not in the label table");
    }
    ForwardResult r = Forward(ex.features, model);
    // -log softmax(gold), computed from logits for stability.
    float max_logit = *std::max_element(r.logits.begin(), r.logits.end());
    double total = 0;
    for (float z : r.logits) total += std::exp(static_cast<double>(z) - max_logit);
    ce += -(static_cast<double>(r.logits[ex.label]) - max_logit - std::log(total));
  }
  return ce / static_cast<double>(batch.size()) + L2Term(model, l2_lambda);
}

Gradients Gradients::ZerosLike(const NetworkModel& model) {
  Gradients g;
  g.embeddings.resize(model.embeddings.size());
  for (size_t i = 0; i < model.embeddings.size(); ++i) {
    g.embeddings[i].assign(
        static_cast<size_t>(model.embeddings[i].rows()) * model.embeddings[i].cols(), 0.0);
  }
  g.hidden_weights.assign(model.hidden_weights.size(), 0.0);
  g.hidden_bias.assign(model.hidden_bias.size(), 0.0);
  g.output_weights.assign(model.output_weights.size(), 0.0);
  g.output_bias.assign(model.output_bias.size(), 0.0);
  return g;
}

void Gradients::Reset() {
  for (auto& e : embeddings) std::fill(e.begin(), e.end(), 0.0);
  std::fill(hidden_weights.begin(), hidden_weights.end(), 0.0);
  std::fill(hidden_bias.begin(), hidden_bias.end(), 0.0);
  std::fill(output_weights.begin(), output_weights.end(), 0.0);
  std::fill(output_bias.begin(), output_bias.end(), 0.0);
}

double LossAndGradients(const NetworkModel& model,
                        std::span<const Example> batch, double l2_lambda,
                        std::span<const float> dropout_mask, Gradients* grads) {
  if (batch.empty()) throw DataError("loss: empty batch");
  const uint32_t m = model.hidden_dim;
  const uint32_t h0_dim = model.h0_dim;
  const uint32_t k = model.num_labels();
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  const std::vector<uint32_t> offsets = model.GroupOffsets();

  double ce = 0;
  std::vector<float> h0(h0_dim);
  std::vector<double> dh1(m), dh0(h0_dim);
  for (const Example& ex : batch) {
    if (ex.label >= k) {
      throw DataError("loss: gold label " + std::to_string(ex.label) +
                      " not in the label table");
    }
    Embed(ex.features, model, h0);
    if (!dropout_mask.empty()) {
      for (uint32_t j = 0; j < h0_dim; ++j) h0[j] *= dropout_mask[j];
    }
    // Forward through hidden + output on the (possibly masked) h0.
    std::vector<float> h1(m);
    for (uint32_t i = 0; i < m; ++i) {
      double acc = model.hidden_bias[i];
      const float* w = &model.hidden_weights[static_cast<size_t>(i) * h0_dim];
      for (uint32_t j = 0; j < h0_dim; ++j) acc += static_cast<double>(w[j]) * h0[j];
      h1[i] = acc > 0 ? static_cast<float>(acc) : 0.f;
    }
    std::vector<double> logits(k);
    for (uint32_t y = 0; y < k; ++y) {
      double acc = model.output_bias[y];
      const float* w = &model.output_weights[static_cast<size_t>(y) * m];
      for (uint32_t i = 0; i < m; ++i) acc += static_cast<double>(w[i]) * h1[i];
      logits[y] = acc;
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0;
    for (double z : logits) total += std::exp(z - max_logit);
    ce += -(logits[ex.label] - max_logit - std::log(total));

    // dL/dlogit = softmax - onehot, scaled by 1/batch.
    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (uint32_t y = 0; y < k; ++y) {
      double p = std::exp(logits[y] - max_logit) / total;
      double dlogit = (p - (y == ex.label ? 1.0 : 0.0)) * inv_batch;
      grads->output_bias[y] += dlogit;
      double* gw = &grads->output_weights[static_cast<size_t>(y) * m];
      const float* w = &model.output_weights[static_cast<size_t>(y) * m];
      for (uint32_t i = 0; i < m; ++i) {
        gw[i] += dlogit * h1[i];
        dh1[i] += dlogit * w[i];
      }
    }
    std::fill(dh0.begin(), dh0.end(), 0.0);
    for (uint32_t i = 0; i < m; ++i) {
      if (h1[i] <= 0) continue;  // ReLU gate
      double d = dh1[i];
      grads->hidden_bias[i] += d;
      double* gw = &grads->hidden_weights[static_cast<size_t>(i) * h0_dim];
      const float* w = &model.hidden_weights[static_cast<size_t>(i) * h0_dim];
      for (uint32_t j = 0; j < h0_dim; ++j) {
        gw[j] += d * h0[j];
        dh0[j] += d * w[j];
      }
    }
    if (!dropout_mask.empty()) {
      for (uint32_t j = 0; j < h0_dim; ++j) dh0[j] *= dropout_mask[j];
    }

    // Embedding gradients mirror the mean-per-cell pooling of Embed.
    const size_t ngroups = model.groups.size();
    std::vector<std::vector<uint32_t>> counts(ngroups);
    for (size_t g = 0; g < ngroups; ++g) {
      uint32_t width =
          model.groups[g].pooling == Pooling::kConcat ? model.slots[g] : 1;
      counts[g].assign(width, 0);
    }
    for (const FeatureHit& h : ex.features.hits) {
      uint32_t cell = model.groups[h.group].pooling == Pooling::kConcat ? h.slot : 0;
      counts[h.group][cell] += 1;
    }
    for (const FeatureHit& h : ex.features.hits) {
      const FeatureGroup& g = model.groups[h.group];
      uint32_t cell = g.pooling == Pooling::kConcat ? h.slot : 0;
      double weight = g.pooling == Pooling::kSum
                          ? 1.0
                          : 1.0 / counts[h.group][cell];
      size_t base = offsets[h.group] + static_cast<size_t>(cell) * g.embedding_dim;
      double* ge = grads->embeddings[h.group].data() +
                   static_cast<size_t>(h.id) * g.embedding_dim;
      for (uint32_t d = 0; d < g.embedding_dim; ++d) {
        ge[d] += weight * dh0[base + d];
      }
    }
  }

  // L2 on hidden weights and the two bias vectors.
  if (l2_lambda > 0) {
    for (size_t i = 0; i < model.hidden_weights.size(); ++i) {
      grads->hidden_weights[i] += 2 * l2_lambda * model.hidden_weights[i];
    }
    for (size_t i = 0; i < model.hidden_bias.size(); ++i) {
      grads->hidden_bias[i] += 2 * l2_lambda * model.hidden_bias[i];
    }
    for (size_t i = 0; i < model.output_bias.size(); ++i) {
      grads->output_bias[i] += 2 * l2_lambda * model.output_bias[i];
    }
  }
  return ce * inv_batch + L2Term(model, l2_lambda);
}

namespace {

// Velocity / averaging buffers with the same shapes as the parameters.
struct ParamBuffers {
  std::vector<std::vector<double>> embeddings;
  std::vector<double> hidden_weights, hidden_bias;
  std::vector<double> output_weights, output_bias;

  static ParamBuffers ZerosLike(const NetworkModel& model) {
    ParamBuffers b;
    b.embeddings.resize(model.embeddings.size());
    for (size_t i = 0; i < model.embeddings.size(); ++i) {
      b.embeddings[i].assign(
          static_cast<size_t>(model.embeddings[i].rows()) * model.embeddings[i].cols(), 0.0);
    }
    b.hidden_weights.assign(model.hidden_weights.size(), 0.0);
    b.hidden_bias.assign(model.hidden_bias.size(), 0.0);
    b.output_weights.assign(model.output_weights.size(), 0.0);
    b.output_bias.assign(model.output_bias.size(), 0.0);
    return b;
  }
};

void SgdUpdate(std::span<float> params, std::span<double> velocity,
               std::span<const double> grad, double momentum, double lr) {
  for (size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] - lr * grad[i];
    params[i] = static_cast<float>(params[i] + velocity[i]);
  }
}

void RunningAverage(std::span<double> avg, std::span<const float> params,
                    double inv_count) {
  for (size_t i = 0; i < params.size(); ++i) {
    avg[i] += (static_cast<double>(params[i]) - avg[i]) * inv_count;
  }
}

NetworkModel WithAveragedParams(const NetworkModel& model,
                                const ParamBuffers& avg) {
  NetworkModel out = model;
  for (size_t g = 0; g < out.embeddings.size(); ++g) {
    std::vector<float>& dense = out.embeddings[g].dense();
    for (size_t i = 0; i < dense.size(); ++i) {
      dense[i] = static_cast<float>(avg.embeddings[g][i]);
    }
  }
  auto assign = [](std::vector<float>& dst, const std::vector<double>& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(src[i]);
  };
  assign(out.hidden_weights, avg.hidden_weights);
  assign(out.hidden_bias, avg.hidden_bias);
  assign(out.output_weights, avg.output_weights);
  assign(out.output_bias, avg.output_bias);
  return out;
}

}  // namespace

TrainResult Train(NetworkModel model, std::span<const Example> dataset,
                  const TrainingConfig& config, const DevEvaluator& dev_eval) {
  config.Validate();
  if (dataset.empty()) throw DataError("train: empty dataset");
  if (!dev_eval) throw ConfigError("train: missing dev evaluator");

  Rng rng(config.seed);
  Gradients grads = Gradients::ZerosLike(model);
  ParamBuffers velocity = ParamBuffers::ZerosLike(model);
  ParamBuffers average = ParamBuffers::ZerosLike(model);

  std::vector<uint32_t> order(dataset.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<uint32_t>(i);
  FisherYates(&order, &rng);
  size_t cursor = 0;

  std::vector<Example> batch;
  std::vector<float> mask;
  const uint64_t eval_every = config.EvalEvery();

  TrainResult result;
  NetworkModel best = model;
  double best_metric = -std::numeric_limits<double>::infinity();
  uint64_t best_step = 0;
  uint32_t evals_since_best = 0;
  double loss_sum = 0;
  uint64_t loss_count = 0;

  uint64_t step = 0;
  for (step = 0; step < config.max_steps; ++step) {
    batch.clear();
    for (uint32_t b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        FisherYates(&order, &rng);
        cursor = 0;
        if (!batch.empty()) break;  // keep batches within an epoch
      }
      batch.push_back(dataset[order[cursor++]]);
    }

    if (config.dropout_p > 0) {
      mask.resize(model.h0_dim);
      const float keep_scale = static_cast<float>(1.0 / (1.0 - config.dropout_p));
      for (float& v : mask) {
        v = rng.Unit() < config.dropout_p ? 0.f : keep_scale;
      }
    } else {
      mask.clear();
    }

    grads.Reset();
    double loss = LossAndGradients(model, batch, config.l2_lambda, mask, &grads);
    if (!std::isfinite(loss)) {
      throw InternalError("train: non-finite loss at step " +
                          std::to_string(step) + " (lr " +
                          std::to_string(LearningRateAt(config, step)) + ")");
    }
    loss_sum += loss;
    loss_count += 1;

    const double lr = LearningRateAt(config, step);
    for (size_t g = 0; g < model.embeddings.size(); ++g) {
      SgdUpdate(model.embeddings[g].dense(), velocity.embeddings[g],
                grads.embeddings[g], config.momentum, lr);
    }
    SgdUpdate(model.hidden_weights, velocity.hidden_weights,
              grads.hidden_weights, config.momentum, lr);
    SgdUpdate(model.hidden_bias, velocity.hidden_bias, grads.hidden_bias,
              config.momentum, lr);
    SgdUpdate(model.output_weights, velocity.output_weights,
              grads.output_weights, config.momentum, lr);
    SgdUpdate(model.output_bias, velocity.output_bias, grads.output_bias,
              config.momentum, lr);

    if (config.averaging) {
      const double inv = 1.0 / static_cast<double>(step + 1);
      for (size_t g = 0; g < model.embeddings.size(); ++g) {
        RunningAverage(average.embeddings[g], model.embeddings[g].dense(), inv);
      }
      RunningAverage(average.hidden_weights, model.hidden_weights, inv);
      RunningAverage(average.hidden_bias, model.hidden_bias, inv);
      RunningAverage(average.output_weights, model.output_weights, inv);
      RunningAverage(average.output_bias, model.output_bias, inv);
    }

    if ((step + 1) % eval_every == 0 || step + 1 == config.max_steps) {
      NetworkModel candidate = config.averaging
                                   ? WithAveragedParams(model, average)
                                   : model;
      double metric = dev_eval(candidate);
      result.log.push_back(TrainLogRow{step + 1, lr,
                                       loss_sum / static_cast<double>(loss_count),
                                       metric});
      loss_sum = 0;
      loss_count = 0;
      if (metric > best_metric) {
        best_metric = metric;
        best = std::move(candidate);
        best_step = step + 1;
        evals_since_best = 0;
      } else {
        evals_since_best += 1;
        if (evals_since_best >= config.early_stop_patience) {
          step += 1;
          break;
        }
      }
    }
  }

  result.model = std::move(best);
  result.best_dev_metric = best_metric;
  result.best_dev_step = best_step;
  result.steps_run = step;
  return result;
}

bool GridSpec::Empty() const {
  return learning_rate.empty() && momentum.empty() && decay_gamma.empty() &&
         dropout_p.empty() && l2_lambda.empty();
}

std::vector<TrainingConfig> GridSpec::Cells(const TrainingConfig& base) const {
  auto or_default = [](auto values, auto fallback) {
    if (values.empty()) values.push_back(fallback);
    return values;
  };
  std::vector<double> lrs = or_default(learning_rate, base.learning_rate);
  std::vector<double> moms = or_default(momentum, base.momentum);
  std::vector<uint64_t> gammas = or_default(decay_gamma, base.decay_gamma);
  std::vector<double> drops = or_default(dropout_p, base.dropout_p);
  std::vector<double> lambdas = or_default(l2_lambda, base.l2_lambda);

  std::vector<TrainingConfig> cells;
  for (double lr : lrs) {
    for (double mom : moms) {
      for (uint64_t gamma : gammas) {
        for (double drop : drops) {
          for (double lambda : lambdas) {
            TrainingConfig c = base;
            c.learning_rate = lr;
            c.momentum = mom;
            c.decay_gamma = gamma;
            c.dropout_p = drop;
            c.l2_lambda = lambda;
            cells.push_back(c);
          }
        }
      }
    }
  }
  return cells;
}

GridSearchResult GridSearch(
    const std::function<NetworkModel()>& model_factory,
    std::span<const Example> dataset, const GridSpec& grid,
    const TrainingConfig& base, const DevEvaluator& dev_eval) {
  std::vector<TrainingConfig> cells = grid.Cells(base);
  if (cells.empty()) throw ConfigError("grid search: empty grid");

  GridSearchResult result;
  double best_metric = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cells.size(); ++i) {
    TrainResult r = Train(model_factory(), dataset, cells[i], dev_eval);
    result.cells.push_back(
        GridCellResult{cells[i], r.best_dev_metric, r.steps_run});
    if (r.best_dev_metric > best_metric) {  // strict: first cell wins ties
      best_metric = r.best_dev_metric;
      result.best = std::move(r);
      result.best_cell = i;
    }
  }
  return result;
}

std::string TrainLogTsv(std::span<const TrainLogRow> rows) {
  std::ostringstream out;
  out << "step\tlr\tloss\tdev_metric\n";
  for (const TrainLogRow& r : rows) {
    out << r.step << '\t' << r.lr << '\t' << r.train_loss << '\t'
        << r.dev_metric << '\n';
  }
  return out.str();
}

std::string GridResultsTsv(std::span<const GridCellResult> cells) {
  std::ostringstream out;
  out << "learning_rate\tmomentum\tdecay_gamma\tdropout_p\tl2_lambda\tsteps\tdev_metric\n";
  for (const GridCellResult& c : cells) {
    out << c.config.learning_rate << '\t' << c.config.momentum << '\t'
        << c.config.decay_gamma << '\t' << c.config.dropout_p << '\t'
        << c.config.l2_lambda << '\t' << c.steps_run << '\t' << c.dev_metric
        << '\n';
  }
  return out.str();
}

}  // namespace sffnn
