#pragma once

#include "hvac/data_pipeline.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hvac {

/// Fully connected layer, weights row-major (out × in).
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double &w(int o, int i) { return weights[static_cast<std::size_t>(o) * in + i]; }
  double w(int o, int i) const { return weights[static_cast<std::size_t>(o) * in + i]; }
};

/// Multilayer perceptron: ReLU hidden layers, linear output. Carries the
/// feature/label scaling it was trained with.
struct MlpParams {
  std::vector<DenseLayer> layers;
  NormalizationStats stats;
  bool has_stats = false;
  double p_max = 15.0;
  std::uint64_t seed = 0;

  std::vector<int> architecture() const;
};

/// Seeded fan-in uniform initialisation. `sizes` lists layer widths from
/// input to output, e.g. {4, 100, 100, 1}.
MlpParams init_mlp(const std::vector<int> &sizes, std::uint64_t seed);

/// Output for one normalised feature vector.
double forward(const MlpParams &params, std::span<const double> features);

/// A normalised (features, label) pair.
struct Sample {
  Features x{};
  double y = 0.0;
};

struct Gradients {
  std::vector<DenseLayer> layers; ///< same shapes as the parameters
};

Gradients zero_gradients(const MlpParams &params);

/// Mean squared error over `batch` and its gradient with respect to every
/// weight and bias.
double loss_and_gradients(const MlpParams &params, std::span<const Sample> batch,
                          Gradients &grads);

double mean_squared_error(const MlpParams &params, std::span<const Sample> samples);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 500;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  std::vector<int> hidden{100, 100};

  void validate() const;
};

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;
};

AdamState init_adam(const MlpParams &params);

void adam_step(MlpParams &params, const Gradients &grads, AdamState &state,
               const TrainConfig &config);

struct TrainResult {
  MlpParams params;             ///< parameters at the best validation epoch
  std::vector<double> train_loss; ///< index 0 is the untrained network
  std::vector<double> val_loss;   ///< empty when no days are held out
  int best_epoch = 0;
  double best_loss = 0.0;
  std::vector<std::string> validation_days;
};

/// Mini-batch Adam on the normalised dataset. Whole days are held out for
/// validation; batches are reshuffled every epoch from the seed.
TrainResult train(const Dataset &dataset, const TrainConfig &config,
                  double p_max);

/// Controller output in kW, clamped to [0, p_max].
double predict_power(const MlpParams &params, double t_out, double t_in,
                     double price, int slot);

/// Plain-text model file; floats are written in hexadecimal so a
/// save/load round trip is bit-exact.
void save_model(std::ostream &out, const MlpParams &params);
MlpParams load_model(std::istream &in, const std::string &source);

} // namespace hvac
