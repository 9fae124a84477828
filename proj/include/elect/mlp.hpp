#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elect/training.hpp"

namespace elect {

struct MlpSettings {
  int epochs = 200;
  int batch = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double dropout = 0.2;
  std::vector<int> hidden{33, 38};
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Feed-forward regressor F -> 33 -> 38 -> P. Hidden layers use SELU, the
// output is linear and predicts parameters in prior search space.
struct MlpModel {
  ModelTag model = ModelTag::Dpm;
  PriorSpec prior;
  int parties = 2;
  int layout_version = kFeatureLayoutVersion;
  std::vector<int> input_columns;  // feature indices fed to the network
  FeatureScaler input_scaler;      // one entry per input column
  double dropout = 0.0;
  std::vector<DenseLayer> layers;

  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
};

// LeCun-normal weights (variance 1 / fan_in), zero biases.
std::vector<DenseLayer> init_layers(std::span<const int> sizes, std::uint64_t seed);

// Forward pass over standardized inputs (one column per example), no dropout.
Eigen::MatrixXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& inputs);

// Mean squared error over all outputs of the batch. When `grad` is non-null it
// receives dLoss/dParameters layer by layer. `masks`, when given, multiplies
// each hidden activation (entries 0 or 1 / (1 - rate)).
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                std::vector<DenseLayer>* grad = nullptr, const std::vector<Eigen::MatrixXd>* masks = nullptr);

std::vector<double> flatten_parameters(const std::vector<DenseLayer>& layers);
void assign_parameters(std::vector<DenseLayer>& layers, std::span<const double> values);

struct TrainReport {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int best_epoch = 0;  // 0 means the initial weights were never improved upon
};

// Adam on mini-batches with inverted dropout on hidden activations. The
// returned weights are those with the lowest full-set training loss seen at
// an epoch boundary. `columns` restricts the inputs (all features when empty).
MlpModel mlp_train(const TrainingSet& train, const MlpSettings& settings, std::uint64_t seed,
                   std::span<const int> columns = {}, TrainReport* report = nullptr);

// Forward pass without dropout, mapped back to natural units and clamped
// into the prior ranges.
ParamVector mlp_predict(const MlpModel& model, const FeatureVector& observed);

nlohmann::json to_json(const MlpModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);

}  // namespace elect
