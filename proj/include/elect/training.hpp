#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elect/abc.hpp"
#include "elect/features.hpp"

namespace elect {

// Ranges from which training configurations are drawn. S is uniform on
// [min_districts, max_districts], N log-uniform on [min_electors, max_electors],
// theta uniform on the K-simplex unless fixed.
struct ConfigRanges {
  int parties = 2;
  int min_districts = 100;
  int max_districts = 100;
  Count min_electors = 100000;
  Count max_electors = 100000;
  std::optional<std::vector<double>> theta;

  void validate() const;
  ElectionConfig draw(Rng& rng) const;
};

// Column standardization, (x - mean) / std with std floored at 1e-6.
struct FeatureScaler {
  static constexpr double kStdFloor = 1e-6;
  std::vector<double> mean;
  std::vector<double> std;

  static FeatureScaler fit(const Eigen::MatrixXd& rows);
  double scale(std::size_t col, double x) const { return (x - mean[col]) / std[col]; }
  double unscale(std::size_t col, double z) const { return z * std[col] + mean[col]; }
};

struct TrainingSet {
  ModelTag model = ModelTag::Dpm;
  PriorSpec prior;
  int parties = 2;
  int layout_version = kFeatureLayoutVersion;
  Eigen::MatrixXd features;  // n x F
  Eigen::MatrixXd targets;   // n x P, natural units
  FeatureScaler scaler;

  int rows() const { return static_cast<int>(features.rows()); }
};

// Row i uses an engine seeded with derive_seed(seed, i) for its config,
// parameters and simulation, so rows are independent of evaluation order.
TrainingSet generate_training_set(ModelTag model, const ConfigRanges& ranges, const PriorSpec& prior, int n,
                                  std::uint64_t seed);

// Builds a training set from precomputed rows (tests, external data).
TrainingSet make_training_set(ModelTag model, const PriorSpec& prior, int parties, Eigen::MatrixXd features,
                              Eigen::MatrixXd targets);

// CSV of feature and target columns plus `<csv>.json` with model, prior,
// layout version and scaling parameters.
void write_training_set(const TrainingSet& set, const std::filesystem::path& csv_path);
TrainingSet read_training_set(const std::filesystem::path& csv_path);

nlohmann::json to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const nlohmann::json& j);

}  // namespace elect
