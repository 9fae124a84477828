#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elect/features.hpp"
#include "elect/training.hpp"

namespace elect {

struct LogisticSettings {
  int iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-3;
};

// Binary logistic classifier, full-batch gradient descent on the mean
// log-loss plus (l2 / 2) * |w|^2. The bias is not regularized.
struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double probability(const Eigen::VectorXd& x) const;
};

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, const LogisticSettings& settings);

struct BisectionResult {
  ParamVector estimate;
  std::vector<int> iterations;        // per parameter dimension
  std::vector<std::string> warnings;  // degenerate relabelings
};

// Per parameter dimension: start from the prior's search range, relabel the
// training rows by whether their target exceeds the midpoint, fit a logistic
// classifier on the standardized features available in `observed`, and keep
// the half the classifier picks. Stops when the interval is narrower than
// `tol` (search-space units) or after max_iter steps; returns the midpoints.
BisectionResult bisection_estimate(const TrainingSet& train, const FeatureVector& observed, double tol, int max_iter,
                                   const LogisticSettings& settings = {});

}  // namespace elect
