#include "elect/bisection.hpp"

#include <cmath>
#include <sstream>

#include "elect/errors.hpp"

namespace elect {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double LogisticModel::probability(const Eigen::VectorXd& x) const { return sigmoid(weights.dot(x) + bias); }

LogisticModel fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& labels, const LogisticSettings& settings) {
  if (x.rows() != labels.size() || x.rows() == 0) throw ValidationError("fit_logistic: bad training shapes");
  const auto n = static_cast<double>(x.rows());
  LogisticModel model;
  model.weights = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < settings.iterations; ++it) {
    Eigen::VectorXd z = x * model.weights;
    z.array() += model.bias;
    const Eigen::VectorXd residual = z.unaryExpr([](double v) { return sigmoid(v); }) - labels;
    const Eigen::VectorXd grad_w = x.transpose() * residual / n + settings.l2 * model.weights;
    const double grad_b = residual.sum() / n;
    model.weights -= settings.learning_rate * grad_w;
    model.bias -= settings.learning_rate * grad_b;
  }
  return model;
}

BisectionResult bisection_estimate(const TrainingSet& train, const FeatureVector& observed, double tol, int max_iter,
                                   const LogisticSettings& settings) {
  if (!(tol > 0.0)) throw ValidationError("bisection tolerance must be positive");
  if (max_iter < 0) throw ValidationError("max_iter must be nonnegative");
  if (static_cast<Eigen::Index>(observed.values.size()) != train.features.cols())
    throw ValidationError("observed features do not match the training layout");
  if (train.rows() == 0) throw ValidationError("training set is empty");

  const auto cols = available_columns(observed);
  if (cols.empty()) throw ValidationError("observed features are all unavailable");
  const auto d = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd x(train.rows(), d);
  Eigen::VectorXd obs(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const auto c = static_cast<std::size_t>(cols[static_cast<std::size_t>(j)]);
    for (int i = 0; i < train.rows(); ++i) x(i, j) = train.scaler.scale(c, train.features(i, static_cast<Eigen::Index>(c)));
    obs(j) = train.scaler.scale(c, observed.values[c]);
  }

  BisectionResult result;
  result.estimate.model = train.model;
  for (int p = 0; p < train.prior.dimension(); ++p) {
    const auto& range = train.prior.ranges[static_cast<std::size_t>(p)];
    double lo = range.search_lo();
    double hi = range.search_hi();
    Eigen::VectorXd target(train.rows());
    for (int i = 0; i < train.rows(); ++i) target(i) = range.to_search(train.targets(i, p));

    int steps = 0;
    while (hi - lo >= tol && steps < max_iter) {
      const double mid = 0.5 * (lo + hi);
      const Eigen::VectorXd labels = (target.array() > mid).cast<double>();
      const double positives = labels.sum();
      bool above;
      if (positives == 0.0 || positives == static_cast<double>(train.rows())) {
        above = positives > 0.0;
        std::ostringstream msg;
        msg << range.name << ": every training target lies " << (above ? "above" : "below") << " " << range.from_search(mid)
            << ", stepping without a classifier";
        result.warnings.push_back(msg.str());
      } else {
        above = fit_logistic(x, labels, settings).probability(obs) > 0.5;
      }
      (above ? lo : hi) = mid;
      ++steps;
    }
    result.iterations.push_back(steps);
    result.estimate.values.push_back(range.from_search(0.5 * (lo + hi)));
  }
  result.estimate = train.prior.clamp(std::move(result.estimate));
  return result;
}

}  // namespace elect
