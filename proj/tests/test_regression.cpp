#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "elect/bisection.hpp"
#include "elect/errors.hpp"
#include "elect/mlp.hpp"
#include "elect/training.hpp"

using namespace elect;

namespace {

PriorSpec unit_prior() {
  PriorSpec p;
  p.model = ModelTag::Dpm;
  p.ranges = {{"gamma", 0.0, 1.0, false}};
  return p;
}

// Feature 0 equals the target; every other column is noise.
TrainingSet linear_set(int rows, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int F = feature_dimension(2);
  Eigen::MatrixXd x(rows, F);
  Eigen::MatrixXd y(rows, 1);
  for (int i = 0; i < rows; ++i) {
    y(i, 0) = u(gen);
    x(i, 0) = y(i, 0);
    for (int c = 1; c < F; ++c) x(i, c) = u(gen);
  }
  return make_training_set(ModelTag::Dpm, unit_prior(), 2, std::move(x), std::move(y));
}

FeatureVector only_first(double value) {
  FeatureVector f;
  f.values.assign(static_cast<std::size_t>(feature_dimension(2)), 0.5);
  f.available.assign(f.values.size(), false);
  f.values[0] = value;
  f.available[0] = true;
  return f;
}

FeatureVector all_available(const TrainingSet& set, int row) {
  FeatureVector f;
  for (Eigen::Index c = 0; c < set.features.cols(); ++c) f.values.push_back(set.features(row, c));
  f.available.assign(f.values.size(), true);
  return f;
}

MlpModel small_network(std::span<const int> sizes, std::uint64_t seed) {
  MlpModel m;
  m.prior = unit_prior();
  m.layers = init_layers(sizes, seed);
  return m;
}

TrainingSet simulated_set(int rows, std::uint64_t seed) {
  ConfigRanges ranges;
  ranges.min_districts = 10;
  ranges.max_districts = 30;
  ranges.min_electors = 2000;
  ranges.max_electors = 20000;
  return generate_training_set(ModelTag::Dpm, ranges, PriorSpec::defaults(ModelTag::Dpm, 2), rows, seed);
}

}  // namespace

TEST_CASE("feature layout") {
  CHECK(feature_dimension(2) == 17);
  CHECK(feature_dimension(4) == 25);
  CHECK(feature_names(3).size() == 21);
  CHECK(feature_names(2).front() == "seats_1");
  CHECK(feature_names(2).back() == "log10_s");

  VoteMatrix v(2, 2);
  v.at(0, 0) = 60;
  v.at(0, 1) = 40;
  v.at(1, 0) = 30;
  v.at(1, 1) = 70;
  const auto config = config_from_matrix(v);
  const auto f = make_features(summarize(v, config), config);
  REQUIRE(f.values.size() == 17);
  CHECK(f.values[8] == 0.0);  // spreads past S = 2 are padding
  CHECK(f.values.back() == doctest::Approx(std::log10(2.0)));
  CHECK(f.values[15] == doctest::Approx(std::log10(200.0)));

  const auto agg = aggregate_stats({1, 1}, 0.65, 0.05, 2);
  const auto cols = available_columns(make_features(agg, config));
  // Padding spreads carry no observation and stay available.
  CHECK(cols == std::vector<int>{0, 1, 8, 9, 10, 11, 12, 13, 14, 15, 16});
}

TEST_CASE("one bisection step picks a half") {
  const auto set = linear_set(400, 1);
  auto hi = bisection_estimate(set, only_first(0.9), 1e-6, 1);
  CHECK(hi.estimate.values[0] == doctest::Approx(0.75));
  CHECK(hi.iterations == std::vector<int>{1});
  auto lo = bisection_estimate(set, only_first(0.1), 1e-6, 1);
  CHECK(lo.estimate.values[0] == doctest::Approx(0.25));
}

TEST_CASE("bisection stops on tolerance") {
  const auto set = linear_set(400, 2);
  const auto none = bisection_estimate(set, only_first(0.9), 2.0, 30);
  CHECK(none.iterations == std::vector<int>{0});
  CHECK(none.estimate.values[0] == doctest::Approx(0.5));

  for (double tol : {0.1, 0.01, 1e-3}) {
    const auto r = bisection_estimate(set, only_first(0.63), tol, 100);
    CHECK(r.iterations[0] <= static_cast<int>(std::ceil(std::log2(1.0 / tol))));
    CHECK(std::abs(r.estimate.values[0] - 0.63) < 0.05);
  }
}

TEST_CASE("bisection input checks") {
  const auto set = linear_set(50, 3);
  CHECK_THROWS_AS(bisection_estimate(set, only_first(0.5), 0.0, 10), ValidationError);
  CHECK_THROWS_AS(bisection_estimate(set, only_first(0.5), 0.1, -1), ValidationError);
  FeatureVector empty = only_first(0.5);
  empty.available[0] = false;
  CHECK_THROWS_AS(bisection_estimate(set, empty, 0.1, 10), ValidationError);
  FeatureVector short_vec{{0.5}, {true}};
  CHECK_THROWS_AS(bisection_estimate(set, short_vec, 0.1, 10), ValidationError);
}

TEST_CASE("analytic gradient matches finite differences") {
  const std::vector<int> sizes{5, 7, 6, 2};
  auto model = small_network(sizes, 9);
  std::mt19937_64 gen(10);
  std::normal_distribution<double> n01;
  Eigen::MatrixXd x(5, 8), y(2, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(gen);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = n01(gen);

  std::vector<DenseLayer> grad;
  mlp_loss(model, x, y, &grad);
  const auto g = flatten_parameters(grad);
  auto theta = flatten_parameters(model.layers);
  REQUIRE(g.size() == theta.size());
  CHECK(model.parameter_count() == theta.size());

  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    assign_parameters(model.layers, theta);
    const double up = mlp_loss(model, x, y);
    theta[i] = keep - h;
    assign_parameters(model.layers, theta);
    const double down = mlp_loss(model, x, y);
    theta[i] = keep;
    worst = std::max(worst, std::abs((up - down) / (2 * h) - g[i]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("zero weights predict the clamped output bias") {
  PriorSpec prior = PriorSpec::defaults(ModelTag::Ecm, 2);
  MlpModel m;
  m.model = ModelTag::Ecm;
  m.prior = prior;
  m.input_columns = {0, 1};
  m.input_scaler.mean = {0.0, 0.0};
  m.input_scaler.std = {1.0, 1.0};
  const std::vector<int> sizes{2, 3, 2};
  m.layers = init_layers(sizes, 1);
  for (auto& l : m.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  m.layers.back().bias << std::log(2.0), 5.0;
  FeatureVector f;
  f.values.assign(17, 0.3);
  f.available.assign(17, true);
  const auto p = mlp_predict(m, f);
  CHECK(p.values[0] == doctest::Approx(2.0));
  CHECK(p.values[1] == doctest::Approx(0.999));

  f.available[1] = false;
  CHECK_THROWS_AS(mlp_predict(m, f), ValidationError);
  FeatureVector wrong{{0.3, 0.3}, {true, true}};
  CHECK_THROWS_AS(mlp_predict(m, wrong), ValidationError);
}

TEST_CASE("constant target is learned") {
  auto set = linear_set(256, 4);
  set.targets.setConstant(0.5);
  MlpSettings s;
  s.dropout = 0.0;
  s.epochs = 400;
  s.learning_rate = 3e-3;
  TrainReport report;
  const auto m = mlp_train(set, s, 5, {}, &report);
  CHECK(report.final_loss < 1e-4);
  CHECK(mlp_predict(m, all_available(set, 0)).values[0] == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("training never ends worse than it starts") {
  const auto set = simulated_set(200, 6);
  MlpSettings s;
  s.epochs = 20;
  TrainReport report;
  const auto a = mlp_train(set, s, 7, {}, &report);
  CHECK(report.final_loss <= report.initial_loss);
  CHECK(a.layer_sizes() == std::vector<int>{17, 33, 38, 1});

  const auto b = mlp_train(set, s, 7);
  const auto f = all_available(set, 3);
  CHECK(mlp_predict(a, f) == mlp_predict(b, f));

  s.epochs = 0;
  CHECK_THROWS_AS(mlp_train(set, s, 7), ValidationError);
}

TEST_CASE("regressor JSON round trip") {
  const auto set = simulated_set(100, 8);
  MlpSettings s;
  s.epochs = 5;
  const std::vector<int> cols{0, 1, 9, 10};
  const auto m = mlp_train(set, s, 9, cols);
  const auto back = mlp_from_json(nlohmann::json::parse(to_json(m).dump()));
  CHECK(back.input_columns == cols);
  for (int r = 0; r < 10; ++r) CHECK(mlp_predict(back, all_available(set, r)) == mlp_predict(m, all_available(set, r)));
}

TEST_CASE("feature scaler round trip") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n(3.0, 50.0);
  Eigen::MatrixXd rows(30, 4);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = n(gen);
  rows.col(3).setConstant(7.0);
  const auto sc = FeatureScaler::fit(rows);
  CHECK(sc.std[3] == FeatureScaler::kStdFloor);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const auto col = static_cast<std::size_t>(c);
      CHECK(std::abs(sc.unscale(col, sc.scale(col, rows(i, c))) - rows(i, c)) < 1e-12);
    }
}

TEST_CASE("training CSV round trip") {
  const auto set = simulated_set(100, 12);
  const auto dir = std::filesystem::temp_directory_path() / "elect_training_roundtrip";
  std::filesystem::create_directories(dir);
  write_training_set(set, dir / "train.csv");
  const auto back = read_training_set(dir / "train.csv");
  CHECK(back.model == set.model);
  CHECK(back.parties == set.parties);
  CHECK(back.features == set.features);
  CHECK(back.targets == set.targets);
  CHECK(back.scaler.mean == set.scaler.mean);
  CHECK(back.prior.ranges.size() == 1);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_training_set(dir / "missing.csv"), IoError);
}

TEST_CASE("training rows are reproducible and informative") {
  ConfigRanges ranges;
  ranges.min_districts = ranges.max_districts = 50;
  ranges.min_electors = ranges.max_electors = 20000;
  ranges.theta = std::vector<double>{0.6, 0.4};
  const auto set = generate_training_set(ModelTag::Dpm, ranges, PriorSpec::defaults(ModelTag::Dpm, 2), 300, 13);
  const auto again = generate_training_set(ModelTag::Dpm, ranges, PriorSpec::defaults(ModelTag::Dpm, 2), 300, 13);
  CHECK(set.features == again.features);

  // Concentration grows with gamma: the spread of party 1 across districts tracks it.
  const Eigen::VectorXd g = set.targets.col(0);
  const Eigen::VectorXd s = set.features.col(4);
  const double gm = g.mean(), sm = s.mean();
  const double cov = ((g.array() - gm) * (s.array() - sm)).sum();
  const double corr = cov / std::sqrt((g.array() - gm).square().sum() * (s.array() - sm).square().sum());
  CHECK(corr > 0.5);
}
