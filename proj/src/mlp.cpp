#include "elect/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "elect/errors.hpp"
#include "elect/rng.hpp"

namespace elect {

namespace {

constexpr double kSeluScale = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

double selu(double x) { return x > 0.0 ? kSeluScale * x : kSeluScale * kSeluAlpha * std::expm1(x); }
double selu_grad(double x) { return x > 0.0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(x); }

Eigen::MatrixXd standardized_inputs(const TrainingSet& train, std::span<const int> columns,
                                    const FeatureScaler& scaler) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(columns.size()), train.rows());
  for (std::size_t j = 0; j < columns.size(); ++j)
    for (int i = 0; i < train.rows(); ++i)
      x(static_cast<Eigen::Index>(j), i) = scaler.scale(j, train.features(i, columns[j]));
  return x;
}

Eigen::MatrixXd search_targets(const TrainingSet& train) {
  Eigen::MatrixXd y(train.prior.dimension(), train.rows());
  for (int p = 0; p < train.prior.dimension(); ++p)
    for (int i = 0; i < train.rows(); ++i)
      y(p, i) = train.prior.ranges[static_cast<std::size_t>(p)].to_search(train.targets(i, p));
  return y;
}

}  // namespace

std::vector<int> MlpModel::layer_sizes() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<DenseLayer> init_layers(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 2) throw ValidationError("a network needs at least an input and an output layer");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    if (in < 1 || out < 1) throw ValidationError("layer sizes must be positive");
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r)
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = normal(rng);
    layers.push_back(std::move(layer));
  }
  return layers;
}

Eigen::MatrixXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd a = model.layers[l].weight * h;
    a.colwise() += model.layers[l].bias;
    h = l + 1 < model.layers.size() ? a.unaryExpr([](double v) { return selu(v); }) : std::move(a);
  }
  return h;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                std::vector<DenseLayer>* grad, const std::vector<Eigen::MatrixXd>* masks) {
  const std::size_t L = model.layers.size();
  std::vector<Eigen::MatrixXd> pre(L);    // pre-activations
  std::vector<Eigen::MatrixXd> post(L + 1);  // layer inputs; post[0] is the batch
  post[0] = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    pre[l] = model.layers[l].weight * post[l];
    pre[l].colwise() += model.layers[l].bias;
    if (l + 1 < L) {
      post[l + 1] = pre[l].unaryExpr([](double v) { return selu(v); });
      if (masks) post[l + 1].array() *= (*masks)[l].array();
    } else {
      post[l + 1] = pre[l];
    }
  }
  const Eigen::MatrixXd diff = post[L] - targets;
  const double denom = static_cast<double>(diff.size());
  const double loss = diff.squaredNorm() / denom;
  if (!grad) return loss;

  grad->resize(L);
  Eigen::MatrixXd delta = 2.0 * diff / denom;  // dLoss / d pre[L-1]
  for (std::size_t l = L; l-- > 0;) {
    (*grad)[l].weight = delta * post[l].transpose();
    (*grad)[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = model.layers[l].weight.transpose() * delta;
    if (masks) back.array() *= (*masks)[l - 1].array();
    delta = back.array() * pre[l - 1].unaryExpr([](double v) { return selu_grad(v); }).array();
  }
  return loss;
}

std::vector<double> flatten_parameters(const std::vector<DenseLayer>& layers) {
  std::vector<double> out;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out.push_back(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out.push_back(l.bias(r));
  }
  return out;
}

void assign_parameters(std::vector<DenseLayer>& layers, std::span<const double> values) {
  std::size_t i = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = values[i++];
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = values[i++];
  }
  if (i != values.size()) throw ValidationError("parameter count mismatch");
}

MlpModel mlp_train(const TrainingSet& train, const MlpSettings& settings, std::uint64_t seed,
                   std::span<const int> columns, TrainReport* report) {
  if (settings.epochs < 1) throw ValidationError("epochs must be at least 1");
  if (settings.batch < 1) throw ValidationError("batch size must be positive");
  if (!(settings.dropout >= 0.0 && settings.dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
  if (train.rows() < 1) throw ValidationError("training set is empty");

  MlpModel model;
  model.model = train.model;
  model.prior = train.prior;
  model.parties = train.parties;
  model.layout_version = train.layout_version;
  model.dropout = settings.dropout;
  if (columns.empty()) {
    model.input_columns.resize(static_cast<std::size_t>(train.features.cols()));
    std::iota(model.input_columns.begin(), model.input_columns.end(), 0);
  } else {
    model.input_columns.assign(columns.begin(), columns.end());
  }
  for (int c : model.input_columns) {
    if (c < 0 || c >= train.features.cols()) throw ValidationError("input column out of range");
    model.input_scaler.mean.push_back(train.scaler.mean[static_cast<std::size_t>(c)]);
    model.input_scaler.std.push_back(train.scaler.std[static_cast<std::size_t>(c)]);
  }

  std::vector<int> sizes{static_cast<int>(model.input_columns.size())};
  sizes.insert(sizes.end(), settings.hidden.begin(), settings.hidden.end());
  sizes.push_back(train.prior.dimension());
  model.layers = init_layers(sizes, derive_seed(seed, 0));

  const Eigen::MatrixXd x = standardized_inputs(train, model.input_columns, model.input_scaler);
  const Eigen::MatrixXd y = search_targets(train);

  double best_loss = mlp_loss(model, x, y);
  if (!std::isfinite(best_loss)) throw ValidationError("initial training loss is not finite");
  const double initial_loss = best_loss;
  auto best_layers = model.layers;
  int best_epoch = 0;

  // Adam moments, same shapes as the layers.
  std::vector<DenseLayer> m1, m2;
  for (const auto& l : model.layers) {
    m1.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    m2.push_back(m1.back());
  }

  Rng rng(derive_seed(seed, 1));
  std::vector<int> order(static_cast<std::size_t>(train.rows()));
  std::iota(order.begin(), order.end(), 0);
  const double keep_scale = 1.0 / (1.0 - settings.dropout);
  long step = 0;
  std::vector<DenseLayer> grad;
  std::vector<Eigen::MatrixXd> masks(model.layers.size() - 1);

  for (int epoch = 1; epoch <= settings.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(settings.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(settings.batch));
      const auto b = static_cast<Eigen::Index>(end - start);
      Eigen::MatrixXd xb(x.rows(), b), yb(y.rows(), b);
      for (Eigen::Index j = 0; j < b; ++j) {
        xb.col(j) = x.col(order[start + static_cast<std::size_t>(j)]);
        yb.col(j) = y.col(order[start + static_cast<std::size_t>(j)]);
      }
      for (std::size_t l = 0; l < masks.size(); ++l) {
        masks[l].resize(model.layers[l].weight.rows(), b);
        for (Eigen::Index i = 0; i < masks[l].size(); ++i)
          masks[l](i) = uniform01(rng) < settings.dropout ? 0.0 : keep_scale;
      }
      const double loss = mlp_loss(model, xb, yb, &grad, settings.dropout > 0.0 ? &masks : nullptr);
      if (!std::isfinite(loss)) throw ValidationError("training loss became non-finite; lower the learning rate");

      ++step;
      const double c1 = 1.0 - std::pow(settings.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(settings.beta2, static_cast<double>(step));
      auto adam = [&](auto& param, auto& g, auto& m, auto& v) {
        m = settings.beta1 * m + (1.0 - settings.beta1) * g;
        v = settings.beta2 * v.array() + (1.0 - settings.beta2) * g.array().square();
        param.array() -= settings.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + settings.epsilon);
      };
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        adam(model.layers[l].weight, grad[l].weight, m1[l].weight, m2[l].weight);
        adam(model.layers[l].bias, grad[l].bias, m1[l].bias, m2[l].bias);
      }
    }
    const double full = mlp_loss(model, x, y);
    if (!std::isfinite(full)) throw ValidationError("training loss became non-finite; lower the learning rate");
    if (full < best_loss) {
      best_loss = full;
      best_layers = model.layers;
      best_epoch = epoch;
    }
  }
  model.layers = std::move(best_layers);
  if (report) *report = TrainReport{initial_loss, best_loss, best_epoch};
  return model;
}

ParamVector mlp_predict(const MlpModel& model, const FeatureVector& observed) {
  if (static_cast<int>(observed.values.size()) != feature_dimension(model.parties))
    throw ValidationError("observed features do not match the regressor layout");
  const auto in = static_cast<Eigen::Index>(model.input_columns.size());
  Eigen::MatrixXd x(in, 1);
  for (Eigen::Index j = 0; j < in; ++j) {
    const auto c = static_cast<std::size_t>(model.input_columns[static_cast<std::size_t>(j)]);
    if (!observed.available[c]) throw ValidationError("regressor needs feature " + std::to_string(c) + ", which is unavailable");
    x(j, 0) = model.input_scaler.scale(static_cast<std::size_t>(j), observed.values[c]);
  }
  const Eigen::MatrixXd out = mlp_forward(model, x);
  ParamVector p{model.model, {}};
  for (int d = 0; d < model.prior.dimension(); ++d) {
    const auto& r = model.prior.ranges[static_cast<std::size_t>(d)];
    // Clamp in search space first so exp() cannot overflow.
    p.values.push_back(r.from_search(std::clamp(out(d, 0), r.search_lo(), r.search_hi())));
  }
  return model.prior.clamp(std::move(p));
}

nlohmann::json to_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers) {
    std::vector<double> w;
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    layers.push_back({{"rows", l.weight.rows()},
                      {"cols", l.weight.cols()},
                      {"weight", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"layout_version", model.layout_version},
          {"model", std::string(to_string(model.model))},
          {"parties", model.parties},
          {"prior", to_json(model.prior)},
          {"layer_sizes", model.layer_sizes()},
          {"activation", "selu"},
          {"dropout", model.dropout},
          {"input_columns", model.input_columns},
          {"input_scaling", {{"mean", model.input_scaler.mean}, {"std", model.input_scaler.std}}},
          {"layers", layers}};
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  MlpModel model;
  try {
    model.layout_version = j.at("layout_version").get<int>();
    if (model.layout_version != kFeatureLayoutVersion) throw IoError("unsupported regressor layout version");
    model.model = parse_model(j.at("model").get<std::string>());
    model.parties = j.at("parties").get<int>();
    model.prior = prior_from_json(j.at("prior"));
    model.dropout = j.at("dropout").get<double>();
    model.input_columns = j.at("input_columns").get<std::vector<int>>();
    model.input_scaler.mean = j.at("input_scaling").at("mean").get<std::vector<double>>();
    model.input_scaler.std = j.at("input_scaling").at("std").get<std::vector<double>>();
    for (const auto& l : j.at("layers")) {
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto w = l.at("weight").get<std::vector<double>>();
      const auto b = l.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
        throw IoError("regressor layer arrays have the wrong size");
      DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
        layer.bias(r) = b[static_cast<std::size_t>(r)];
      }
      model.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed regressor JSON: ") + e.what());
  }
  if (model.layers.empty() || model.input_columns.size() != static_cast<std::size_t>(model.layers.front().weight.cols()))
    throw IoError("regressor input width does not match its input columns");
  return model;
}

}  // namespace elect
