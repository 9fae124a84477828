#include "elect/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "elect/errors.hpp"
#include "elect/parallel.hpp"

namespace elect {

void ConfigRanges::validate() const {
  if (parties < 2) throw ValidationError("config ranges need at least two parties");
  if (min_districts < 1 || min_districts > max_districts) throw ValidationError("invalid district range");
  if (min_electors < 1 || min_electors > max_electors) throw ValidationError("invalid elector range");
  if (min_electors < max_districts) throw ValidationError("elector range must exceed the district range");
  if (theta && static_cast<int>(theta->size()) != parties) throw ValidationError("fixed theta must have K entries");
}

ElectionConfig ConfigRanges::draw(Rng& rng) const {
  const int S = std::uniform_int_distribution<int>(min_districts, max_districts)(rng);
  const double log_n = std::uniform_real_distribution<double>(std::log(static_cast<double>(min_electors)),
                                                              std::log(static_cast<double>(max_electors)))(rng);
  const Count N = std::clamp(static_cast<Count>(std::llround(std::exp(log_n))), min_electors, max_electors);
  std::vector<double> shares;
  if (theta) {
    shares = *theta;
  } else {
    // Normalized unit exponentials are uniform on the simplex.
    std::exponential_distribution<double> expo(1.0);
    double sum = 0.0;
    for (int k = 0; k < parties; ++k) {
      shares.push_back(expo(rng));
      sum += shares.back();
    }
    for (double& s : shares) s /= sum;
  }
  return make_config(S, N, std::move(shares));
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& rows) {
  FeatureScaler sc;
  const auto n = static_cast<double>(rows.rows());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double mu = rows.col(c).mean();
    const double var = n > 1 ? (rows.col(c).array() - mu).square().sum() / (n - 1.0) : 0.0;
    sc.mean.push_back(mu);
    sc.std.push_back(std::max(std::sqrt(var), kStdFloor));
  }
  return sc;
}

TrainingSet make_training_set(ModelTag model, const PriorSpec& prior, int parties, Eigen::MatrixXd features,
                              Eigen::MatrixXd targets) {
  if (features.rows() != targets.rows()) throw ValidationError("feature and target row counts differ");
  if (features.cols() != feature_dimension(parties)) throw ValidationError("feature matrix has the wrong width");
  if (targets.cols() != prior.dimension()) throw ValidationError("target matrix has the wrong width");
  if (!features.allFinite() || !targets.allFinite()) throw ValidationError("training data must be finite");
  TrainingSet set;
  set.model = model;
  set.prior = prior;
  set.parties = parties;
  set.scaler = FeatureScaler::fit(features);
  set.features = std::move(features);
  set.targets = std::move(targets);
  return set;
}

TrainingSet generate_training_set(ModelTag model, const ConfigRanges& ranges, const PriorSpec& prior, int n,
                                  std::uint64_t seed) {
  if (n < 100) throw ValidationError("training sets need at least 100 rows");
  ranges.validate();
  prior.validate();
  if (prior.model != model) throw ValidationError("prior does not belong to the requested model");

  const int F = feature_dimension(ranges.parties);
  Eigen::MatrixXd features(n, F);
  Eigen::MatrixXd targets(n, prior.dimension());
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const ElectionConfig config = ranges.draw(rng);
    const ParamVector params = prior.sample(rng);
    const auto votes = simulate(config, params, rng());
    const auto f = make_features(summarize(votes, config), config);
    const auto row = static_cast<Eigen::Index>(i);
    for (int c = 0; c < F; ++c) features(row, c) = f.values[static_cast<std::size_t>(c)];
    for (int c = 0; c < prior.dimension(); ++c) targets(row, c) = params.values[static_cast<std::size_t>(c)];
  });
  return make_training_set(model, prior, ranges.parties, std::move(features), std::move(targets));
}

nlohmann::json to_json(const PriorSpec& prior) {
  nlohmann::json ranges = nlohmann::json::array();
  for (const auto& r : prior.ranges)
    ranges.push_back({{"name", r.name}, {"lo", r.lo}, {"hi", r.hi}, {"log_scale", r.log_scale}});
  return {{"model", std::string(to_string(prior.model))}, {"ranges", ranges}};
}

PriorSpec prior_from_json(const nlohmann::json& j) {
  PriorSpec prior;
  try {
    prior.model = parse_model(j.at("model").get<std::string>());
    for (const auto& r : j.at("ranges"))
      prior.ranges.push_back({r.at("name").get<std::string>(), r.at("lo").get<double>(), r.at("hi").get<double>(),
                              r.value("log_scale", false)});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed prior JSON: ") + e.what());
  }
  prior.validate();
  return prior;
}

void write_training_set(const TrainingSet& set, const std::filesystem::path& csv_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot write " + csv_path.string());
  const auto names = feature_names(set.parties);
  for (std::size_t c = 0; c < names.size(); ++c) csv << (c ? "," : "") << names[c];
  for (const auto& r : set.prior.ranges) csv << ",target_" << r.name;
  csv << '\n' << std::setprecision(17);
  for (int i = 0; i < set.rows(); ++i) {
    for (Eigen::Index c = 0; c < set.features.cols(); ++c) csv << (c ? "," : "") << set.features(i, c);
    for (Eigen::Index c = 0; c < set.targets.cols(); ++c) csv << ',' << set.targets(i, c);
    csv << '\n';
  }
  if (!csv) throw IoError("failed writing " + csv_path.string());

  nlohmann::json meta;
  meta["layout_version"] = set.layout_version;
  meta["model"] = std::string(to_string(set.model));
  meta["parties"] = set.parties;
  meta["prior"] = to_json(set.prior);
  meta["feature_names"] = names;
  meta["scaling"] = {{"mean", set.scaler.mean}, {"std", set.scaler.std}};
  std::ofstream side(csv_path.string() + ".json");
  if (!side) throw IoError("cannot write sidecar for " + csv_path.string());
  side << std::setw(2) << meta << '\n';
}

TrainingSet read_training_set(const std::filesystem::path& csv_path) {
  std::ifstream side(csv_path.string() + ".json");
  if (!side) throw IoError("missing training-set sidecar " + csv_path.string() + ".json");
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed training-set sidecar: ") + e.what());
  }
  const int version = meta.value("layout_version", 0);
  if (version != kFeatureLayoutVersion) throw IoError("unsupported feature layout version " + std::to_string(version));
  const int parties = meta.at("parties").get<int>();
  const PriorSpec prior = prior_from_json(meta.at("prior"));
  const ModelTag model = parse_model(meta.at("model").get<std::string>());

  std::ifstream csv(csv_path);
  if (!csv) throw IoError("cannot read " + csv_path.string());
  std::string line;
  std::getline(csv, line);
  const int F = feature_dimension(parties);
  const int P = prior.dimension();
  std::vector<std::vector<double>> rows;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("non-numeric training cell '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != F + P) throw IoError("training row has the wrong number of columns");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()), F);
  Eigen::MatrixXd targets(static_cast<Eigen::Index>(rows.size()), P);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < F; ++c) features(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
    for (int c = 0; c < P; ++c) targets(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(F + c)];
  }
  TrainingSet set = make_training_set(model, prior, parties, std::move(features), std::move(targets));
  // Keep the stored scaling so predictions reuse exactly what training saw.
  set.scaler.mean = meta.at("scaling").at("mean").get<std::vector<double>>();
  set.scaler.std = meta.at("scaling").at("std").get<std::vector<double>>();
  return set;
}

}  // namespace elect
