#include "elect/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "elect/errors.hpp"
#include "elect/features.hpp"
#include "elect/hybrid.hpp"
#include "elect/parallel.hpp"
#include "elect/training.hpp"

namespace elect {

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <class T>
std::vector<double> column(const std::vector<std::vector<T>>& rows, std::size_t k) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(static_cast<double>(r[k]));
  return out;
}

template <class F>
auto json_field(const char* what, F&& read) {
  try {
    return read();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

void ExperimentSpec::validate() const {
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (thetas.empty() || params.empty()) throw ValidationError("the sweep grid is empty");
  if (districts < 1 || electors < districts) throw ValidationError("need 1 <= S <= N");
  for (const auto& p : params)
    if (static_cast<int>(p.size()) != param_count(model, static_cast<int>(thetas.front().size())))
      throw ValidationError("parameter vector has the wrong length for " + std::string(to_string(model)));
  for (const auto& t : thetas)
    if (t.size() != thetas.front().size()) throw ValidationError("all theta vectors need the same length");
}

ExperimentSpec experiment_from_json(const nlohmann::json& j) {
  ExperimentSpec spec = json_field("experiment", [&] {
    ExperimentSpec s;
    s.model = parse_model(j.at("model").get<std::string>());
    s.districts = j.value("districts", s.districts);
    s.electors = j.value("electors", s.electors);
    s.thetas = j.at("theta").get<std::vector<std::vector<double>>>();
    s.params = j.at("params").get<std::vector<std::vector<double>>>();
    s.replications = j.value("replications", s.replications);
    s.seed = j.value("seed", s.seed);
    return s;
  });
  for (auto& t : spec.thetas) t = with_residual_party(std::move(t));
  spec.validate();
  return spec;
}

nlohmann::json to_json(const ExperimentSpec& spec) {
  return {{"model", std::string(to_string(spec.model))},
          {"districts", spec.districts},
          {"electors", spec.electors},
          {"theta", spec.thetas},
          {"params", spec.params},
          {"replications", spec.replications},
          {"seed", spec.seed}};
}

std::vector<double> ReplicateStats::seats_mean() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < theta.size(); ++k) out.push_back(mean_of(column(seats, k)));
  return out;
}

std::vector<double> ReplicateStats::seats_sd() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < theta.size(); ++k) out.push_back(sd_of(column(seats, k)));
  return out;
}

std::vector<double> ReplicateStats::std_frac_mean() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < theta.size(); ++k) out.push_back(mean_of(column(std_frac, k)));
  return out;
}

double ReplicateStats::mwm_mean() const { return mean_of(mwm); }
double ReplicateStats::mwm_sd() const { return sd_of(mwm); }
double ReplicateStats::swm_mean() const { return mean_of(swm); }
double ReplicateStats::swm_sd() const { return sd_of(swm); }

int ReplicateStats::sweeps(int party) const {
  int n = 0;
  for (const auto& s : seats)
    if (std::accumulate(s.begin(), s.end(), 0) == s[static_cast<std::size_t>(party)]) ++n;
  return n;
}

ReplicateStats replicate(const ElectionConfig& config, const ParamVector& params, int runs, std::uint64_t seed) {
  if (runs < 1) throw ValidationError("need at least one run");
  ReplicateStats out;
  out.params = params;
  out.theta = config.theta;
  const auto R = static_cast<std::size_t>(runs);
  std::vector<SummaryStats> stats(R);
  parallel_for(R, [&](std::size_t r) { stats[r] = summarize(simulate(config, params, derive_seed(seed, r)), config); });
  for (const auto& st : stats) {
    std::vector<int> seats;
    for (double s : st.seats) seats.push_back(static_cast<int>(s));
    out.seats.push_back(std::move(seats));
    out.std_frac.push_back(st.std_frac);
    out.mwm.push_back(st.margin_mean);
    out.swm.push_back(st.margin_std);
  }
  return out;
}

SweepReport run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  SweepReport report{spec, {}};
  std::size_t point = 0;
  for (const auto& p : spec.params) {
    for (const auto& theta : spec.thetas) {
      const ElectionConfig config = make_config(spec.districts, spec.electors, theta);
      report.points.push_back(
          replicate(config, ParamVector{spec.model, p}, spec.replications, derive_seed(spec.seed, point)));
      ++point;
    }
  }
  return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  const auto names = param_names(report.spec.model, static_cast<int>(report.spec.thetas.front().size()));
  const std::size_t K = report.spec.thetas.front().size();
  for (std::size_t i = 0; i < report.spec.params.front().size(); ++i) out << names[i] << ',';
  for (std::size_t k = 1; k <= K; ++k) out << "theta_" << k << ',';
  for (std::size_t k = 1; k <= K; ++k) out << "seats_" << k << "_mean,seats_" << k << "_sd,";
  out << "mwm_mean,mwm_sd,swm_mean,swm_sd";
  for (std::size_t k = 1; k <= K; ++k) out << ",std_frac_" << k << "_mean";
  out << ",runs\n";
  out << std::setprecision(10);
  for (const auto& pt : report.points) {
    for (double v : pt.params.values) out << v << ',';
    for (double t : pt.theta) out << t << ',';
    const auto m = pt.seats_mean();
    const auto sd = pt.seats_sd();
    for (std::size_t k = 0; k < K; ++k) out << m[k] << ',' << sd[k] << ',';
    out << pt.mwm_mean() << ',' << pt.mwm_sd() << ',' << pt.swm_mean() << ',' << pt.swm_sd();
    for (double f : pt.std_frac_mean()) out << ',' << f;
    out << ',' << pt.runs() << '\n';
  }
}

nlohmann::json to_json(const ReplicateStats& stats) {
  return {{"params", to_json(stats.params)},
          {"theta", stats.theta},
          {"runs", stats.runs()},
          {"seats_mean", stats.seats_mean()},
          {"seats_sd", stats.seats_sd()},
          {"mwm_mean", stats.mwm_mean()},
          {"mwm_sd", stats.mwm_sd()},
          {"swm_mean", stats.swm_mean()},
          {"swm_sd", stats.swm_sd()},
          {"std_frac_mean", stats.std_frac_mean()},
          {"seats_per_run", stats.seats}};
}

nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : report.points) points.push_back(to_json(p));
  return {{"experiment", to_json(report.spec)}, {"points", points}};
}

FitMethod parse_method(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "rejection") return FitMethod::Rejection;
  if (lower == "explore-exploit" || lower == "explore_exploit") return FitMethod::ExploreExploit;
  if (lower == "hybrid") return FitMethod::Hybrid;
  throw ValidationError("unknown fit method '" + std::string(name) + "'");
}

std::string_view to_string(FitMethod method) {
  switch (method) {
    case FitMethod::Rejection: return "rejection";
    case FitMethod::ExploreExploit: return "explore-exploit";
    case FitMethod::Hybrid: return "hybrid";
  }
  return "unknown";
}

FitSettings fit_settings_from_json(const nlohmann::json& j) {
  return json_field("fit settings", [&] {
    FitSettings s;
    if (j.contains("method")) s.method = parse_method(j["method"].get<std::string>());
    if (j.contains("prior") && !j["prior"].is_null()) s.prior = prior_from_json(j["prior"]);
    s.rejection.n_proposals = j.value("n_proposals", s.rejection.n_proposals);
    s.explore_exploit.n_explore = j.value("n_explore", s.explore_exploit.n_explore);
    s.explore_exploit.n_seeds = j.value("n_seeds", s.explore_exploit.n_seeds);
    s.explore_exploit.n_exploit = j.value("n_exploit", s.explore_exploit.n_exploit);
    s.n_exploit = j.value("n_exploit", s.n_exploit);
    s.accept_quantile = j.value("accept_quantile", s.accept_quantile);
    s.bins = j.value("bins", s.bins);
    s.rejection.accept_quantile = s.explore_exploit.accept_quantile = s.accept_quantile;
    s.rejection.bins = s.explore_exploit.bins = s.bins;
    s.training_rows = j.value("training_rows", s.training_rows);
    s.mlp.epochs = j.value("epochs", s.mlp.epochs);
    s.mlp.batch = j.value("batch", s.mlp.batch);
    s.mlp.learning_rate = j.value("learning_rate", s.mlp.learning_rate);
    s.mlp.dropout = j.value("dropout", s.mlp.dropout);
    return s;
  });
}

nlohmann::json to_json(const FitSettings& s) {
  nlohmann::json j = {{"method", std::string(to_string(s.method))},
                      {"n_proposals", s.rejection.n_proposals},
                      {"n_explore", s.explore_exploit.n_explore},
                      {"n_seeds", s.explore_exploit.n_seeds},
                      {"n_exploit", s.n_exploit},
                      {"accept_quantile", s.accept_quantile},
                      {"bins", s.bins},
                      {"training_rows", s.training_rows},
                      {"epochs", s.mlp.epochs},
                      {"batch", s.mlp.batch},
                      {"learning_rate", s.mlp.learning_rate},
                      {"dropout", s.mlp.dropout}};
  j["prior"] = s.prior ? to_json(*s.prior) : nlohmann::json(nullptr);
  return j;
}

FitOutcome fit_observed(const ObservedElection& observed, ModelTag model, const FitSettings& settings,
                        std::uint64_t seed) {
  FitOutcome out;
  out.prior = settings.prior.value_or(PriorSpec::defaults(model, observed.config.parties()));
  if (out.prior.model != model) throw ValidationError("prior belongs to a different model");
  const AbcProblem problem{observed.stats, observed.config, out.prior};
  switch (settings.method) {
    case FitMethod::Rejection:
      out.result = abc_rejection(problem, settings.rejection, seed);
      break;
    case FitMethod::ExploreExploit: {
      ExploreExploitSettings ee = settings.explore_exploit;
      ee.n_exploit = settings.n_exploit;
      out.result = abc_explore_exploit(problem, ee, seed);
      break;
    }
    case FitMethod::Hybrid: {
      ConfigRanges ranges;
      ranges.parties = observed.config.parties();
      ranges.min_districts = ranges.max_districts = observed.config.districts;
      ranges.min_electors = ranges.max_electors = observed.config.electors;
      ranges.theta = observed.config.theta;
      const TrainingSet train =
          generate_training_set(model, ranges, out.prior, settings.training_rows, derive_seed(seed, 0));
      const FeatureVector features = make_features(observed.stats, observed.config);
      const auto columns = available_columns(features);
      const MlpModel regressor = mlp_train(train, settings.mlp, derive_seed(seed, 1), columns);
      out.regressor_seed = mlp_predict(regressor, features);
      ExploitSettings exploit;
      exploit.n_exploit = settings.n_exploit;
      exploit.accept_quantile = settings.accept_quantile;
      exploit.bins = settings.bins;
      exploit.proposal_cov = default_proposal_cov(out.prior);
      out.result = hybrid_estimate(*out.regressor_seed, problem, exploit, derive_seed(seed, 2));
      break;
    }
  }
  return out;
}

nlohmann::json to_json(const ParamVector& params) {
  return {{"model", std::string(to_string(params.model))}, {"values", params.values}};
}

ParamVector param_vector_from_json(const nlohmann::json& j, ModelTag model) {
  return json_field("parameter vector", [&] {
    if (j.is_array()) return ParamVector{model, j.get<std::vector<double>>()};
    const ModelTag tag = j.contains("model") ? parse_model(j["model"].get<std::string>()) : model;
    if (tag != model) throw ValidationError("parameters belong to " + std::string(to_string(tag)));
    return ParamVector{tag, j.at("values").get<std::vector<double>>()};
  });
}

nlohmann::json to_json(const AbcResult& result, const PriorSpec& prior) {
  nlohmann::json accepted = nlohmann::json::array();
  for (const auto& a : result.accepted)
    accepted.push_back({{"values", a.params.values}, {"distance", a.distance}, {"index", a.index}});
  nlohmann::json posterior = nlohmann::json::array();
  for (std::size_t d = 0; d < result.posterior.size(); ++d)
    posterior.push_back({{"name", prior.ranges[d].name},
                         {"edges", result.posterior[d].edges},
                         {"mass", result.posterior[d].mass}});
  return {{"model", std::string(to_string(prior.model))},
          {"parameter_names", [&] {
             std::vector<std::string> n;
             for (const auto& r : prior.ranges) n.push_back(r.name);
             return n;
           }()},
          {"n_proposed", result.n_proposed},
          {"psi_map", result.psi_map.values},
          {"psi_opt", result.psi_opt.values},
          {"accepted", accepted},
          {"posterior", posterior},
          {"scale", result.scale.values},
          {"prior", to_json(prior)}};
}

}  // namespace elect
