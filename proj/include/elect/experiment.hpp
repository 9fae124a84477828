#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "elect/abc.hpp"
#include "elect/mlp.hpp"
#include "elect/observed.hpp"

namespace elect {

// A grid of (parameter vector, θ) points, each replicated R times.
// JSON form:
//   {"model": "dpm", "districts": 100, "electors": 100000,
//    "theta": [[0.6, 0.4], [0.7, 0.3]], "params": [[0.25], [0.99]],
//    "replications": 30, "seed": 1}
// Grid order is params-major: every θ for params[0], then params[1], ...
struct ExperimentSpec {
  ModelTag model = ModelTag::Dpm;
  int districts = 100;
  Count electors = 100000;
  std::vector<std::vector<double>> thetas;
  std::vector<std::vector<double>> params;
  int replications = 1;
  std::uint64_t seed = 0;

  std::size_t points() const { return thetas.size() * params.size(); }
  void validate() const;
};

ExperimentSpec experiment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentSpec& spec);

// Replicated simulations at one configuration. Per-run values are kept so
// callers can count events such as clean sweeps.
struct ReplicateStats {
  ParamVector params;
  std::vector<double> theta;
  std::vector<std::vector<int>> seats;          // runs x K
  std::vector<std::vector<double>> std_frac;    // runs x K
  std::vector<double> mwm;                      // per run
  std::vector<double> swm;                      // per run

  int runs() const { return static_cast<int>(mwm.size()); }
  std::vector<double> seats_mean() const;
  std::vector<double> seats_sd() const;         // sample std, 0 for one run
  std::vector<double> std_frac_mean() const;
  double mwm_mean() const;
  double mwm_sd() const;
  double swm_mean() const;
  double swm_sd() const;
  // Runs in which `party` won every district.
  int sweeps(int party) const;
};

// Run r uses seed derive_seed(seed, r).
ReplicateStats replicate(const ElectionConfig& config, const ParamVector& params, int runs, std::uint64_t seed);

struct SweepReport {
  ExperimentSpec spec;
  std::vector<ReplicateStats> points;  // grid order
};

// Point p, run r is simulated with derive_seed(derive_seed(seed, p), r).
SweepReport run_sweep(const ExperimentSpec& spec);
void write_sweep_csv(std::ostream& out, const SweepReport& report);
nlohmann::json to_json(const SweepReport& report);
nlohmann::json to_json(const ReplicateStats& stats);

enum class FitMethod { Rejection, ExploreExploit, Hybrid };
FitMethod parse_method(std::string_view name);  // "rejection" | "explore-exploit" | "hybrid"
std::string_view to_string(FitMethod method);

struct FitSettings {
  FitMethod method = FitMethod::Hybrid;
  std::optional<PriorSpec> prior;  // model defaults when absent
  RejectionSettings rejection;
  ExploreExploitSettings explore_exploit;
  // Hybrid: regressor trained on simulations at the observed configuration,
  // then an exploit phase around its prediction.
  int training_rows = 2000;
  MlpSettings mlp;
  int n_exploit = 300;
  double accept_quantile = 0.05;
  int bins = 20;
};

FitSettings fit_settings_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitSettings& settings);

struct FitOutcome {
  PriorSpec prior;
  AbcResult result;
  std::optional<ParamVector> regressor_seed;  // hybrid only
};

FitOutcome fit_observed(const ObservedElection& observed, ModelTag model, const FitSettings& settings,
                        std::uint64_t seed);

nlohmann::json to_json(const AbcResult& result, const PriorSpec& prior);
nlohmann::json to_json(const ParamVector& params);
ParamVector param_vector_from_json(const nlohmann::json& j, ModelTag model);

}  // namespace elect
