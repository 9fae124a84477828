#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elect/core.hpp"
#include "elect/generators.hpp"
#include "elect/rng.hpp"
#include "elect/summaries.hpp"

namespace elect {

// One independent uniform prior dimension. Log-scaled dimensions are uniform
// in log space, and all searching (proposals, histograms, bisection) happens
// in that transformed "search space".
struct ParamRange {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;

  double to_search(double x) const;
  double from_search(double y) const;
  double search_lo() const { return to_search(lo); }
  double search_hi() const { return to_search(hi); }
};

struct PriorSpec {
  ModelTag model = ModelTag::Dpm;
  std::vector<ParamRange> ranges;

  // gamma, beta, eta in (0.01, 0.999); alpha in (0.1, 50], log-scaled.
  static PriorSpec defaults(ModelTag model, int parties);

  int dimension() const { return static_cast<int>(ranges.size()); }
  ParamVector sample(Rng& rng) const;
  bool contains(const ParamVector& p) const;
  ParamVector clamp(ParamVector p) const;
  std::vector<double> to_search(const ParamVector& p) const;
  ParamVector from_search(std::span<const double> y) const;
  void validate() const;
};

// diag((0.1 * search-space width)^2)
Eigen::MatrixXd default_proposal_cov(const PriorSpec& prior);

struct AbcProblem {
  SummaryStats observed;
  ElectionConfig config;
  PriorSpec prior;
};

struct Proposal {
  ParamVector params;
  double distance = 0.0;
  std::size_t index = 0;  // position in the simulated pool
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges, natural units
  std::vector<double> mass;   // sums to 1
};

struct AbcResult {
  std::vector<Proposal> accepted;  // ascending distance, ties by pool index
  std::size_t n_proposed = 0;
  std::vector<Histogram> posterior;
  ParamVector psi_map;
  ParamVector psi_opt;
  ScaleVector scale;
};

struct RejectionSettings {
  int n_proposals = 1000;
  double accept_quantile = 0.05;
  int bins = 20;
  std::optional<ScaleVector> scale;  // estimated from the first 100 simulations when absent
};

struct ExploreExploitSettings {
  int n_explore = 200;
  int n_seeds = 5;
  int n_exploit = 300;
  double accept_quantile = 0.05;
  int bins = 20;
  std::optional<Eigen::MatrixXd> proposal_cov;  // search space; default_proposal_cov when absent
  std::optional<ScaleVector> scale;
};

// Plain rejection: n_proposals prior draws, one simulation each, keep the
// accept_quantile fraction closest to the observation.
AbcResult abc_rejection(const AbcProblem& problem, const RejectionSettings& settings, std::uint64_t seed);

// Explore with rejection, take the n_seeds best draws as centres of an equal
// Gaussian mixture, exploit with n_exploit draws from it, then accept by
// quantile over the explore and exploit pools together.
AbcResult abc_explore_exploit(const AbcProblem& problem, const ExploreExploitSettings& settings,
                              std::uint64_t seed);

struct ExploitSettings {
  int n_exploit = 300;
  double accept_quantile = 0.05;
  int bins = 20;
  Eigen::MatrixXd proposal_cov;
  std::optional<ScaleVector> scale;  // estimated from the first 100 exploit simulations when absent
};

// Exploit phase alone around the given seeds. `carried` proposals (e.g. an
// explore pool already scored with settings.scale) join the acceptance pool.
AbcResult abc_exploit(const AbcProblem& problem, std::span<const ParamVector> seeds,
                      const ExploitSettings& settings, std::uint64_t seed,
                      std::span<const Proposal> carried = {});

// Per-dimension histogram over the prior's search range; returns the centre
// of the modal bin (lowest index on ties) mapped back to natural units.
ParamVector map_estimate(std::span<const ParamVector> accepted, const PriorSpec& prior, int bins);

std::vector<Histogram> posterior_histograms(std::span<const ParamVector> accepted, const PriorSpec& prior,
                                            int bins);

// Simulates every parameter vector with seed derive_seed(seed, i) and returns
// the summaries in input order.
std::vector<SummaryStats> simulate_summaries(const ElectionConfig& config, std::span<const ParamVector> params,
                                             std::uint64_t seed);

}  // namespace elect
