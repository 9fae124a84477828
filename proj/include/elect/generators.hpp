#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "elect/core.hpp"

namespace elect {

enum class ModelTag { Dpm, Ecm, Pcm };

std::string_view to_string(ModelTag model);
ModelTag parse_model(std::string_view name);  // "dpm" | "ecm" | "pcm", case-insensitive

// District-wise polarization. One gamma per district; a single entry is
// broadcast to all districts.
struct DpmParams {
  std::vector<double> gamma;
};

// How a newly opened community picks its party k (t_k = communities already
// serving k in any district, T = all communities, masked by remaining budget):
//   Mixture: beta * t_k / T + (1 - beta) * theta_k   (t_k / T = 0 while T = 0)
//   Counts:  t_k + beta * theta_k
enum class EcmDishRule { Mixture, Counts };

// Elector communities. alpha is per district (single entry broadcasts), beta
// weights party popularity against the vote share when a community opens.
struct EcmParams {
  std::vector<double> alpha;
  double beta = 0.5;
  EcmDishRule rule = EcmDishRule::Mixture;
};

// Party-wise concentration, one eta per party.
struct PcmParams {
  std::vector<double> eta;
};

// Model-tagged parameter values: (gamma) for DPM, (alpha, beta) for ECM,
// (eta_1..eta_K) for PCM.
struct ParamVector {
  ModelTag model = ModelTag::Dpm;
  std::vector<double> values;

  bool operator==(const ParamVector&) const = default;
};

// Number of free parameters for `model` with K parties.
int param_count(ModelTag model, int parties);
std::vector<std::string> param_names(ModelTag model, int parties);

// Districts take one elector each per round, skipping full districts. Elector
// i of district s votes k with weight
//   (gamma_s * n_sk / (i - 1) + (1 - gamma_s) * theta_k) * [m_k < v_k],
// where the count fraction is 0 for the first elector.
VoteMatrix simulate_dpm(const ElectionConfig& config, const DpmParams& params, std::uint64_t seed);

// Chinese restaurant franchise with vote budgets. Same round-robin arrival as
// simulate_dpm. An elector joins an open community j with weight n_sj or opens
// a new one with weight alpha_s; a new community picks its party by
// params.rule. Communities of an exhausted party close.
VoteMatrix simulate_ecm(const ElectionConfig& config, const EcmParams& params, std::uint64_t seed);

// Electors arrive one at a time. Party k is drawn with weight theta_k * [m_k < v_k],
// then district s with weight (eta_k * V_sk / m_k + (1 - eta_k) / S) * [l_s < n_s].
VoteMatrix simulate_pcm(const ElectionConfig& config, const PcmParams& params, std::uint64_t seed);

// Dispatches on params.model. ECM and PCM vectors are validated against K.
VoteMatrix simulate(const ElectionConfig& config, const ParamVector& params, std::uint64_t seed);

void validate(const DpmParams& params, const ElectionConfig& config);
void validate(const EcmParams& params, const ElectionConfig& config);
void validate(const PcmParams& params, const ElectionConfig& config);

}  // namespace elect
