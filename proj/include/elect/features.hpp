#pragma once

#include <string>
#include <vector>

#include "elect/core.hpp"
#include "elect/summaries.hpp"

namespace elect {

// Regressor input layout, version 1 (F = 4K + 9):
//   seats (K), mean_frac (K), std_frac (K), five largest district spreads (5,
//   zero-padded when S < 5), margin mean, margin std, theta (K), log10 N, log10 S.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr int kSpreadFeatures = 5;

struct FeatureVector {
  std::vector<double> values;
  std::vector<bool> available;  // false where the source summary was masked
};

int feature_dimension(int parties);
std::vector<std::string> feature_names(int parties);

FeatureVector make_features(const SummaryStats& stats, const ElectionConfig& config);

// Indices of the available features.
std::vector<int> available_columns(const FeatureVector& features);

}  // namespace elect
