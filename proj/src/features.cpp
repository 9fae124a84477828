#include "elect/features.hpp"

#include <cmath>

#include "elect/errors.hpp"

namespace elect {

int feature_dimension(int parties) { return 4 * parties + kSpreadFeatures + 4; }

std::vector<std::string> feature_names(int parties) {
  std::vector<std::string> names;
  auto per_party = [&](const std::string& stem) {
    for (int k = 1; k <= parties; ++k) names.push_back(stem + "_" + std::to_string(k));
  };
  per_party("seats");
  per_party("mean_frac");
  per_party("std_frac");
  for (int i = 1; i <= kSpreadFeatures; ++i) names.push_back("spread_top_" + std::to_string(i));
  names.push_back("margin_mean");
  names.push_back("margin_std");
  per_party("theta");
  names.push_back("log10_n");
  names.push_back("log10_s");
  return names;
}

FeatureVector make_features(const SummaryStats& stats, const ElectionConfig& config) {
  const int K = stats.parties();
  const int S = stats.districts();
  if (K != config.parties() || S != config.districts)
    throw ValidationError("summary statistics do not match the election config");

  FeatureVector f;
  f.values.reserve(static_cast<std::size_t>(feature_dimension(K)));
  std::size_t m = 0;  // cursor into the flattened summary mask
  auto push_block = [&](const std::vector<double>& xs) {
    for (double x : xs) {
      f.values.push_back(x);
      f.available.push_back(stats.mask[m++]);
    }
  };
  push_block(stats.seats);
  push_block(stats.mean_frac);
  push_block(stats.std_frac);
  for (int i = 0; i < kSpreadFeatures; ++i) {
    if (i < S) {
      f.values.push_back(stats.district_spread[static_cast<std::size_t>(i)]);
      f.available.push_back(stats.mask[m + static_cast<std::size_t>(i)]);
    } else {
      f.values.push_back(0.0);
      f.available.push_back(true);
    }
  }
  m += static_cast<std::size_t>(S);
  f.values.push_back(stats.margin_mean);
  f.available.push_back(stats.mask[m++]);
  f.values.push_back(stats.margin_std);
  f.available.push_back(stats.mask[m++]);
  for (double t : config.theta) {
    f.values.push_back(t);
    f.available.push_back(true);
  }
  f.values.push_back(std::log10(static_cast<double>(config.electors)));
  f.values.push_back(std::log10(static_cast<double>(config.districts)));
  f.available.push_back(true);
  f.available.push_back(true);
  for (double v : f.values)
    if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
  return f;
}

std::vector<int> available_columns(const FeatureVector& features) {
  std::vector<int> cols;
  for (std::size_t i = 0; i < features.available.size(); ++i)
    if (features.available[i]) cols.push_back(static_cast<int>(i));
  return cols;
}

}  // namespace elect
