#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "elect/core.hpp"

namespace elect {

// Summary statistics of a vote matrix, (3K + S + 2) components:
//   seats (K), mean vote fraction (K), std of vote fraction across districts (K),
//   per-district std across parties sorted descending (S), mean and std of the
//   winning margin (2).
// The mask marks which flattened components are observed; real elections
// reported only as seats and margins leave the rest masked out.
struct SummaryStats {
  std::vector<double> seats;
  std::vector<double> mean_frac;
  std::vector<double> std_frac;
  std::vector<double> district_spread;
  double margin_mean = 0.0;
  double margin_std = 0.0;
  std::vector<bool> mask;

  int parties() const { return static_cast<int>(seats.size()); }
  int districts() const { return static_cast<int>(district_spread.size()); }
  std::size_t dimension() const { return 3 * seats.size() + district_spread.size() + 2; }

  // Components in the fixed order seats, mean_frac, std_frac, spread, margin mean, margin std.
  std::vector<double> flatten() const;

  bool operator==(const SummaryStats&) const = default;
};

// Per-component standardization for distance(). Entries are at least kScaleFloor.
struct ScaleVector {
  static constexpr double kScaleFloor = 1e-6;
  std::vector<double> values;
};

// Fully observed statistics of a simulated or district-level election.
// Standard deviations over districts and parties are population (1/n) values.
SummaryStats summarize(const VoteMatrix& votes, const ElectionConfig& config);

// Aggregate observation: only seats, margin mean and margin std are unmasked.
SummaryStats aggregate_stats(std::vector<double> seats, double margin_mean, double margin_std, int districts);

// Sample standard deviation (n - 1) of each component over the pool, floored.
// Requires at least 10 entries.
ScaleVector estimate_scale(std::span<const SummaryStats> pool);

// Root-mean-square standardized difference over the components unmasked in
// both a and b: sqrt(sum(((a_i - b_i) / scale_i)^2) / count).
double distance(const SummaryStats& a, const SummaryStats& b, const ScaleVector& scale);

nlohmann::json to_json(const SummaryStats& stats);
SummaryStats summary_from_json(const nlohmann::json& j);

}  // namespace elect
