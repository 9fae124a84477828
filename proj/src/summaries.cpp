#include "elect/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "elect/errors.hpp"

namespace elect {

namespace {

double mean_of(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
  const double mu = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

std::vector<double> SummaryStats::flatten() const {
  std::vector<double> out;
  out.reserve(dimension());
  out.insert(out.end(), seats.begin(), seats.end());
  out.insert(out.end(), mean_frac.begin(), mean_frac.end());
  out.insert(out.end(), std_frac.begin(), std_frac.end());
  out.insert(out.end(), district_spread.begin(), district_spread.end());
  out.push_back(margin_mean);
  out.push_back(margin_std);
  return out;
}

SummaryStats summarize(const VoteMatrix& votes, const ElectionConfig& config) {
  const auto outcome = tally(votes, config);
  const int S = votes.districts();
  const int K = votes.parties();

  SummaryStats st;
  st.seats.assign(outcome.seats.begin(), outcome.seats.end());

  std::vector<double> column(static_cast<std::size_t>(S));
  for (int k = 0; k < K; ++k) {
    for (int s = 0; s < S; ++s)
      column[static_cast<std::size_t>(s)] = static_cast<double>(votes.at(s, k)) /
                                            static_cast<double>(config.capacities[static_cast<std::size_t>(s)]);
    st.mean_frac.push_back(mean_of(column));
    st.std_frac.push_back(population_std(column));
  }

  std::vector<double> row(static_cast<std::size_t>(K));
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k)
      row[static_cast<std::size_t>(k)] = static_cast<double>(votes.at(s, k)) /
                                         static_cast<double>(config.capacities[static_cast<std::size_t>(s)]);
    st.district_spread.push_back(population_std(row));
  }
  std::sort(st.district_spread.begin(), st.district_spread.end(), std::greater<>());

  st.margin_mean = mean_of(outcome.margins);
  st.margin_std = population_std(outcome.margins);
  st.mask.assign(st.dimension(), true);
  return st;
}

SummaryStats aggregate_stats(std::vector<double> seats, double margin_mean, double margin_std, int districts) {
  SummaryStats st;
  const std::size_t K = seats.size();
  st.seats = std::move(seats);
  st.mean_frac.assign(K, 0.0);
  st.std_frac.assign(K, 0.0);
  st.district_spread.assign(static_cast<std::size_t>(districts), 0.0);
  st.margin_mean = margin_mean;
  st.margin_std = margin_std;
  st.mask.assign(st.dimension(), false);
  std::fill_n(st.mask.begin(), K, true);
  st.mask[st.dimension() - 2] = true;
  st.mask[st.dimension() - 1] = true;
  return st;
}

ScaleVector estimate_scale(std::span<const SummaryStats> pool) {
  if (pool.size() < 10) throw ValidationError("estimate_scale needs at least 10 summaries");
  const std::size_t dim = pool.front().dimension();
  std::vector<double> sum(dim, 0.0);
  std::vector<std::vector<double>> rows;
  rows.reserve(pool.size());
  for (const auto& st : pool) {
    if (st.dimension() != dim) throw ValidationError("estimate_scale: inconsistent summary dimensions");
    rows.push_back(st.flatten());
    for (std::size_t i = 0; i < dim; ++i) sum[i] += rows.back()[i];
  }
  const double n = static_cast<double>(pool.size());
  ScaleVector scale;
  scale.values.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double mu = sum[i] / n;
    double ss = 0.0;
    for (const auto& r : rows) ss += (r[i] - mu) * (r[i] - mu);
    scale.values[i] = std::max(std::sqrt(ss / (n - 1.0)), ScaleVector::kScaleFloor);
  }
  return scale;
}

double distance(const SummaryStats& a, const SummaryStats& b, const ScaleVector& scale) {
  const std::size_t dim = a.dimension();
  if (b.dimension() != dim || scale.values.size() != dim || a.mask.size() != dim || b.mask.size() != dim)
    throw ValidationError("distance: dimension mismatch");
  const auto fa = a.flatten();
  const auto fb = b.flatten();
  double ss = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (!a.mask[i] || !b.mask[i]) continue;
    const double d = (fa[i] - fb[i]) / scale.values[i];
    ss += d * d;
    ++used;
  }
  if (used == 0) throw ValidationError("distance: no component is observed in both summaries");
  return std::sqrt(ss / static_cast<double>(used));
}

nlohmann::json to_json(const SummaryStats& stats) {
  nlohmann::json j;
  j["seats"] = stats.seats;
  j["mean_frac"] = stats.mean_frac;
  j["std_frac"] = stats.std_frac;
  j["district_spread"] = stats.district_spread;
  j["margin_mean"] = stats.margin_mean;
  j["margin_std"] = stats.margin_std;
  j["mask"] = stats.mask;
  return j;
}

SummaryStats summary_from_json(const nlohmann::json& j) {
  SummaryStats st;
  try {
    st.seats = j.at("seats").get<std::vector<double>>();
    st.mean_frac = j.at("mean_frac").get<std::vector<double>>();
    st.std_frac = j.at("std_frac").get<std::vector<double>>();
    st.district_spread = j.at("district_spread").get<std::vector<double>>();
    st.margin_mean = j.at("margin_mean").get<double>();
    st.margin_std = j.at("margin_std").get<double>();
    st.mask = j.at("mask").get<std::vector<bool>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed summary JSON: ") + e.what());
  }
  if (st.mean_frac.size() != st.seats.size() || st.std_frac.size() != st.seats.size() ||
      st.mask.size() != st.dimension())
    throw IoError("summary JSON arrays have inconsistent lengths");
  return st;
}

}  // namespace elect
