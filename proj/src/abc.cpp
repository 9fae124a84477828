#include "elect/abc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "elect/errors.hpp"
#include "elect/parallel.hpp"

namespace elect {

namespace {

constexpr int kScalePoolSize = 100;
constexpr int kMaxBoundRetries = 1000;

int bin_of(double y, double lo, double hi, int bins) {
  const double t = (y - lo) / (hi - lo);
  const int b = static_cast<int>(std::floor(t * bins));
  return std::clamp(b, 0, bins - 1);
}

std::vector<Proposal> score(const AbcProblem& problem, std::span<const ParamVector> params,
                            std::span<const SummaryStats> stats, const ScaleVector& scale, std::size_t offset) {
  std::vector<Proposal> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    out[i] = Proposal{params[i], distance(problem.observed, stats[i], scale), offset + i};
  return out;
}

ScaleVector scale_from(std::span<const SummaryStats> stats) {
  const std::size_t n = std::min<std::size_t>(kScalePoolSize, stats.size());
  return estimate_scale(stats.first(n));
}

AbcResult assemble(std::vector<Proposal> pool, const PriorSpec& prior, double quantile, int bins,
                   ScaleVector scale) {
  if (pool.empty()) throw ValidationError("ABC pool is empty");
  std::stable_sort(pool.begin(), pool.end(), [](const Proposal& a, const Proposal& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  });
  const auto keep = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(pool.size()) - 1e-9)), 1, pool.size());

  AbcResult result;
  result.n_proposed = pool.size();
  result.accepted.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
  std::vector<ParamVector> accepted;
  for (const auto& p : result.accepted) accepted.push_back(p.params);
  result.posterior = posterior_histograms(accepted, prior, bins);
  result.psi_map = map_estimate(accepted, prior, bins);
  result.psi_opt = result.accepted.front().params;
  result.scale = std::move(scale);
  return result;
}

void check_quantile(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("accept_quantile must lie in (0, 1]");
}

}  // namespace

double ParamRange::to_search(double x) const { return log_scale ? std::log(x) : x; }
double ParamRange::from_search(double y) const { return log_scale ? std::exp(y) : y; }

PriorSpec PriorSpec::defaults(ModelTag model, int parties) {
  PriorSpec prior;
  prior.model = model;
  switch (model) {
    case ModelTag::Dpm:
      prior.ranges = {{"gamma", 0.01, 0.999, false}};
      break;
    case ModelTag::Ecm:
      prior.ranges = {{"alpha", 0.1, 50.0, true}, {"beta", 0.01, 0.999, false}};
      break;
    case ModelTag::Pcm:
      for (const auto& name : param_names(model, parties)) prior.ranges.push_back({name, 0.01, 0.999, false});
      break;
  }
  return prior;
}

void PriorSpec::validate() const {
  if (ranges.empty()) throw ValidationError("prior has no dimensions");
  for (const auto& r : ranges) {
    if (!(r.lo < r.hi)) throw ValidationError("prior range for " + r.name + " is empty");
    if (r.log_scale && r.lo <= 0.0) throw ValidationError("log-scaled prior range for " + r.name + " must be positive");
  }
}

ParamVector PriorSpec::sample(Rng& rng) const {
  ParamVector p{model, {}};
  for (const auto& r : ranges) {
    const double y = std::uniform_real_distribution<double>(r.search_lo(), r.search_hi())(rng);
    p.values.push_back(std::clamp(r.from_search(y), r.lo, r.hi));
  }
  return p;
}

bool PriorSpec::contains(const ParamVector& p) const {
  if (p.model != model || p.values.size() != ranges.size()) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (!(p.values[i] >= ranges[i].lo && p.values[i] <= ranges[i].hi)) return false;
  return true;
}

ParamVector PriorSpec::clamp(ParamVector p) const {
  if (p.values.size() != ranges.size()) throw ValidationError("parameter vector does not match the prior");
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    double& v = p.values[i];
    if (!std::isfinite(v)) v = ranges[i].from_search(0.5 * (ranges[i].search_lo() + ranges[i].search_hi()));
    v = std::clamp(v, ranges[i].lo, ranges[i].hi);
  }
  return p;
}

std::vector<double> PriorSpec::to_search(const ParamVector& p) const {
  if (p.values.size() != ranges.size()) throw ValidationError("parameter vector does not match the prior");
  std::vector<double> y(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) y[i] = ranges[i].to_search(p.values[i]);
  return y;
}

ParamVector PriorSpec::from_search(std::span<const double> y) const {
  ParamVector p{model, std::vector<double>(ranges.size())};
  for (std::size_t i = 0; i < ranges.size(); ++i) p.values[i] = ranges[i].from_search(y[i]);
  return p;
}

Eigen::MatrixXd default_proposal_cov(const PriorSpec& prior) {
  const int d = prior.dimension();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const auto& r = prior.ranges[static_cast<std::size_t>(i)];
    const double width = 0.1 * (r.search_hi() - r.search_lo());
    cov(i, i) = width * width;
  }
  return cov;
}

std::vector<SummaryStats> simulate_summaries(const ElectionConfig& config, std::span<const ParamVector> params,
                                             std::uint64_t seed) {
  std::vector<SummaryStats> out(params.size());
  parallel_for(params.size(), [&](std::size_t i) {
    out[i] = summarize(simulate(config, params[i], derive_seed(seed, i)), config);
  });
  return out;
}

std::vector<Histogram> posterior_histograms(std::span<const ParamVector> accepted, const PriorSpec& prior,
                                            int bins) {
  if (accepted.empty()) throw ValidationError("no accepted samples");
  if (bins < 2) throw ValidationError("histograms need at least 2 bins");
  std::vector<Histogram> out;
  for (std::size_t d = 0; d < prior.ranges.size(); ++d) {
    const auto& r = prior.ranges[d];
    const double lo = r.search_lo();
    const double hi = r.search_hi();
    Histogram h;
    for (int b = 0; b <= bins; ++b) h.edges.push_back(r.from_search(lo + (hi - lo) * b / bins));
    h.edges.front() = r.lo;
    h.edges.back() = r.hi;
    h.mass.assign(static_cast<std::size_t>(bins), 0.0);
    for (const auto& p : accepted)
      h.mass[static_cast<std::size_t>(bin_of(r.to_search(p.values.at(d)), lo, hi, bins))] += 1.0;
    for (double& m : h.mass) m /= static_cast<double>(accepted.size());
    out.push_back(std::move(h));
  }
  return out;
}

ParamVector map_estimate(std::span<const ParamVector> accepted, const PriorSpec& prior, int bins) {
  if (accepted.empty()) throw ValidationError("map_estimate: accepted set is empty");
  if (bins < 2) throw ValidationError("map_estimate: bins must be at least 2");
  ParamVector out{prior.model, {}};
  for (std::size_t d = 0; d < prior.ranges.size(); ++d) {
    const auto& r = prior.ranges[d];
    const double lo = r.search_lo();
    const double hi = r.search_hi();
    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    for (const auto& p : accepted) ++counts[static_cast<std::size_t>(bin_of(r.to_search(p.values.at(d)), lo, hi, bins))];
    const auto mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    out.values.push_back(r.from_search(lo + (hi - lo) * (mode + 0.5) / bins));
  }
  return out;
}

AbcResult abc_rejection(const AbcProblem& problem, const RejectionSettings& settings, std::uint64_t seed) {
  if (settings.n_proposals < 50) throw ValidationError("abc_rejection needs at least 50 proposals");
  check_quantile(settings.accept_quantile);
  problem.prior.validate();

  Rng rng(derive_seed(seed, 0));
  std::vector<ParamVector> params;
  params.reserve(static_cast<std::size_t>(settings.n_proposals));
  for (int i = 0; i < settings.n_proposals; ++i) params.push_back(problem.prior.sample(rng));

  const auto stats = simulate_summaries(problem.config, params, derive_seed(seed, 1));
  ScaleVector scale = settings.scale ? *settings.scale : scale_from(stats);
  auto pool = score(problem, params, stats, scale, 0);
  return assemble(std::move(pool), problem.prior, settings.accept_quantile, settings.bins, std::move(scale));
}

AbcResult abc_exploit(const AbcProblem& problem, std::span<const ParamVector> seeds,
                      const ExploitSettings& settings, std::uint64_t seed, std::span<const Proposal> carried) {
  check_quantile(settings.accept_quantile);
  problem.prior.validate();
  if (seeds.empty()) throw ValidationError("exploit phase needs at least one seed");
  if (settings.n_exploit < 1) throw ValidationError("n_exploit must be positive");
  if (!settings.scale && settings.n_exploit < 10)
    throw ValidationError("n_exploit must be at least 10 when no scale is supplied");

  const int d = problem.prior.dimension();
  const auto& cov = settings.proposal_cov;
  if (cov.rows() != d || cov.cols() != d) throw ValidationError("proposal covariance has the wrong shape");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw ValidationError("proposal covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw ValidationError("proposal covariance is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();

  std::vector<Eigen::VectorXd> centres;
  for (const auto& s : seeds) {
    if (!problem.prior.contains(s)) throw ValidationError("exploit seed lies outside the prior ranges");
    const auto y = problem.prior.to_search(s);
    centres.emplace_back(Eigen::Map<const Eigen::VectorXd>(y.data(), d));
  }

  Rng rng(derive_seed(seed, 2));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ParamVector> params;
  params.reserve(static_cast<std::size_t>(settings.n_exploit));
  for (int i = 0; i < settings.n_exploit; ++i) {
    const auto& centre =
        centres[std::uniform_int_distribution<std::size_t>(0, centres.size() - 1)(rng)];
    Eigen::VectorXd y(d);
    bool inside = false;
    for (int attempt = 0; attempt < kMaxBoundRetries && !inside; ++attempt) {
      Eigen::VectorXd z(d);
      for (int j = 0; j < d; ++j) z(j) = normal(rng);
      y = centre + chol * z;
      inside = true;
      for (int j = 0; j < d; ++j) {
        const auto& r = problem.prior.ranges[static_cast<std::size_t>(j)];
        if (y(j) < r.search_lo() || y(j) > r.search_hi()) inside = false;
      }
    }
    params.push_back(problem.prior.clamp(problem.prior.from_search(std::span<const double>(y.data(), d))));
  }

  const auto stats = simulate_summaries(problem.config, params, derive_seed(seed, 3));
  ScaleVector scale = settings.scale ? *settings.scale : scale_from(stats);
  auto pool = score(problem, params, stats, scale, carried.size());
  pool.insert(pool.begin(), carried.begin(), carried.end());
  return assemble(std::move(pool), problem.prior, settings.accept_quantile, settings.bins, std::move(scale));
}

AbcResult abc_explore_exploit(const AbcProblem& problem, const ExploreExploitSettings& settings,
                              std::uint64_t seed) {
  if (settings.n_seeds < 1 || settings.n_seeds > settings.n_explore)
    throw ValidationError("n_seeds must lie in [1, n_explore]");
  check_quantile(settings.accept_quantile);

  RejectionSettings explore;
  explore.n_proposals = settings.n_explore;
  explore.accept_quantile = 1.0;
  explore.bins = settings.bins;
  explore.scale = settings.scale;
  const AbcResult explored = abc_rejection(problem, explore, derive_seed(seed, 10));

  std::vector<ParamVector> seeds;
  for (int i = 0; i < settings.n_seeds; ++i) seeds.push_back(explored.accepted[static_cast<std::size_t>(i)].params);

  ExploitSettings exploit;
  exploit.n_exploit = settings.n_exploit;
  exploit.accept_quantile = settings.accept_quantile;
  exploit.bins = settings.bins;
  exploit.proposal_cov = settings.proposal_cov ? *settings.proposal_cov : default_proposal_cov(problem.prior);
  exploit.scale = explored.scale;
  return abc_exploit(problem, seeds, exploit, derive_seed(seed, 11), explored.accepted);
}

}  // namespace elect
