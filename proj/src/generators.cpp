#include "elect/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "elect/errors.hpp"
#include "elect/rng.hpp"

namespace elect {

namespace {

std::vector<double> broadcast(const std::vector<double>& values, int districts, const char* name) {
  if (values.size() == 1) return std::vector<double>(static_cast<std::size_t>(districts), values[0]);
  if (static_cast<int>(values.size()) != districts)
    throw ValidationError(std::string(name) + " must have 1 or S entries");
  return values;
}

// Uniform choice over parties that still have budget. Used when every
// model weight vanishes.
int any_party_with_budget(const std::vector<Count>& placed, const std::vector<Count>& budgets, Rng& rng) {
  std::vector<double> w(budgets.size());
  double total = 0.0;
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    w[k] = placed[k] < budgets[k] ? 1.0 : 0.0;
    total += w[k];
  }
  return static_cast<int>(sample_weighted(w, total, rng));
}

// Districts still accepting electors, in index order. Each call to next_round
// drops the districts that filled up during the previous round.
class RoundRobin {
 public:
  explicit RoundRobin(const ElectionConfig& config) : capacities_(config.capacities) {
    for (int s = 0; s < config.districts; ++s) active_.push_back(s);
    filled_.assign(capacities_.size(), 0);
  }

  bool next_round() {
    std::erase_if(active_, [&](int s) {
      return filled_[static_cast<std::size_t>(s)] >= capacities_[static_cast<std::size_t>(s)];
    });
    return !active_.empty();
  }

  const std::vector<int>& active() const { return active_; }
  Count& filled(int s) { return filled_[static_cast<std::size_t>(s)]; }

 private:
  std::vector<Count> capacities_;
  std::vector<Count> filled_;
  std::vector<int> active_;
};

// Fenwick tree over district vote counts of a single party.
class Fenwick {
 public:
  explicit Fenwick(int size) : tree_(static_cast<std::size_t>(size) + 1, 0) {
    top_bit_ = 1;
    while (top_bit_ * 2 <= size) top_bit_ *= 2;
  }

  void add(int pos, Count delta) {
    total_ += delta;
    for (std::size_t i = static_cast<std::size_t>(pos) + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }

  Count total() const { return total_; }

  // Smallest position whose inclusive prefix sum exceeds target (0 <= target < total).
  int find(Count target) const {
    std::size_t pos = 0;
    for (std::size_t step = static_cast<std::size_t>(top_bit_); step > 0; step >>= 1) {
      const std::size_t next = pos + step;
      if (next < tree_.size() && tree_[next] <= target) {
        pos = next;
        target -= tree_[next];
      }
    }
    return static_cast<int>(pos);
  }

 private:
  std::vector<Count> tree_;
  Count total_ = 0;
  int top_bit_ = 1;
};

}  // namespace

std::string_view to_string(ModelTag model) {
  switch (model) {
    case ModelTag::Dpm: return "dpm";
    case ModelTag::Ecm: return "ecm";
    case ModelTag::Pcm: return "pcm";
  }
  return "?";
}

ModelTag parse_model(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "dpm") return ModelTag::Dpm;
  if (lower == "ecm") return ModelTag::Ecm;
  if (lower == "pcm") return ModelTag::Pcm;
  throw ValidationError("unknown model '" + std::string(name) + "' (expected dpm, ecm or pcm)");
}

int param_count(ModelTag model, int parties) {
  switch (model) {
    case ModelTag::Dpm: return 1;
    case ModelTag::Ecm: return 2;
    case ModelTag::Pcm: return parties;
  }
  return 0;
}

std::vector<std::string> param_names(ModelTag model, int parties) {
  switch (model) {
    case ModelTag::Dpm: return {"gamma"};
    case ModelTag::Ecm: return {"alpha", "beta"};
    case ModelTag::Pcm: {
      std::vector<std::string> names;
      for (int k = 0; k < parties; ++k) names.push_back("eta_" + std::to_string(k + 1));
      return names;
    }
  }
  return {};
}

void validate(const DpmParams& params, const ElectionConfig& config) {
  for (double g : broadcast(params.gamma, config.districts, "gamma"))
    if (!(g >= 0.0 && g < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
}

void validate(const EcmParams& params, const ElectionConfig& config) {
  for (double a : broadcast(params.alpha, config.districts, "alpha"))
    if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("alpha must be positive");
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) throw ValidationError("beta must be positive");
  if (params.rule == EcmDishRule::Mixture && params.beta > 1.0)
    throw ValidationError("beta must not exceed 1 under the mixture dish rule");
}

void validate(const PcmParams& params, const ElectionConfig& config) {
  if (static_cast<int>(params.eta.size()) != config.parties()) throw ValidationError("eta must have K entries");
  for (double e : params.eta)
    if (!(e >= 0.0 && e < 1.0)) throw ValidationError("eta must lie in [0, 1)");
}

VoteMatrix simulate_dpm(const ElectionConfig& config, const DpmParams& params, std::uint64_t seed) {
  config.validate();
  validate(params, config);
  const auto gamma = broadcast(params.gamma, config.districts, "gamma");
  const int K = config.parties();

  Rng rng(seed);
  VoteMatrix votes(config.districts, K);
  std::vector<Count> placed(static_cast<std::size_t>(K), 0);
  std::vector<double> w(static_cast<std::size_t>(K));

  RoundRobin order(config);
  while (order.next_round()) {
    for (int s : order.active()) {
      Count& seen = order.filled(s);
      const double g = gamma[static_cast<std::size_t>(s)];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (placed[ku] >= config.budgets[ku]) {
          w[ku] = 0.0;
          continue;
        }
        const double local = seen > 0 ? static_cast<double>(votes.at(s, k)) / static_cast<double>(seen) : 0.0;
        w[ku] = g * local + (1.0 - g) * config.theta[ku];
        total += w[ku];
      }
      const int k = total > 0.0 ? static_cast<int>(sample_weighted(w, total, rng))
                                : any_party_with_budget(placed, config.budgets, rng);
      ++votes.at(s, k);
      ++placed[static_cast<std::size_t>(k)];
      ++seen;
    }
  }
  return votes;
}

VoteMatrix simulate_ecm(const ElectionConfig& config, const EcmParams& params, std::uint64_t seed) {
  config.validate();
  validate(params, config);
  const auto alpha = broadcast(params.alpha, config.districts, "alpha");
  const int K = config.parties();

  Rng rng(seed);
  VoteMatrix votes(config.districts, K);
  std::vector<Count> placed(static_cast<std::size_t>(K), 0);
  std::vector<double> tables_per_party(static_cast<std::size_t>(K), 0.0);  // t_k
  std::vector<double> party_w(static_cast<std::size_t>(K));

  // Communities: size and party, grouped per district.
  std::vector<Count> table_size;
  std::vector<int> table_party;
  std::vector<std::vector<int>> district_tables(static_cast<std::size_t>(config.districts));

  auto is_open = [&](int table) {
    const auto k = static_cast<std::size_t>(table_party[static_cast<std::size_t>(table)]);
    return placed[k] < config.budgets[k];
  };

  RoundRobin order(config);
  while (order.next_round()) {
    for (int s : order.active()) {
      const auto su = static_cast<std::size_t>(s);
      const auto& tables = district_tables[su];

      double seated = 0.0;
      for (int t : tables)
        if (is_open(t)) seated += static_cast<double>(table_size[static_cast<std::size_t>(t)]);

      int chosen = -1;
      const double u = uniform01(rng) * (seated + alpha[su]);
      if (u < seated) {
        double acc = 0.0;
        for (int t : tables) {
          if (!is_open(t)) continue;
          acc += static_cast<double>(table_size[static_cast<std::size_t>(t)]);
          chosen = t;
          if (u < acc) break;
        }
      }

      if (chosen < 0) {
        double total = 0.0;
        const auto opened = static_cast<double>(table_size.size());
        for (int k = 0; k < K; ++k) {
          const auto ku = static_cast<std::size_t>(k);
          double w = 0.0;
          if (placed[ku] < config.budgets[ku]) {
            if (params.rule == EcmDishRule::Counts) {
              w = tables_per_party[ku] + params.beta * config.theta[ku];
            } else {
              const double popularity = opened > 0.0 ? tables_per_party[ku] / opened : 0.0;
              w = params.beta * popularity + (1.0 - params.beta) * config.theta[ku];
            }
          }
          party_w[ku] = w;
          total += w;
        }
        const int k = total > 0.0 ? static_cast<int>(sample_weighted(party_w, total, rng))
                                  : any_party_with_budget(placed, config.budgets, rng);
        chosen = static_cast<int>(table_size.size());
        table_size.push_back(0);
        table_party.push_back(k);
        district_tables[su].push_back(chosen);
        tables_per_party[static_cast<std::size_t>(k)] += 1.0;
      }

      const auto cu = static_cast<std::size_t>(chosen);
      ++table_size[cu];
      const int k = table_party[cu];
      ++votes.at(s, k);
      ++placed[static_cast<std::size_t>(k)];
      ++order.filled(s);
    }
  }
  return votes;
}

VoteMatrix simulate_pcm(const ElectionConfig& config, const PcmParams& params, std::uint64_t seed) {
  config.validate();
  validate(params, config);
  const int K = config.parties();
  const int S = config.districts;

  Rng rng(seed);
  VoteMatrix votes(S, K);
  std::vector<Count> placed(static_cast<std::size_t>(K), 0);
  std::vector<Count> load(static_cast<std::size_t>(S), 0);
  std::vector<double> party_w(static_cast<std::size_t>(K));

  // Per-party vote counts restricted to open districts, so the count term of
  // the district weight can be sampled in O(log S).
  std::vector<Fenwick> open_votes(static_cast<std::size_t>(K), Fenwick(S));
  std::vector<int> open(static_cast<std::size_t>(S));
  std::vector<int> slot(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) open[static_cast<std::size_t>(s)] = slot[static_cast<std::size_t>(s)] = s;

  for (Count i = 0; i < config.electors; ++i) {
    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      party_w[ku] = placed[ku] < config.budgets[ku] ? config.theta[ku] : 0.0;
      total += party_w[ku];
    }
    const int k = total > 0.0 ? static_cast<int>(sample_weighted(party_w, total, rng))
                              : any_party_with_budget(placed, config.budgets, rng);
    const auto ku = static_cast<std::size_t>(k);
    const double eta = params.eta[ku];

    // Weight of the concentration term summed over open districts, and of the
    // uniform term summed over open districts.
    const Count local = open_votes[ku].total();
    const double concentrated =
        placed[ku] > 0 ? eta * static_cast<double>(local) / static_cast<double>(placed[ku]) : 0.0;
    const double spread = (1.0 - eta) * static_cast<double>(open.size()) / static_cast<double>(S);

    const double u = uniform01(rng);
    int s;
    if (concentrated + spread <= 0.0) {
      s = open[std::min(open.size() - 1, static_cast<std::size_t>(u * static_cast<double>(open.size())))];
    } else {
      const double x = u * (concentrated + spread);
      if (x < concentrated && local > 0) {
        auto target = static_cast<Count>(x / concentrated * static_cast<double>(local));
        target = std::min(target, local - 1);
        s = open_votes[ku].find(target);
      } else {
        const double frac = spread > 0.0 ? (x - concentrated) / spread : u;
        const auto idx = static_cast<std::size_t>(std::max(0.0, frac) * static_cast<double>(open.size()));
        s = open[std::min(idx, open.size() - 1)];
      }
    }

    const auto su = static_cast<std::size_t>(s);
    ++votes.at(s, k);
    ++placed[ku];
    ++load[su];
    open_votes[ku].add(s, 1);

    if (load[su] == config.capacities[su]) {
      for (int p = 0; p < K; ++p) open_votes[static_cast<std::size_t>(p)].add(s, -votes.at(s, p));
      const int moved = open.back();
      open[static_cast<std::size_t>(slot[su])] = moved;
      slot[static_cast<std::size_t>(moved)] = slot[su];
      open.pop_back();
    }
  }
  return votes;
}

VoteMatrix simulate(const ElectionConfig& config, const ParamVector& params, std::uint64_t seed) {
  const int expected = param_count(params.model, config.parties());
  if (static_cast<int>(params.values.size()) != expected)
    throw ValidationError("parameter vector for " + std::string(to_string(params.model)) + " needs " +
                          std::to_string(expected) + " values");
  switch (params.model) {
    case ModelTag::Dpm: return simulate_dpm(config, DpmParams{{params.values[0]}}, seed);
    case ModelTag::Ecm: return simulate_ecm(config, EcmParams{{params.values[0]}, params.values[1]}, seed);
    case ModelTag::Pcm: return simulate_pcm(config, PcmParams{params.values}, seed);
  }
  throw ValidationError("unknown model");
}

}  // namespace elect
