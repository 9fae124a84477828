#include "elect/core.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "elect/errors.hpp"

namespace elect {

namespace {

constexpr double kSimplexTolerance = 1e-9;

void check_simplex(std::span<const double> theta) {
  if (theta.size() < 2) throw ValidationError("at least two parties are required");
  double sum = 0.0;
  for (double t : theta) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("vote shares must be finite and nonnegative");
    sum += t;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg << "vote shares sum to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
}

}  // namespace

void ElectionConfig::validate() const {
  if (districts <= 0) throw ValidationError("district count must be positive");
  if (electors <= 0) throw ValidationError("elector count must be positive");
  check_simplex(theta);
  if (static_cast<int>(capacities.size()) != districts) throw ValidationError("capacities length differs from S");
  if (budgets.size() != theta.size()) throw ValidationError("budgets length differs from K");
  Count cap_sum = 0;
  for (Count c : capacities) {
    if (c <= 0) throw ValidationError("district capacities must be positive");
    cap_sum += c;
  }
  Count budget_sum = 0;
  for (Count v : budgets) {
    if (v < 0) throw ValidationError("party budgets must be nonnegative");
    budget_sum += v;
  }
  if (cap_sum != electors) throw ValidationError("capacities do not sum to N");
  if (budget_sum != electors) throw ValidationError("budgets do not sum to N");
}

std::vector<Count> apportion(std::span<const double> theta, Count total) {
  if (total <= 0) throw ValidationError("apportion: N must be positive");
  check_simplex(theta);

  const std::size_t k = theta.size();
  std::vector<Count> out(k);
  std::vector<double> remainder(k);
  Count assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = theta[i] * static_cast<double>(total);
    out[i] = static_cast<Count>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  // floor() of a sum slightly above 1 can overshoot by one unit.
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t j = 0; assigned < total; j = (j + 1) % k) {
    ++out[order[j]];
    ++assigned;
  }
  return out;
}

std::vector<Count> uniform_capacities(Count electors, int districts) {
  if (districts <= 0) throw ValidationError("uniform_capacities: S must be positive");
  if (electors <= 0) throw ValidationError("uniform_capacities: N must be positive");
  if (districts > electors) throw ValidationError("uniform_capacities: more districts than electors");
  const Count base = electors / districts;
  const Count extra = electors % districts;
  std::vector<Count> out(static_cast<std::size_t>(districts), base);
  for (Count s = 0; s < extra; ++s) ++out[static_cast<std::size_t>(s)];
  return out;
}

ElectionConfig make_config(int districts, Count electors, std::vector<double> theta) {
  ElectionConfig config;
  config.districts = districts;
  config.electors = electors;
  config.capacities = uniform_capacities(electors, districts);
  config.budgets = apportion(theta, electors);
  config.theta = std::move(theta);
  config.validate();
  return config;
}

std::vector<double> with_residual_party(std::vector<double> theta) {
  const double sum = std::accumulate(theta.begin(), theta.end(), 0.0);
  if (sum > 1.0 + kSimplexTolerance) throw ValidationError("vote shares sum above 1");
  const double residual = 1.0 - sum;
  if (residual > kSimplexTolerance) theta.push_back(residual);
  return theta;
}

Count VoteMatrix::row_sum(int s) const {
  const auto r = row(s);
  return std::accumulate(r.begin(), r.end(), Count{0});
}

Count VoteMatrix::column_sum(int k) const {
  Count sum = 0;
  for (int s = 0; s < districts_; ++s) sum += at(s, k);
  return sum;
}

void VoteMatrix::check_against(const ElectionConfig& config) const {
  if (districts_ != config.districts || parties_ != config.parties())
    throw ValidationError("vote matrix shape does not match the election config");
  for (int s = 0; s < districts_; ++s) {
    for (int k = 0; k < parties_; ++k)
      if (at(s, k) < 0) throw ValidationError("negative vote count");
    if (row_sum(s) != config.capacities[static_cast<std::size_t>(s)]) {
      std::ostringstream msg;
      msg << "district " << s + 1 << " holds " << row_sum(s) << " votes, capacity is "
          << config.capacities[static_cast<std::size_t>(s)];
      throw ValidationError(msg.str());
    }
  }
  for (int k = 0; k < parties_; ++k) {
    if (column_sum(k) != config.budgets[static_cast<std::size_t>(k)]) {
      std::ostringstream msg;
      msg << "party " << k + 1 << " received " << column_sum(k) << " votes, budget is "
          << config.budgets[static_cast<std::size_t>(k)];
      throw ValidationError(msg.str());
    }
  }
}

ElectionOutcome tally(const VoteMatrix& votes, const ElectionConfig& config) {
  votes.check_against(config);
  ElectionOutcome out;
  out.winners.resize(static_cast<std::size_t>(votes.districts()));
  out.margins.resize(static_cast<std::size_t>(votes.districts()));
  out.seats.assign(static_cast<std::size_t>(votes.parties()), 0);
  for (int s = 0; s < votes.districts(); ++s) {
    const auto r = votes.row(s);
    // max_element returns the first maximum, which is the lowest index.
    const auto best = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
    out.winners[static_cast<std::size_t>(s)] = best;
    out.margins[static_cast<std::size_t>(s)] =
        static_cast<double>(r[static_cast<std::size_t>(best)]) /
        static_cast<double>(config.capacities[static_cast<std::size_t>(s)]);
    ++out.seats[static_cast<std::size_t>(best)];
  }
  return out;
}

ElectionConfig config_from_matrix(const VoteMatrix& votes) {
  ElectionConfig config;
  config.districts = votes.districts();
  for (int s = 0; s < votes.districts(); ++s) config.capacities.push_back(votes.row_sum(s));
  for (int k = 0; k < votes.parties(); ++k) config.budgets.push_back(votes.column_sum(k));
  config.electors = std::accumulate(config.capacities.begin(), config.capacities.end(), Count{0});
  if (config.electors <= 0) throw ValidationError("vote matrix holds no votes");
  for (Count v : config.budgets)
    config.theta.push_back(static_cast<double>(v) / static_cast<double>(config.electors));
  config.validate();
  return config;
}

void write_vote_csv(std::ostream& out, const VoteMatrix& votes) {
  out << "district";
  for (int k = 0; k < votes.parties(); ++k) out << ",party_" << k + 1;
  out << '\n';
  for (int s = 0; s < votes.districts(); ++s) {
    out << s + 1;
    for (Count c : votes.row(s)) out << ',' << c;
    out << '\n';
  }
}

VoteMatrix read_vote_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("vote CSV is empty");
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 3 || header[0] != "district") throw IoError("vote CSV header must be district,party_1,...,party_K");
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (header[k] != "party_" + std::to_string(k)) throw IoError("unexpected vote CSV column '" + header[k] + "'");
  }
  const int parties = static_cast<int>(header.size()) - 1;

  std::vector<std::vector<Count>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<Count> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      Count value = 0;
      try {
        value = std::stoll(cell, &used);
      } catch (const std::exception&) {
        throw IoError("non-integer vote CSV cell '" + cell + "'");
      }
      if (used != cell.size()) throw IoError("non-integer vote CSV cell '" + cell + "'");
      if (first) {
        if (value != static_cast<Count>(rows.size()) + 1) throw IoError("district ids must be 1..S in order");
        first = false;
      } else {
        row.push_back(value);
      }
    }
    if (static_cast<int>(row.size()) != parties) throw IoError("vote CSV row has the wrong number of columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("vote CSV has no districts");

  VoteMatrix votes(static_cast<int>(rows.size()), parties);
  for (int s = 0; s < votes.districts(); ++s)
    for (int k = 0; k < parties; ++k) {
      const Count c = rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
      if (c < 0) throw IoError("negative vote count in CSV");
      votes.at(s, k) = c;
    }
  return votes;
}

}  // namespace elect
