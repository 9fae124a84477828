#include "elect/observed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "elect/errors.hpp"

namespace elect {

ObservedFormat parse_format(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "csv") return ObservedFormat::Csv;
  if (lower == "aggregate" || lower == "json") return ObservedFormat::Aggregate;
  throw ValidationError("unknown observation format '" + std::string(name) + "' (expected csv or aggregate)");
}

ObservedElection observed_from_json(const nlohmann::json& record, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ValidationError("scale must lie in (0, 1]");
  ObservedElection obs;
  std::vector<double> theta;
  std::vector<double> seats;
  std::optional<double> mwm, swm;
  double electors = 0.0;
  try {
    obs.name = record.value("name", std::string("observed"));
    obs.config.districts = record.at("districts").get<int>();
    electors = record.at("electors").get<double>();
    theta = record.at("theta").get<std::vector<double>>();
    obs.party_names = record.value("parties", std::vector<std::string>{});
    seats = record.at("seats").get<std::vector<double>>();
    if (record.contains("mwm") && !record["mwm"].is_null()) mwm = record["mwm"].get<double>();
    if (record.contains("swm") && !record["swm"].is_null()) swm = record["swm"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed aggregate record: ") + e.what());
  }
  const int S = obs.config.districts;
  if (S < 1) throw ValidationError("districts must be positive");
  if (obs.party_names.empty())
    for (std::size_t k = 0; k < theta.size(); ++k) obs.party_names.push_back(std::string(1, static_cast<char>('A' + k)));
  if (obs.party_names.size() != theta.size()) throw ValidationError("party names and theta differ in length");
  if (seats.size() != theta.size()) throw ValidationError("seats and theta differ in length");
  for (double s : seats)
    if (s < 0.0 || s != std::floor(s)) throw ValidationError("seat counts must be nonnegative integers");
  if (std::accumulate(seats.begin(), seats.end(), 0.0) != static_cast<double>(S))
    throw ValidationError("seats do not sum to the number of districts");

  const std::size_t listed = theta.size();
  obs.config.theta = with_residual_party(std::move(theta));
  if (obs.config.theta.size() > listed) {
    obs.party_names.push_back("Others");
    seats.push_back(0.0);
  }
  obs.config.electors = static_cast<Count>(std::llround(electors * scale));
  if (obs.config.electors < S) throw ValidationError("scaled electorate is smaller than the district count");
  obs.config = make_config(S, obs.config.electors, std::move(obs.config.theta));

  obs.stats = aggregate_stats(std::move(seats), mwm.value_or(0.0), swm.value_or(0.0), S);
  const std::size_t dim = obs.stats.dimension();
  obs.stats.mask[dim - 2] = mwm.has_value();
  obs.stats.mask[dim - 1] = swm.has_value();
  return obs;
}

ObservedElection ingest_observed(const std::filesystem::path& path, ObservedFormat format, double scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  if (format == ObservedFormat::Aggregate) {
    nlohmann::json record;
    try {
      in >> record;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return observed_from_json(record, scale);
  }
  ObservedElection obs;
  obs.name = path.stem().string();
  VoteMatrix votes = read_vote_csv(in);
  obs.config = config_from_matrix(votes);
  for (int k = 0; k < votes.parties(); ++k) obs.party_names.push_back("party_" + std::to_string(k + 1));
  obs.stats = summarize(votes, obs.config);
  obs.votes = std::move(votes);
  return obs;
}

nlohmann::json to_json(const ObservedElection& observed) {
  return {{"name", observed.name},
          {"parties", observed.party_names},
          {"districts", observed.config.districts},
          {"electors", observed.config.electors},
          {"theta", observed.config.theta},
          {"district_level", observed.votes.has_value()},
          {"summary", to_json(observed.stats)}};
}

}  // namespace elect
