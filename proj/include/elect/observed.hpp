#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "elect/core.hpp"
#include "elect/summaries.hpp"

namespace elect {

enum class ObservedFormat { Csv, Aggregate };
ObservedFormat parse_format(std::string_view name);  // "csv" | "aggregate"

// A real or synthetic election to fit against. θ already includes the
// residual "Others" share when the source listed only the top parties.
struct ObservedElection {
  std::string name;
  std::vector<std::string> party_names;
  ElectionConfig config;
  std::optional<VoteMatrix> votes;  // present for district-level input
  SummaryStats stats;               // masked for aggregate input
};

// Aggregate JSON record:
//   {"name": "...", "districts": 70, "electors": 9000000,
//    "parties": ["A", "B", "C"], "theta": [...], "seats": [...],
//    "mwm": 0.39, "swm": 0.06}
// mwm and swm may be null or absent, which masks them. Seats are listed for
// the named parties and must sum to S; an appended Others party gets 0 seats.
// `scale` multiplies the elector count (district-level input ignores it).
ObservedElection ingest_observed(const std::filesystem::path& path, ObservedFormat format, double scale = 1.0);
ObservedElection observed_from_json(const nlohmann::json& record, double scale = 1.0);

nlohmann::json to_json(const ObservedElection& observed);

}  // namespace elect
