#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace elect {

using Count = std::int64_t;

// Fixed structure of a district-based election: S districts with capacities
// n_s, K parties with exact vote budgets v_k, and the vote-share simplex theta.
struct ElectionConfig {
  int districts = 0;               // S
  Count electors = 0;              // N
  std::vector<double> theta;       // K shares, sum 1
  std::vector<Count> capacities;   // n_s, sum N
  std::vector<Count> budgets;      // v_k, sum N

  int parties() const { return static_cast<int>(theta.size()); }

  // Throws ValidationError when any invariant is broken.
  void validate() const;
};

// Largest-remainder apportionment of N over the simplex theta. Ties in the
// fractional remainder go to the lower index.
std::vector<Count> apportion(std::span<const double> theta, Count total);

// Splits N electors into S districts of floor(N/S) or ceil(N/S); the larger
// districts come first.
std::vector<Count> uniform_capacities(Count electors, int districts);

// Builds a config with uniform capacities and apportioned budgets.
ElectionConfig make_config(int districts, Count electors, std::vector<double> theta);

// Appends a residual party so theta sums to one. No-op when the residual is
// below 1e-9; throws when the shares already exceed one by more than that.
std::vector<double> with_residual_party(std::vector<double> theta);

class VoteMatrix {
 public:
  VoteMatrix() = default;
  VoteMatrix(int districts, int parties)
      : districts_(districts), parties_(parties),
        counts_(static_cast<std::size_t>(districts) * parties, 0) {}

  int districts() const { return districts_; }
  int parties() const { return parties_; }

  Count& at(int s, int k) { return counts_[index(s, k)]; }
  Count at(int s, int k) const { return counts_[index(s, k)]; }

  std::span<const Count> row(int s) const {
    return {counts_.data() + static_cast<std::size_t>(s) * parties_,
            static_cast<std::size_t>(parties_)};
  }

  Count row_sum(int s) const;
  Count column_sum(int k) const;

  // Row sums must equal the capacities and column sums the budgets.
  void check_against(const ElectionConfig& config) const;

  bool operator==(const VoteMatrix&) const = default;

 private:
  std::size_t index(int s, int k) const {
    return static_cast<std::size_t>(s) * parties_ + static_cast<std::size_t>(k);
  }

  int districts_ = 0;
  int parties_ = 0;
  std::vector<Count> counts_;
};

struct ElectionOutcome {
  std::vector<int> winners;     // 0-based party index per district
  std::vector<double> margins;  // winner's vote fraction per district
  std::vector<int> seats;       // per party
};

// Plurality tally; ties go to the lowest party index.
ElectionOutcome tally(const VoteMatrix& votes, const ElectionConfig& config);

// Config implied by a complete district-level matrix: capacities are the row
// sums, budgets the column sums, theta = budgets / N.
ElectionConfig config_from_matrix(const VoteMatrix& votes);

// CSV with header `district,party_1,...,party_K`, one row per district.
void write_vote_csv(std::ostream& out, const VoteMatrix& votes);
VoteMatrix read_vote_csv(std::istream& in);

}  // namespace elect
