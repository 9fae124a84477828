#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "elect/errors.hpp"
#include "elect/generators.hpp"
#include "elect/summaries.hpp"

using namespace elect;

namespace {

SummaryStats two_by_two() {
  VoteMatrix v(2, 2);
  v.at(0, 0) = 60;
  v.at(0, 1) = 40;
  v.at(1, 0) = 30;
  v.at(1, 1) = 70;
  return summarize(v, config_from_matrix(v));
}

ScaleVector unit_scale(std::size_t n) { return ScaleVector{std::vector<double>(n, 1.0)}; }

}  // namespace

TEST_CASE("summary of a hand matrix") {
  const auto st = two_by_two();
  CHECK(st.seats == std::vector<double>{1, 1});
  CHECK(st.mean_frac[0] == doctest::Approx(0.45));
  CHECK(st.mean_frac[1] == doctest::Approx(0.55));
  CHECK(st.std_frac[0] == doctest::Approx(0.15));  // population std of (0.6, 0.3)
  CHECK(st.margin_mean == doctest::Approx(0.65));
  CHECK(st.margin_std == doctest::Approx(0.05));
  // Per-district spread across parties, sorted descending: (0.2, 0.1).
  CHECK(st.district_spread[0] == doctest::Approx(0.2));
  CHECK(st.district_spread[1] == doctest::Approx(0.1));
  CHECK(st.dimension() == 3 * 2 + 2 + 2);
  CHECK(st.flatten().size() == st.dimension());
  CHECK(std::all_of(st.mask.begin(), st.mask.end(), [](bool b) { return b; }));
}

TEST_CASE("identical rows have no spread across districts") {
  VoteMatrix v(4, 3);
  for (int s = 0; s < 4; ++s) {
    v.at(s, 0) = 50;
    v.at(s, 1) = 30;
    v.at(s, 2) = 20;
  }
  const auto st = summarize(v, config_from_matrix(v));
  for (double x : st.std_frac) CHECK(x == doctest::Approx(0.0));
  for (double x : st.district_spread) CHECK(x == doctest::Approx(st.district_spread[0]));
}

TEST_CASE("scale estimation") {
  std::vector<SummaryStats> same(10, two_by_two());
  for (double x : estimate_scale(same).values) CHECK(x == ScaleVector::kScaleFloor);

  // Five at 1 and five at 3: sample variance 10 / 9.
  std::vector<SummaryStats> split(10, two_by_two());
  for (std::size_t i = 5; i < 10; ++i) split[i].seats[0] += 2.0;
  CHECK(estimate_scale(split).values[0] == doctest::Approx(std::sqrt(10.0 / 9.0)));

  // Deviations (-1, +1, 0 x 8): sample variance 2 / 9.
  std::vector<SummaryStats> pair(10, two_by_two());
  pair[0].margin_std -= 1.0;
  pair[1].margin_std += 1.0;
  CHECK(estimate_scale(pair).values.back() == doctest::Approx(std::sqrt(2.0 / 9.0)));

  CHECK_THROWS_AS(estimate_scale(std::vector<SummaryStats>(9, two_by_two())), ValidationError);
}

TEST_CASE("scale on a mixed DPM pool") {
  const auto config = make_config(20, 4000, {0.6, 0.4});
  std::vector<SummaryStats> pool;
  for (int i = 0; i < 200; ++i)
    pool.push_back(summarize(simulate_dpm(config, DpmParams{{0.01 + 0.98 * (i % 50) / 49.0}}, i), config));
  const auto scale = estimate_scale(pool).values;
  // Vote fractions are fixed by the party budgets, so only their scale hits the floor.
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (i == 2 || i == 3)
      CHECK(scale[i] == ScaleVector::kScaleFloor);
    else
      CHECK(scale[i] > ScaleVector::kScaleFloor);
  }
}

TEST_CASE("distance definition") {
  const auto a = aggregate_stats({1, 2}, 0.5, 0.1, 3);  // 4 unmasked components
  auto b = a;
  ScaleVector scale = unit_scale(a.dimension());
  scale.values[1] = 4.0;
  b.seats[1] += 4.0;
  CHECK(distance(a, b, scale) == doctest::Approx(0.5));
  CHECK(distance(b, a, scale) == doctest::Approx(0.5));
  CHECK(distance(a, a, scale) == 0.0);
  // Masked components do not count.
  b = a;
  b.mean_frac[0] = 100.0;
  CHECK(distance(a, b, scale) == 0.0);
}

TEST_CASE("distance errors") {
  const auto a = two_by_two();
  auto b = a;
  std::fill(b.mask.begin(), b.mask.end(), false);
  CHECK_THROWS_AS(distance(a, b, unit_scale(a.dimension())), ValidationError);
  CHECK_THROWS_AS(distance(a, a, unit_scale(3)), ValidationError);
}

TEST_CASE("aggregate observations unmask seats and margins") {
  const auto st = aggregate_stats({28, 34, 8, 0}, 0.39, 0.06, 70);
  CHECK(st.dimension() == 3 * 4 + 70 + 2);
  CHECK(std::count(st.mask.begin(), st.mask.end(), true) == 6);
}

TEST_CASE("summary JSON round trip") {
  const auto st = two_by_two();
  CHECK(summary_from_json(to_json(st)) == st);
  const auto agg = aggregate_stats({1, 2}, 0.5, 0.1, 3);
  CHECK(summary_from_json(to_json(agg)) == agg);
}
