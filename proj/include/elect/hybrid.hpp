#pragma once

#include <cstdint>

#include "elect/abc.hpp"

namespace elect {

// Exploit-only ABC seeded by a single point estimate (typically a regressor
// prediction). The seed must lie inside the problem's prior.
AbcResult hybrid_estimate(const ParamVector& seed_params, const AbcProblem& problem, const ExploitSettings& settings,
                          std::uint64_t seed);

}  // namespace elect
