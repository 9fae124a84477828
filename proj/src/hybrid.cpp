#include "elect/hybrid.hpp"

#include "elect/errors.hpp"

namespace elect {

AbcResult hybrid_estimate(const ParamVector& seed_params, const AbcProblem& problem, const ExploitSettings& settings,
                          std::uint64_t seed) {
  if (seed_params.model != problem.prior.model) throw ValidationError("hybrid seed belongs to a different model");
  if (!problem.prior.contains(seed_params)) throw ValidationError("hybrid seed lies outside the prior");
  const ParamVector seeds[] = {seed_params};
  return abc_exploit(problem, seeds, settings, seed);
}

}  // namespace elect
