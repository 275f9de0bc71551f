#ifndef GROUPER_SYNTH_HPP
#define GROUPER_SYNTH_HPP

#include "grouper/contracts.hpp"

#include <cstdint>

namespace grouper {

// Quasi-random portfolio synthesis from a 5-dimensional Sobol sequence.
// `skip` is the Sobol start index; the default skips the all-zeros
// point, which would map to a degenerate all-lower-bound contract.
// Each synthesized entry has count 1; aggregating identical contracts
// is left to consumers.

// Term life: issue age uniform {25..67}, duration {2..40}, sum insured
// [1e3,1e6], interest [-0.01,0.04]; lapsed duration is a uniform
// fraction of duration-1, so contracts never mature at synthesis;
// current age = issue age + lapsed duration.
Portfolio synth_term_life(std::int64_t n, std::int64_t skip = 1);

// Defined contribution: age uniform {25..60}, fund [0,2e5], salary
// [2e4,2e5], salary scale [0.01,0.05], contribution [0.01,0.1].
Portfolio synth_dc(std::int64_t n, std::int64_t skip = 1);

} // namespace grouper

#endif // GROUPER_SYNTH_HPP
