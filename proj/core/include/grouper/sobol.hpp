#ifndef GROUPER_SOBOL_HPP
#define GROUPER_SOBOL_HPP

#include <cstdint>
#include <vector>

namespace grouper {

constexpr int kSobolMaxDim = 8;

// Points `skip .. skip+n-1` of the standard direction-number Sobol
// sequence (Gray-code order, index 0 is the all-zeros point), returned
// row-major as n rows of `dim` coordinates in [0,1).
//
// Deterministic for fixed (dim, n, skip). Throws RangeError for
// dim outside [1, kSobolMaxDim] or n < 1.
std::vector<std::vector<double>> sobol_points(int dim, std::int64_t n,
                                              std::int64_t skip = 0);

} // namespace grouper

#endif // GROUPER_SOBOL_HPP
