#ifndef GROUPER_PARALLEL_HPP
#define GROUPER_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace grouper {

// Process-wide worker cap (CLI --threads). 0 = hardware concurrency.
// Set once at startup; not synchronized.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0,n). Work is split into contiguous chunks, one
// per worker; fn must only write to slots owned by index i so results
// do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Sums vectors of equal length with a fixed pairwise reduction tree.
// The summation order is a function of terms.size() only, so results
// are identical no matter how the terms were produced.
std::vector<double> pairwise_sum(std::vector<std::vector<double>> terms);

} // namespace grouper

#endif // GROUPER_PARALLEL_HPP
