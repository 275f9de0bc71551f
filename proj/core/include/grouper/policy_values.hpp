#ifndef GROUPER_POLICY_VALUES_HPP
#define GROUPER_POLICY_VALUES_HPP

#include "grouper/assumptions.hpp"
#include "grouper/contracts.hpp"

#include <string>
#include <vector>

namespace grouper {

// Zero-padded policy-value path. Index t runs over the product line's
// fixed horizon; entries beyond the contract's remaining term are
// exactly zero.
using PolicyValuePath = std::vector<double>;

// Fixed path lengths: term life t = 0..40 (max duration 40), defined
// contribution t = 0..42 (= 67 - youngest age 25).
constexpr int path_length(ProductLine line) {
    return line == ProductLine::TermLife ? 41 : 43;
}

// Level annual premium (paid in advance) from the equivalence
// principle, computed at issue:
//   P = S * sum v^{t+1} tp q / sum v^t tp,  t = 0..n-1, v = 1/(1+i)
// Ages may be fractional (bound valuations re-derive the issue age from
// a rounded lapsed duration).
double tl_premium(const Contract& c, const MortalityModel& m);

// Term-life reserve recursion from issue (0V = 0):
//   (tV + P)(1+i) = q_{x0+t} S + p_{x0+t} (t+1)V
// The returned path slices out the lapsed prefix: Y_t = V_{t+x4} up to
// the remaining term, zero-padded to length 41.
PolicyValuePath tl_policy_values(const Contract& c, const ValuationAssumptions& a);

// Defined-contribution fund recursion, 0V = fund volume:
//   tV = [ (t-1)V + contrib * salary * (1+scale)^t ] (1+i)(1-rr) p
// with rr and the one-year survival taken at the attained age. Path of
// length 43, zero beyond retirement at 67.
PolicyValuePath dc_policy_values(const Contract& c, const ValuationAssumptions& a);

// Dispatch on product line.
PolicyValuePath policy_values(const Contract& c, const ValuationAssumptions& a);

// Aggregate path of a portfolio: sum of count * policy_values(contract).
// Identical contracts are valued once; entries are valued in parallel
// and combined with a fixed pairwise-summation tree, so results do not
// depend on the worker count.
PolicyValuePath value_portfolio(const Portfolio& p, const ValuationAssumptions& a);

// Exact valuation bounds for a (possibly fractional) model point.
// Term life: duration/lapsed duration are floored/ceiled against each
// other; DC: the current age is floored/ceiled. `clamped` is set when a
// rounded feature had to be pulled back into its bounds.
struct BoundedValuation {
    PolicyValuePath low;
    PolicyValuePath high;
    PolicyValuePath mid; // componentwise (low+high)/2
    bool clamped = false;
};

BoundedValuation bounds_for_model_point(const Contract& mp,
                                        const ValuationAssumptions& a);

// Path export CSV (`t,value`).
void write_path_csv(const std::string& path, const PolicyValuePath& y);

} // namespace grouper

#endif // GROUPER_POLICY_VALUES_HPP
