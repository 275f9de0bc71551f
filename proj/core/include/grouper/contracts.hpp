#ifndef GROUPER_CONTRACTS_HPP
#define GROUPER_CONTRACTS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace grouper {

enum class ProductLine { TermLife, DCPlan };

std::string to_string(ProductLine line);
ProductLine product_line_from_string(const std::string& tag);

// Closed feature range in raw units. Scaling to the network cube
// [-1,1]^5 is an affine map per feature over [lower, upper].
struct FeatureSpec {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    bool integer_valued = false;
    std::string unit;
};

// Feature layout, in order x1..x5:
//   TermLife: current age, sum insured, duration, lapsed duration, interest rate
//   DCPlan:   current age, fund volume, salary, salary scale, contribution rate
const std::array<FeatureSpec, 5>& feature_specs(ProductLine line);

// Feature indices, shared across both product lines where meaningful.
inline constexpr int kAge = 0;
inline constexpr int kSumInsured = 1; // TermLife
inline constexpr int kDuration = 2;   // TermLife
inline constexpr int kLapsed = 3;     // TermLife
inline constexpr int kInterest = 4;   // TermLife
inline constexpr int kFund = 1;       // DCPlan
inline constexpr int kSalary = 2;     // DCPlan
inline constexpr int kSalaryScale = 3; // DCPlan
inline constexpr int kContribution = 4; // DCPlan

struct Contract {
    ProductLine line = ProductLine::TermLife;
    std::array<double, 5> x{}; // raw feature units

    double issue_age() const { return x[kAge] - x[kLapsed]; } // TermLife only
};

// Throws RangeError if the contract violates its invariants. With
// allow_fractional, integrality (and the integer-only derived checks)
// are skipped; bounds still apply. Model points from the optimizer are
// fractional by construction.
void validate_contract(const Contract& c, bool allow_fractional = false);

struct PortfolioEntry {
    Contract contract;
    std::int64_t count = 1;
};

struct Portfolio {
    ProductLine line = ProductLine::TermLife;
    std::vector<PortfolioEntry> entries;

    std::int64_t total_count() const;
};

void validate_portfolio(const Portfolio& p, bool allow_fractional = false);

// z_i = 2 (x_i - lower_i) / (upper_i - lower_i) - 1, per feature.
// Throws RangeError when a feature is outside its spec bounds.
std::array<double, 5> scale_to_unit(const Contract& c);

// Exact affine inverse; performs no integer rounding (rounding is an
// explicit, separate step where integrality is needed).
Contract unscale(ProductLine line, const std::array<double, 5>& z);

} // namespace grouper

#endif // GROUPER_CONTRACTS_HPP
