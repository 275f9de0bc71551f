#ifndef GROUPER_ASSUMPTIONS_HPP
#define GROUPER_ASSUMPTIONS_HPP

#include <array>
#include <string>

namespace grouper {

// Makeham-law survival model (SUSM parameterization):
//   tpx = exp{ -A t - B/ln(c) c^x (c^t - 1) }
struct MortalityModel {
    double A = 0.00022;
    double B = 2.7e-7;
    double c = 1.124;
};

// t-year survival probability of a life aged x. Defined for real-valued
// ages, which the bound valuations of fractional model points rely on.
double survival_prob(const MortalityModel& m, double age, double t);

// One-year death probability 1 - survival_prob(m, age, 1).
double death_prob(const MortalityModel& m, double age);

// Retirement rates rr_x: zero below 60, tabulated for ages 60..66,
// retirement certain at 67 (the projections never query beyond 66).
struct RetirementTable {
    std::array<double, 7> rates = {0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};

    double rate(int age) const {
        if (age < 60) return 0.0;
        if (age > 66) return 1.0;
        return rates[static_cast<std::size_t>(age - 60)];
    }
};

struct ValuationAssumptions {
    MortalityModel mortality;
    RetirementTable retirement;
    double dc_fund_rate = 0.03; // expected annual fund performance

    void validate() const; // throws RangeError
};

// JSON document {A, B, c, rr: [...], i}; rr lists ages 60..66.
std::string assumptions_to_json(const ValuationAssumptions& a);
ValuationAssumptions assumptions_from_json(const std::string& text);
ValuationAssumptions load_assumptions(const std::string& path);

} // namespace grouper

#endif // GROUPER_ASSUMPTIONS_HPP
