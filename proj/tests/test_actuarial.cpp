#include "grouper/assumptions.hpp"
#include "grouper/errors.hpp"
#include "grouper/policy_values.hpp"
#include "grouper/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace grouper;

namespace {

Contract tl_contract(double age, double sum, double dur, double lapsed, double rate) {
    return Contract{ProductLine::TermLife, {age, sum, dur, lapsed, rate}};
}

Contract dc_contract(double age, double fund, double salary, double scale, double contrib) {
    return Contract{ProductLine::DCPlan, {age, fund, salary, scale, contrib}};
}

} // namespace

TEST_SUITE("actuarial") {

TEST_CASE("survival probability matches the closed form") {
    const MortalityModel m;
    CHECK(survival_prob(m, 25.0, 0.0) == doctest::Approx(1.0).epsilon(0));
    CHECK(survival_prob(m, 70.0, 0.0) == doctest::Approx(1.0).epsilon(0));
    // High-precision evaluation of the SUSM exponent, frozen externally.
    CHECK(survival_prob(m, 25.0, 1.0) == doctest::Approx(0.999774702439).epsilon(1e-10));
    CHECK(survival_prob(m, 40.0, 2.0) < survival_prob(m, 40.0, 1.0));
}

TEST_CASE("survival probabilities obey the semigroup law") {
    const MortalityModel m;
    for (double x : {25.0, 40.0, 63.5, 80.0})
        for (double t : {1.0, 2.0, 7.5})
            for (double s : {1.0, 3.25, 10.0}) {
                const double joint = survival_prob(m, x, t + s);
                const double chained = survival_prob(m, x, t) * survival_prob(m, x + t, s);
                CHECK(std::abs(joint - chained) / joint < 1e-12);
            }
}

TEST_CASE("single-year cover at zero interest prices the death probability") {
    const MortalityModel m;
    const Contract c = tl_contract(40.0, 1e5, 1.0, 0.0, 0.0);
    // duration below table minimum; build premium directly
    CHECK(tl_premium(c, m) == doctest::Approx(1e5 * death_prob(m, 40.0)).epsilon(1e-12));
}

TEST_CASE("constant hazard and zero interest make the premium age-free") {
    MortalityModel m;
    m.B = 0.0; // pure exponential survival
    const double expected = 5e5 * (1.0 - std::exp(-m.A));
    for (double age : {30.0, 45.0, 60.0})
        for (double dur : {5.0, 20.0, 40.0}) {
            const Contract c = tl_contract(age, 5e5, dur, 0.0, 0.0);
            CHECK(tl_premium(c, m) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("terminal reserve vanishes under the equivalence premium") {
    const ValuationAssumptions a;
    const Portfolio p = synth_term_life(2000, 1);
    for (const auto& e : p.entries) {
        const auto y = tl_policy_values(e.contract, a);
        const auto n = static_cast<std::size_t>(std::lround(e.contract.x[kDuration]));
        const auto lapsed = static_cast<std::size_t>(std::lround(e.contract.x[kLapsed]));
        CHECK(std::abs(y[n - lapsed]) <= 1e-8 * e.contract.x[kSumInsured]);
    }
}

TEST_CASE("fresh contracts start at zero reserve and pad with zeros") {
    const ValuationAssumptions a;
    const Contract c = tl_contract(40.0, 2e5, 10.0, 0.0, 0.01);
    const auto y = tl_policy_values(c, a);
    REQUIRE(y.size() == 41);
    CHECK(y[0] == 0.0);
    for (std::size_t t = 11; t < y.size(); ++t) CHECK(y[t] == 0.0);
    // interior reserves of a level-premium term contract are positive
    for (std::size_t t = 1; t < 10; ++t) CHECK(y[t] > 0.0);
}

TEST_CASE("lapsed prefix is sliced out") {
    const ValuationAssumptions a;
    const Contract fresh = tl_contract(40.0, 2e5, 10.0, 0.0, 0.01);
    const Contract mid = tl_contract(44.0, 2e5, 10.0, 4.0, 0.01);
    const auto yf = tl_policy_values(fresh, a);
    const auto ym = tl_policy_values(mid, a);
    for (std::size_t t = 0; t + 4 <= 10; ++t)
        CHECK(ym[t] == doctest::Approx(yf[t + 4]).epsilon(1e-12));
}

TEST_CASE("DC path starts at the fund volume") {
    const ValuationAssumptions a;
    const Contract c = dc_contract(40.0, 1.5e5, 8e4, 0.03, 0.05);
    const auto y = dc_policy_values(c, a);
    REQUIRE(y.size() == 43);
    CHECK(y[0] == 1.5e5);
    for (std::size_t t = 28; t < y.size(); ++t) CHECK(y[t] == 0.0); // 67-40 = 27
}

TEST_CASE("one projection step expands as expected") {
    const ValuationAssumptions a;
    const Contract c = dc_contract(40.0, 1.5e5, 8e4, 0.03, 0.05);
    const auto y = dc_policy_values(c, a);
    const double p40 = survival_prob(a.mortality, 40.0, 1.0);
    const double expected = (1.5e5 + 0.05 * 8e4 * 1.03) * 1.03 * p40;
    CHECK(y[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("retirement decimates the fund from age 60") {
    const ValuationAssumptions a;
    const Contract c = dc_contract(60.0, 1e5, 5e4, 0.02, 0.05);
    const auto y = dc_policy_values(c, a);
    const double p60 = survival_prob(a.mortality, 60.0, 1.0);
    const double expected = (1e5 + 0.05 * 5e4 * 1.02) * 1.03 * (1.0 - 0.3) * p60;
    CHECK(y[1] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("DC recursion equals the closed-form expansion") {
    const ValuationAssumptions a;
    const Portfolio p = synth_dc(500, 1);
    for (const auto& e : p.entries) {
        const auto fast = dc_policy_values(e.contract, a);
        const auto slow = oracles::dc_closed_form(e.contract, a);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t t = 0; t < fast.size(); ++t) {
            const double denom = std::max({std::abs(slow[t]), std::abs(fast[t]), 1.0});
            CHECK(std::abs(fast[t] - slow[t]) / denom < 1e-10);
        }
    }
}

TEST_CASE("portfolio valuation is linear in counts") {
    const ValuationAssumptions a;
    Portfolio p;
    p.line = ProductLine::TermLife;
    const Contract c1 = tl_contract(40.0, 2e5, 10.0, 0.0, 0.01);
    const Contract c2 = tl_contract(55.0, 7e5, 25.0, 5.0, 0.03);

    p.entries = {{c1, 1}};
    const auto single = value_portfolio(p, a);
    const auto direct = tl_policy_values(c1, a);
    for (std::size_t t = 0; t < single.size(); ++t) CHECK(single[t] == direct[t]);

    Portfolio dup;
    dup.line = p.line;
    dup.entries = {{c1, 1}, {c1, 1}};
    Portfolio merged;
    merged.line = p.line;
    merged.entries = {{c1, 2}};
    const auto ydup = value_portfolio(dup, a);
    const auto ymerged = value_portfolio(merged, a);
    for (std::size_t t = 0; t < ydup.size(); ++t) CHECK(ydup[t] == ymerged[t]);

    Portfolio both;
    both.line = p.line;
    both.entries = {{c1, 3}, {c2, 2}};
    Portfolio only2;
    only2.line = p.line;
    only2.entries = {{c2, 2}};
    const auto yboth = value_portfolio(both, a);
    const auto y1 = value_portfolio(merged, a); // 2 x c1
    const auto yc1 = tl_policy_values(c1, a);
    const auto y2 = value_portfolio(only2, a);
    for (std::size_t t = 0; t < yboth.size(); ++t)
        CHECK(yboth[t] ==
              doctest::Approx(y1[t] + yc1[t] + y2[t]).epsilon(1e-12));

    CHECK_THROWS_AS(value_portfolio(Portfolio{ProductLine::TermLife, {}}, a), RangeError);
}

TEST_CASE("integer model points give collapsed bounds") {
    const ValuationAssumptions a;
    const Contract c = tl_contract(44.0, 2e5, 10.0, 4.0, 0.01);
    const auto b = bounds_for_model_point(c, a);
    const auto y = tl_policy_values(c, a);
    CHECK_FALSE(b.clamped);
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(b.low[t] == y[t]);
        CHECK(b.high[t] == y[t]);
        CHECK(b.mid[t] == y[t]);
    }
}

TEST_CASE("fractional duration splits into floor and ceil valuations") {
    const ValuationAssumptions a;
    Contract mp = tl_contract(44.3, 2e5, 10.5, 4.2, 0.01);
    const auto b = bounds_for_model_point(mp, a);

    Contract lo = mp;
    lo.x[kDuration] = 10.0;
    lo.x[kLapsed] = 5.0;
    Contract hi = mp;
    hi.x[kDuration] = 11.0;
    hi.x[kLapsed] = 4.0;
    const auto ylo = tl_policy_values(lo, a);
    const auto yhi = tl_policy_values(hi, a);
    for (std::size_t t = 0; t < ylo.size(); ++t) {
        CHECK(b.low[t] == ylo[t]);
        CHECK(b.high[t] == yhi[t]);
        CHECK(b.mid[t] == doctest::Approx(0.5 * (ylo[t] + yhi[t])).epsilon(0));
    }
}

TEST_CASE("matured rounding is clamped and flagged") {
    const ValuationAssumptions a;
    // lapsed in [duration-1, duration): ceil collides with floor(duration)
    const Contract mp = tl_contract(40.0, 2e5, 10.2, 9.7, 0.01);
    const auto b = bounds_for_model_point(mp, a);
    CHECK(b.clamped);
    for (std::size_t t = 0; t < b.low.size(); ++t) CHECK(b.low[t] <= b.high[t] + 1e-9);
}

TEST_CASE("DC bounds floor and ceil the age") {
    const ValuationAssumptions a;
    const Contract mp = dc_contract(40.6, 1.5e5, 8e4, 0.03, 0.05);
    const auto b = bounds_for_model_point(mp, a);
    Contract young = mp;
    young.x[kAge] = 40.0;
    Contract old = mp;
    old.x[kAge] = 41.0;
    const auto yy = dc_policy_values(young, a);
    const auto yo = dc_policy_values(old, a);
    for (std::size_t t = 0; t < yy.size(); ++t) {
        CHECK(b.high[t] == yy[t]);
        CHECK(b.low[t] == yo[t]);
    }
}

TEST_CASE("assumptions JSON round-trips") {
    ValuationAssumptions a;
    a.mortality.A = 3e-4;
    a.retirement.rates[0] = 0.25;
    a.dc_fund_rate = 0.025;
    const ValuationAssumptions b = assumptions_from_json(assumptions_to_json(a));
    CHECK(b.mortality.A == a.mortality.A);
    CHECK(b.retirement.rates[0] == 0.25);
    CHECK(b.dc_fund_rate == 0.025);
    CHECK_THROWS_AS(assumptions_from_json("{\"A\": 1e-4}"), ParseError);
}

} // TEST_SUITE
