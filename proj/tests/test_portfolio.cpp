#include "grouper/contracts.hpp"
#include "grouper/errors.hpp"
#include "grouper/portfolio_io.hpp"
#include "grouper/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace grouper;

TEST_SUITE("portfolio") {

TEST_CASE("synthesized term life contracts satisfy the invariants") {
    const Portfolio p = synth_term_life(5000, 1);
    REQUIRE(p.entries.size() == 5000);
    CHECK(p.total_count() == 5000);
    for (const auto& e : p.entries) {
        CHECK_NOTHROW(validate_contract(e.contract));
        const auto& x = e.contract.x;
        CHECK(x[kLapsed] <= x[kDuration] - 1.0);
        const double issue = e.contract.issue_age();
        CHECK(issue >= 25.0);
        CHECK(issue <= 67.0);
        CHECK(x[kAge] <= 106.0); // 67 + 39
        CHECK(x[kAge] == std::floor(x[kAge]));
        CHECK(x[kDuration] == std::floor(x[kDuration]));
        CHECK(x[kLapsed] == std::floor(x[kLapsed]));
    }
}

TEST_CASE("synthesized DC plans stay inside the feature table") {
    const Portfolio p = synth_dc(5000, 1);
    const auto& specs = feature_specs(ProductLine::DCPlan);
    for (const auto& e : p.entries) {
        CHECK_NOTHROW(validate_contract(e.contract));
        CHECK(e.contract.x[kAge] == std::floor(e.contract.x[kAge]));
        for (std::size_t f = 0; f < 5; ++f) {
            CHECK(e.contract.x[f] >= specs[f].lower);
            CHECK(e.contract.x[f] <= specs[f].upper);
        }
    }
}

TEST_CASE("synthesis is deterministic in skip") {
    const Portfolio a = synth_term_life(100, 3);
    const Portfolio b = synth_term_life(100, 3);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i)
        CHECK(a.entries[i].contract.x == b.entries[i].contract.x);
}

TEST_CASE("scaling hits the cube endpoints") {
    Contract c;
    c.line = ProductLine::DCPlan;
    const auto& specs = feature_specs(c.line);
    for (std::size_t f = 0; f < 5; ++f) c.x[f] = specs[f].lower;
    auto z = scale_to_unit(c);
    for (double v : z) CHECK(v == doctest::Approx(-1.0).epsilon(0));

    for (std::size_t f = 0; f < 5; ++f) c.x[f] = (specs[f].lower + specs[f].upper) / 2.0;
    z = scale_to_unit(c);
    for (double v : z) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("scale and unscale are inverse on synthesized contracts") {
    for (const Portfolio& p : {synth_term_life(500, 1), synth_dc(500, 1)}) {
        for (const auto& e : p.entries) {
            const Contract back = unscale(p.line, scale_to_unit(e.contract));
            for (std::size_t f = 0; f < 5; ++f) {
                const double scale = std::max(1.0, std::abs(e.contract.x[f]));
                CHECK(std::abs(back.x[f] - e.contract.x[f]) / scale < 1e-12);
            }
        }
    }
}

TEST_CASE("out-of-range features are rejected") {
    Contract c;
    c.line = ProductLine::TermLife;
    c.x = {30.0, 5e5, 10.0, 2.0, 0.02};
    CHECK_NOTHROW(validate_contract(c));
    c.x[kInterest] = 0.05;
    CHECK_THROWS_AS(validate_contract(c), RangeError);
    c.x[kInterest] = 0.02;
    c.x[kLapsed] = 10.0; // matured
    CHECK_THROWS_AS(validate_contract(c), RangeError);
    CHECK_THROWS_AS(scale_to_unit(Contract{ProductLine::TermLife,
                                           {30.0, 5e5, 10.0, 2.0, 0.05}}),
                    RangeError);
}

TEST_CASE("portfolio CSV round-trips") {
    const Portfolio p = synth_term_life(50, 1);
    std::stringstream ss;
    write_portfolio_csv(ss, p);
    const Portfolio q = read_portfolio_csv(ss);
    REQUIRE(q.entries.size() == p.entries.size());
    for (std::size_t i = 0; i < p.entries.size(); ++i) {
        CHECK(q.entries[i].contract.x == p.entries[i].contract.x);
        CHECK(q.entries[i].count == p.entries[i].count);
    }
}

TEST_CASE("malformed CSV rows name the line number") {
    std::stringstream ss("line,x1,x2,x3,x4,x5,count\ntl,30,5e5,10,2,0.02,1\ntl,30,bad,10,2,0.02,1\n");
    try {
        read_portfolio_csv(ss);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.where() == "line 3");
    }
}

TEST_CASE("zero-count rows are rejected") {
    std::stringstream ss("line,x1,x2,x3,x4,x5,count\ntl,30,5e5,10,2,0.02,0\n");
    CHECK_THROWS_AS(read_portfolio_csv(ss), ParseError);
}

} // TEST_SUITE
