#include "grouper/contracts.hpp"

#include "grouper/errors.hpp"

#include <cmath>
#include <numeric>

namespace grouper {

std::string to_string(ProductLine line) {
    return line == ProductLine::TermLife ? "tl" : "dc";
}

ProductLine product_line_from_string(const std::string& tag) {
    if (tag == "tl" || tag == "term_life") return ProductLine::TermLife;
    if (tag == "dc" || tag == "dc_plan") return ProductLine::DCPlan;
    throw RangeError("unknown product line tag '" + tag + "' (expected tl|dc)");
}

const std::array<FeatureSpec, 5>& feature_specs(ProductLine line) {
    static const std::array<FeatureSpec, 5> term_life = {{
        {"age_current", 25.0, 107.0, true, "years"},
        {"sum_insured", 1e3, 1e6, false, "currency"},
        {"duration", 2.0, 40.0, true, "years"},
        {"lapsed_duration", 0.0, 39.0, true, "years"},
        {"interest_rate", -0.01, 0.04, false, "rate"},
    }};
    static const std::array<FeatureSpec, 5> dc_plan = {{
        {"age_current", 25.0, 60.0, true, "years"},
        {"fund_volume", 0.0, 200000.0, false, "currency"},
        {"salary", 20000.0, 200000.0, false, "currency"},
        {"salary_scale", 0.01, 0.05, false, "rate"},
        {"contribution_rate", 0.01, 0.1, false, "rate"},
    }};
    return line == ProductLine::TermLife ? term_life : dc_plan;
}

namespace {

bool is_integer(double v) { return v == std::floor(v); }

} // namespace

void validate_contract(const Contract& c, bool allow_fractional) {
    const auto& specs = feature_specs(c.line);
    for (int i = 0; i < 5; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const double v = c.x[idx];
        if (!std::isfinite(v))
            throw RangeError("contract feature " + specs[idx].name + " is not finite");
        if (v < specs[idx].lower || v > specs[idx].upper)
            throw RangeError("contract feature " + specs[idx].name + " = " +
                             std::to_string(v) + " outside [" +
                             std::to_string(specs[idx].lower) + ", " +
                             std::to_string(specs[idx].upper) + "]");
        if (!allow_fractional && specs[idx].integer_valued && !is_integer(v))
            throw RangeError("contract feature " + specs[idx].name + " = " +
                             std::to_string(v) + " must be integer-valued");
    }
    if (c.line == ProductLine::TermLife && !allow_fractional) {
        // No matured contracts: lapsed duration strictly below duration.
        if (c.x[kLapsed] > c.x[kDuration] - 1.0)
            throw RangeError("lapsed duration " + std::to_string(c.x[kLapsed]) +
                             " not in {0,...,duration-1}");
        const double issue = c.issue_age();
        if (issue < 25.0 || issue > 67.0)
            throw RangeError("issue age " + std::to_string(issue) +
                             " outside {25,...,67}");
    }
}

std::int64_t Portfolio::total_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.count;
    return n;
}

void validate_portfolio(const Portfolio& p, bool allow_fractional) {
    for (const auto& e : p.entries) {
        if (e.count <= 0)
            throw RangeError("portfolio entry count must be a positive integer");
        if (e.contract.line != p.line)
            throw RangeError("portfolio entry product line differs from portfolio line");
        validate_contract(e.contract, allow_fractional);
    }
}

std::array<double, 5> scale_to_unit(const Contract& c) {
    const auto& specs = feature_specs(c.line);
    std::array<double, 5> z{};
    for (std::size_t i = 0; i < 5; ++i) {
        const double v = c.x[i];
        if (v < specs[i].lower || v > specs[i].upper)
            throw RangeError("scale_to_unit: feature " + specs[i].name + " = " +
                             std::to_string(v) + " out of range");
        z[i] = 2.0 * (v - specs[i].lower) / (specs[i].upper - specs[i].lower) - 1.0;
    }
    return z;
}

Contract unscale(ProductLine line, const std::array<double, 5>& z) {
    const auto& specs = feature_specs(line);
    Contract c;
    c.line = line;
    for (std::size_t i = 0; i < 5; ++i) {
        if (z[i] < -1.0 || z[i] > 1.0)
            throw RangeError("unscale: coordinate " + std::to_string(i) + " = " +
                             std::to_string(z[i]) + " outside [-1,1]");
        c.x[i] = specs[i].lower + (z[i] + 1.0) / 2.0 * (specs[i].upper - specs[i].lower);
    }
    return c;
}

} // namespace grouper
