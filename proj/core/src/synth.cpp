#include "grouper/synth.hpp"

#include "grouper/errors.hpp"
#include "grouper/sobol.hpp"

#include <cmath>

namespace grouper {

namespace {

double affine(double u, double lo, double hi) { return lo + u * (hi - lo); }

} // namespace

Portfolio synth_term_life(std::int64_t n, std::int64_t skip) {
    if (n < 1) throw RangeError("synth_term_life: n must be >= 1");
    const auto pts = sobol_points(5, n, skip);

    Portfolio p;
    p.line = ProductLine::TermLife;
    p.entries.reserve(static_cast<std::size_t>(n));
    for (const auto& u : pts) {
        const double issue_age = std::round(affine(u[0], 25.0, 67.0));
        const double sum_insured = affine(u[1], 1e3, 1e6);
        const double duration = std::round(affine(u[2], 2.0, 40.0));
        // Uniform fraction of the duration, capped below duration so the
        // contract has at least one year left.
        const double lapsed = std::round(u[3] * (duration - 1.0));
        const double interest = affine(u[4], -0.01, 0.04);

        Contract c;
        c.line = ProductLine::TermLife;
        c.x = {issue_age + lapsed, sum_insured, duration, lapsed, interest};
        p.entries.push_back({c, 1});
    }
    return p;
}

Portfolio synth_dc(std::int64_t n, std::int64_t skip) {
    if (n < 1) throw RangeError("synth_dc: n must be >= 1");
    const auto pts = sobol_points(5, n, skip);

    Portfolio p;
    p.line = ProductLine::DCPlan;
    p.entries.reserve(static_cast<std::size_t>(n));
    for (const auto& u : pts) {
        Contract c;
        c.line = ProductLine::DCPlan;
        c.x = {std::round(affine(u[0], 25.0, 60.0)),
               affine(u[1], 0.0, 200000.0),
               affine(u[2], 20000.0, 200000.0),
               affine(u[3], 0.01, 0.05),
               affine(u[4], 0.01, 0.1)};
        p.entries.push_back({c, 1});
    }
    return p;
}

} // namespace grouper
