#include "grouper/policy_values.hpp"

#include "grouper/errors.hpp"
#include "grouper/parallel.hpp"
#include "grouper/portfolio_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace grouper {

double tl_premium(const Contract& c, const MortalityModel& m) {
    const double sum_insured = c.x[kSumInsured];
    const long n = std::lround(c.x[kDuration]);
    const double issue_age = c.x[kAge] - c.x[kLapsed];
    const double v = 1.0 / (1.0 + c.x[kInterest]);

    // Benefits: v^{t+1} tp q; annuity-due denominator: v^t tp.
    double benefits = 0.0;
    double annuity = 0.0;
    double tp = 1.0;
    double disc = 1.0;
    for (long t = 0; t < n; ++t) {
        const double p1 = survival_prob(m, issue_age + static_cast<double>(t), 1.0);
        annuity += disc * tp;
        benefits += disc * v * tp * (1.0 - p1);
        tp *= p1;
        disc *= v;
    }
    return sum_insured * benefits / annuity;
}

PolicyValuePath tl_policy_values(const Contract& c, const ValuationAssumptions& a) {
    const double sum_insured = c.x[kSumInsured];
    const long n = std::lround(c.x[kDuration]);
    const long lapsed = std::lround(c.x[kLapsed]);
    const double issue_age = c.x[kAge] - c.x[kLapsed];
    const double accum = 1.0 + c.x[kInterest];
    const double premium = tl_premium(c, a.mortality);

    // Forward recursion from issue; the equivalence-principle premium
    // drives the terminal reserve to zero.
    std::vector<double> reserve(static_cast<std::size_t>(n) + 1, 0.0);
    for (long t = 0; t < n; ++t) {
        const double p1 = survival_prob(a.mortality, issue_age + static_cast<double>(t), 1.0);
        const double q1 = 1.0 - p1;
        reserve[static_cast<std::size_t>(t + 1)] =
            ((reserve[static_cast<std::size_t>(t)] + premium) * accum -
             q1 * sum_insured) /
            p1;
    }

    PolicyValuePath y(static_cast<std::size_t>(path_length(ProductLine::TermLife)), 0.0);
    for (long t = 0; t + lapsed <= n; ++t)
        y[static_cast<std::size_t>(t)] = reserve[static_cast<std::size_t>(t + lapsed)];
    return y;
}

PolicyValuePath dc_policy_values(const Contract& c, const ValuationAssumptions& a) {
    const int age = static_cast<int>(std::lround(c.x[kAge]));
    const double salary = c.x[kSalary];
    const double scale = c.x[kSalaryScale];
    const double contribution = c.x[kContribution];
    const double accum = 1.0 + a.dc_fund_rate;

    PolicyValuePath y(static_cast<std::size_t>(path_length(ProductLine::DCPlan)), 0.0);
    double fund = c.x[kFund];
    y[0] = fund;
    double growth = 1.0;
    const int horizon = 67 - age;
    for (int t = 1; t <= horizon; ++t) {
        growth *= 1.0 + scale;
        const int attained = age + t - 1;
        const double p1 = survival_prob(a.mortality, static_cast<double>(attained), 1.0);
        fund = (fund + contribution * salary * growth) * accum *
               (1.0 - a.retirement.rate(attained)) * p1;
        y[static_cast<std::size_t>(t)] = fund;
    }
    return y;
}

PolicyValuePath policy_values(const Contract& c, const ValuationAssumptions& a) {
    return c.line == ProductLine::TermLife ? tl_policy_values(c, a)
                                           : dc_policy_values(c, a);
}

namespace {

// Byte key over (line, x) for exact-duplicate detection.
std::string contract_key(const Contract& c) {
    std::string key(1 + 5 * sizeof(double), '\0');
    key[0] = c.line == ProductLine::TermLife ? 't' : 'd';
    std::memcpy(key.data() + 1, c.x.data(), 5 * sizeof(double));
    return key;
}

} // namespace

PolicyValuePath value_portfolio(const Portfolio& p, const ValuationAssumptions& a) {
    if (p.entries.empty())
        throw RangeError("value_portfolio: empty portfolio");

    // Aggregate counts of identical contracts (first-seen order) so each
    // distinct contract is valued once.
    std::vector<PortfolioEntry> unique;
    unique.reserve(p.entries.size());
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& e : p.entries) {
        auto [it, inserted] = seen.emplace(contract_key(e.contract), unique.size());
        if (inserted)
            unique.push_back(e);
        else
            unique[it->second].count += e.count;
    }

    std::vector<std::vector<double>> terms(unique.size());
    parallel_for(unique.size(), [&](std::size_t i) {
        PolicyValuePath y = policy_values(unique[i].contract, a);
        const double w = static_cast<double>(unique[i].count);
        for (double& v : y) v *= w;
        terms[i] = std::move(y);
    });
    return pairwise_sum(std::move(terms));
}

namespace {

struct RoundedPair {
    double duration;
    double lapsed;
    bool clamped;
};

// Clamp a rounded (duration, lapsed) pair into feature bounds and the
// no-matured-contract constraint lapsed <= duration - 1.
RoundedPair clamp_tl(double duration, double lapsed) {
    const auto& specs = feature_specs(ProductLine::TermLife);
    bool clamped = false;
    auto clamp = [&](double v, double lo, double hi) {
        if (v < lo) { clamped = true; return lo; }
        if (v > hi) { clamped = true; return hi; }
        return v;
    };
    duration = clamp(duration, specs[kDuration].lower, specs[kDuration].upper);
    lapsed = clamp(lapsed, specs[kLapsed].lower, specs[kLapsed].upper);
    if (lapsed > duration - 1.0) {
        lapsed = duration - 1.0;
        clamped = true;
    }
    return {duration, lapsed, clamped};
}

} // namespace

BoundedValuation bounds_for_model_point(const Contract& mp,
                                        const ValuationAssumptions& a) {
    BoundedValuation out;
    if (mp.line == ProductLine::TermLife) {
        // Shorter term and longer elapsed time both lower the remaining
        // value path: (floor duration, ceil lapsed) -> low, and the
        // opposite pair -> high.
        const RoundedPair lo = clamp_tl(std::floor(mp.x[kDuration]), std::ceil(mp.x[kLapsed]));
        const RoundedPair hi = clamp_tl(std::ceil(mp.x[kDuration]), std::floor(mp.x[kLapsed]));
        Contract c_lo = mp;
        c_lo.x[kDuration] = lo.duration;
        c_lo.x[kLapsed] = lo.lapsed;
        Contract c_hi = mp;
        c_hi.x[kDuration] = hi.duration;
        c_hi.x[kLapsed] = hi.lapsed;
        out.low = tl_policy_values(c_lo, a);
        out.high = tl_policy_values(c_hi, a);
        out.clamped = lo.clamped || hi.clamped;
    } else {
        const auto& age_spec = feature_specs(ProductLine::DCPlan)[kAge];
        auto clamp_age = [&](double v, bool& flag) {
            if (v < age_spec.lower) { flag = true; return age_spec.lower; }
            if (v > age_spec.upper) { flag = true; return age_spec.upper; }
            return v;
        };
        bool clamped = false;
        // An older age shortens the horizon to retirement: ceil -> low.
        Contract c_lo = mp;
        c_lo.x[kAge] = clamp_age(std::ceil(mp.x[kAge]), clamped);
        Contract c_hi = mp;
        c_hi.x[kAge] = clamp_age(std::floor(mp.x[kAge]), clamped);
        out.low = dc_policy_values(c_lo, a);
        out.high = dc_policy_values(c_hi, a);
        out.clamped = clamped;
    }
    out.mid.resize(out.low.size());
    for (std::size_t t = 0; t < out.mid.size(); ++t)
        out.mid[t] = 0.5 * (out.low[t] + out.high[t]);
    return out;
}

void write_path_csv(const std::string& path, const PolicyValuePath& y) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "t,value\n";
    for (std::size_t t = 0; t < y.size(); ++t)
        f << t << ',' << format_double(y[t]) << '\n';
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
