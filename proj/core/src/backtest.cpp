#include "grouper/backtest.hpp"

#include "grouper/errors.hpp"
#include "grouper/evaluation.hpp"
#include "grouper/parallel.hpp"
#include "grouper/portfolio_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace grouper {

namespace {

// count-weighted sum of low/mid/high bound paths over a portfolio of
// (possibly fractional) model points.
struct BoundAggregates {
    std::vector<double> low, mid, high;
    bool clamped = false;
};

BoundAggregates aggregate_bounds(const Portfolio& points,
                                 const ValuationAssumptions& a) {
    std::vector<BoundedValuation> vals(points.entries.size());
    parallel_for(points.entries.size(), [&](std::size_t i) {
        vals[i] = bounds_for_model_point(points.entries[i].contract, a);
    });
    std::vector<std::vector<double>> lo, mi, hi;
    bool clamped = false;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const double w = static_cast<double>(points.entries[i].count);
        auto weighted = [w](const PolicyValuePath& y) {
            std::vector<double> out(y.size());
            for (std::size_t t = 0; t < y.size(); ++t) out[t] = w * y[t];
            return out;
        };
        lo.push_back(weighted(vals[i].low));
        mi.push_back(weighted(vals[i].mid));
        hi.push_back(weighted(vals[i].high));
        clamped = clamped || vals[i].clamped;
    }
    return {pairwise_sum(std::move(lo)), pairwise_sum(std::move(mi)),
            pairwise_sum(std::move(hi)), clamped};
}

} // namespace

MethodStats series_stats(const std::vector<double>& series,
                         const std::vector<double>& target) {
    if (series.size() != target.size())
        throw ShapeError("series_stats: length mismatch");
    const double target_max = *std::max_element(target.begin(), target.end());
    std::vector<double> es, res;
    for (std::size_t t = 0; t < target.size(); ++t) {
        const double e = series[t] - target[t];
        es.push_back(e);
        if (relative_error_defined(target[t], target_max))
            res.push_back(e / target[t]);
    }
    MethodStats s;
    auto mean_of = [](const std::vector<double>& v, bool absolute) {
        if (v.empty()) return 0.0;
        double sum = 0.0;
        for (double x : v) sum += absolute ? std::abs(x) : x;
        return sum / static_cast<double>(v.size());
    };
    s.mean_e = mean_of(es, false);
    s.mean_abs_e = mean_of(es, true);
    s.mean_re = mean_of(res, false);
    s.mean_abs_re = mean_of(res, true);
    s.pc99_abs_e = percentile_abs(es, 0.99);
    s.pc99_abs_re = percentile_abs(res, 0.99);
    return s;
}

GroupingReport backtest(const GroupingResult& grouped, const Portfolio& original,
                        const SurrogateEnsemble& surrogate,
                        const ValuationAssumptions& assumptions) {
    if (grouped.model_points.line != original.line)
        throw RangeError("backtest: product lines differ");
    surrogate.validate();

    GroupingReport rep;
    rep.target = value_portfolio(original, assumptions);

    // Surrogate aggregate of the grouped portfolio.
    const auto& entries = grouped.model_points.entries;
    Eigen::MatrixXd z(5, entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto zi = scale_to_unit(entries[i].contract);
        for (int f = 0; f < 5; ++f) z(f, static_cast<Eigen::Index>(i)) = zi[static_cast<std::size_t>(f)];
    }
    const Eigen::MatrixXd pred = ensemble_forward(surrogate, z);
    rep.ann_pred.assign(static_cast<std::size_t>(pred.rows()), 0.0);
    {
        std::vector<std::vector<double>> terms;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            std::vector<double> col(static_cast<std::size_t>(pred.rows()));
            for (Eigen::Index t = 0; t < pred.rows(); ++t)
                col[static_cast<std::size_t>(t)] =
                    static_cast<double>(entries[i].count) * pred(t, static_cast<Eigen::Index>(i));
            terms.push_back(std::move(col));
        }
        rep.ann_pred = pairwise_sum(std::move(terms));
    }

    // Exact bound valuations: optimized points and K-means baseline.
    const BoundAggregates ann = aggregate_bounds(grouped.model_points, assumptions);
    rep.ann_low = ann.low;
    rep.ann_mid = ann.mid;
    rep.ann_high = ann.high;

    const Portfolio km = baseline_grouping(grouped.clusters, original.line);
    const BoundAggregates kmb = aggregate_bounds(km, assumptions);
    rep.km_low = kmb.low;
    rep.km_mid = kmb.mid;
    rep.km_high = kmb.high;
    rep.any_bound_clamped = ann.clamped || kmb.clamped;

    if (original.line == ProductLine::TermLife) {
        for (std::size_t t = 0; t < rep.ann_low.size(); ++t)
            if (rep.ann_low[t] > rep.ann_high[t] + 1e-9 * std::abs(rep.ann_high[t]))
                rep.tl_low_leq_high = false;
    }

    rep.stats["ann_pred"] = series_stats(rep.ann_pred, rep.target);
    rep.stats["ann_low"] = series_stats(rep.ann_low, rep.target);
    rep.stats["ann_mid"] = series_stats(rep.ann_mid, rep.target);
    rep.stats["ann_high"] = series_stats(rep.ann_high, rep.target);
    rep.stats["km_low"] = series_stats(rep.km_low, rep.target);
    rep.stats["km_mid"] = series_stats(rep.km_mid, rep.target);
    rep.stats["km_high"] = series_stats(rep.km_high, rep.target);
    return rep;
}

ThresholdCheck check_thresholds(const std::vector<double>& target,
                                const std::vector<double>& pred,
                                const std::vector<double>& alpha) {
    if (pred.size() != target.size() || alpha.size() < target.size())
        throw ShapeError("check_thresholds: length mismatch");
    const double target_max = *std::max_element(target.begin(), target.end());
    ThresholdCheck c;
    for (std::size_t t = 0; t < target.size(); ++t) {
        if (!relative_error_defined(target[t], target_max)) continue;
        const double rel = std::abs(target[t] - pred[t]) / std::abs(target[t]);
        // exact matches pass any threshold, including alpha = 0
        if (rel > 0.0 && rel >= alpha[t]) {
            c.accepted = false;
            c.failed_t.push_back(static_cast<int>(t));
        }
    }
    return c;
}

namespace {

nlohmann::json stats_to_json(const MethodStats& s) {
    return {{"mean_e", s.mean_e},         {"mean_abs_e", s.mean_abs_e},
            {"mean_re", s.mean_re},       {"mean_abs_re", s.mean_abs_re},
            {"pc99_abs_e", s.pc99_abs_e}, {"pc99_abs_re", s.pc99_abs_re}};
}

} // namespace

std::string grouping_report_to_json(const GroupingReport& r) {
    nlohmann::json j;
    j["target"] = r.target;
    j["ann_pred"] = r.ann_pred;
    j["ann_low"] = r.ann_low;
    j["ann_mid"] = r.ann_mid;
    j["ann_high"] = r.ann_high;
    j["km_low"] = r.km_low;
    j["km_mid"] = r.km_mid;
    j["km_high"] = r.km_high;
    j["any_bound_clamped"] = r.any_bound_clamped;
    j["tl_low_leq_high"] = r.tl_low_leq_high;
    for (const auto& [name, s] : r.stats) j["stats"][name] = stats_to_json(s);
    return j.dump(2);
}

GroupingReport grouping_report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid report JSON: ") + e.what(), "document");
    }
    GroupingReport r;
    auto series = [&](const char* field) {
        if (!j.contains(field)) throw ParseError("missing field", std::string(field));
        return j[field].get<std::vector<double>>();
    };
    r.target = series("target");
    r.ann_pred = series("ann_pred");
    r.ann_low = series("ann_low");
    r.ann_mid = series("ann_mid");
    r.ann_high = series("ann_high");
    r.km_low = series("km_low");
    r.km_mid = series("km_mid");
    r.km_high = series("km_high");
    r.any_bound_clamped = j.value("any_bound_clamped", false);
    r.tl_low_leq_high = j.value("tl_low_leq_high", true);
    if (j.contains("stats"))
        for (const auto& [name, s] : j["stats"].items()) {
            MethodStats st;
            st.mean_e = s.value("mean_e", 0.0);
            st.mean_abs_e = s.value("mean_abs_e", 0.0);
            st.mean_re = s.value("mean_re", 0.0);
            st.mean_abs_re = s.value("mean_abs_re", 0.0);
            st.pc99_abs_e = s.value("pc99_abs_e", 0.0);
            st.pc99_abs_re = s.value("pc99_abs_re", 0.0);
            r.stats[name] = st;
        }
    return r;
}

GroupingReport load_grouping_report(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open", path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return grouping_report_from_json(ss.str());
}

void write_series_csv(const std::string& path, const GroupingReport& r) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "t,target,ann_pred,ann_low,ann_mid,ann_high,km_low,km_mid,km_high\n";
    for (std::size_t t = 0; t < r.target.size(); ++t) {
        f << t << ',' << format_double(r.target[t]) << ',' << format_double(r.ann_pred[t])
          << ',' << format_double(r.ann_low[t]) << ',' << format_double(r.ann_mid[t])
          << ',' << format_double(r.ann_high[t]) << ',' << format_double(r.km_low[t])
          << ',' << format_double(r.km_mid[t]) << ',' << format_double(r.km_high[t])
          << '\n';
    }
    if (!f) throw IoError("write failed", path);
}

void write_summary_csv(const std::string& path, const GroupingReport& r) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "method,stat,value\n";
    for (const auto& [name, s] : r.stats) {
        f << name << ",mean_e," << format_double(s.mean_e) << '\n';
        f << name << ",mean_abs_e," << format_double(s.mean_abs_e) << '\n';
        f << name << ",mean_re," << format_double(s.mean_re) << '\n';
        f << name << ",mean_abs_re," << format_double(s.mean_abs_re) << '\n';
        f << name << ",pc99_abs_e," << format_double(s.pc99_abs_e) << '\n';
        f << name << ",pc99_abs_re," << format_double(s.pc99_abs_re) << '\n';
    }
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
