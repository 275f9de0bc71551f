#ifndef GROUPER_BACKTEST_HPP
#define GROUPER_BACKTEST_HPP

#include "grouper/model_points.hpp"

#include <map>
#include <string>
#include <vector>

namespace grouper {

struct MethodStats {
    double mean_e = 0.0;
    double mean_abs_e = 0.0;
    double mean_re = 0.0;
    double mean_abs_re = 0.0;
    double pc99_abs_e = 0.0;
    double pc99_abs_re = 0.0;
};

// Per-time aggregates of the grouped portfolio against the exact
// portfolio target, for the optimized model points (surrogate
// prediction plus exact floor/ceil bound valuations) and the K-means
// centroid baseline (bound valuations, mid = mean of low and high).
struct GroupingReport {
    std::vector<double> target;   // exact R(P)
    std::vector<double> ann_pred; // surrogate aggregate of the model points
    std::vector<double> ann_low, ann_mid, ann_high;
    std::vector<double> km_low, km_mid, km_high;
    std::map<std::string, MethodStats> stats; // keyed by series name
    bool any_bound_clamped = false;
    bool tl_low_leq_high = true; // empirical low <= high check (term life)
};

GroupingReport backtest(const GroupingResult& grouped, const Portfolio& original,
                        const SurrogateEnsemble& surrogate,
                        const ValuationAssumptions& assumptions);

// Aggregate stats of one series against a target, using the shared
// relative-error definedness guard.
MethodStats series_stats(const std::vector<double>& series,
                         const std::vector<double>& target);

// Componentwise acceptance test |target - pred| / target < alpha_t,
// evaluated wherever the target is genuinely positive.
struct ThresholdCheck {
    bool accepted = true;
    std::vector<int> failed_t;
};
ThresholdCheck check_thresholds(const std::vector<double>& target,
                                const std::vector<double>& pred,
                                const std::vector<double>& alpha);

std::string grouping_report_to_json(const GroupingReport& r);
GroupingReport grouping_report_from_json(const std::string& text);
GroupingReport load_grouping_report(const std::string& path);
// Columns: t,target,ann_pred,ann_low,ann_mid,ann_high,km_low,km_mid,km_high
void write_series_csv(const std::string& path, const GroupingReport& r);
// Columns: method,stat,value
void write_summary_csv(const std::string& path, const GroupingReport& r);

} // namespace grouper

#endif // GROUPER_BACKTEST_HPP
