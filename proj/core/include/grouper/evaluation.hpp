#ifndef GROUPER_EVALUATION_HPP
#define GROUPER_EVALUATION_HPP

#include "grouper/dataset.hpp"
#include "grouper/surrogate.hpp"

#include <string>
#include <vector>

namespace grouper {

// Relative errors are only defined where the reference value is
// genuinely positive. Zero-padded tails and terminal reserves are
// exact zeros up to rounding, so "positive" uses a floor relative to
// the largest value in the series.
bool relative_error_defined(double reference, double series_max);

struct VolumeBucketStat {
    double lo = 0.0; // bucket over max_t R(x) / max_{x',t} R(x')
    double hi = 1.0;
    std::int64_t count = 0;      // contracts in the bucket
    double mean_re = 0.0;        // over defined (x, t) pairs
    double pc99_abs_re = 0.0;
};

struct EvalReport {
    // Means over all (contract, t) pairs where the statistic is defined.
    double mean_e = 0.0;
    double mean_abs_e = 0.0;
    double mean_wre = 0.0;
    double mean_abs_wre = 0.0;
    // Empirical 99th percentiles (nearest rank) of absolute values.
    double pc99_abs_e = 0.0;
    double pc99_abs_wre = 0.0;
    std::vector<VolumeBucketStat> re_by_volume;
    // Per-time series for the long-format CSV.
    std::vector<double> mean_e_by_t;
    std::vector<double> mean_wre_by_t;
};

// Errors of the ensemble prediction against exact targets:
//   e_t = pred_t - R_t, re_t = e_t / R_t (where defined),
//   wre_t = e_t / sum_{x' in P} R_t(x').
// The reference portfolio for wre defaults to the dataset itself; pass
// an explicit aggregate to weight against a different portfolio.
EvalReport evaluate(const SurrogateEnsemble& ens, const Dataset& data,
                    const std::vector<double>* reference_aggregate = nullptr);

// Nearest-rank percentile of |values|; p in (0,1].
double percentile_abs(std::vector<double> values, double p);

std::string eval_report_to_json(const EvalReport& r);
// Long format `stat,t,value`; scalar statistics use t = -1.
void write_eval_report_csv(const std::string& path, const EvalReport& r);

} // namespace grouper

#endif // GROUPER_EVALUATION_HPP
