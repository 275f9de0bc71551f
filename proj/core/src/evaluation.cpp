#include "grouper/evaluation.hpp"

#include "grouper/errors.hpp"
#include "grouper/portfolio_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace grouper {

bool relative_error_defined(double reference, double series_max) {
    return reference > 1e-9 * std::max(series_max, 1.0);
}

double percentile_abs(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    for (double& v : values) v = std::abs(v);
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

EvalReport evaluate(const SurrogateEnsemble& ens, const Dataset& data,
                    const std::vector<double>* reference_aggregate) {
    if (data.size() == 0) throw RangeError("evaluate: empty dataset");
    ens.validate();
    if (ens.members.front().output_dim != data.Y.rows())
        throw ShapeError("evaluate: model and dataset horizons differ");

    const Eigen::Index T = data.Y.rows();
    const Eigen::Index N = data.size();

    Eigen::VectorXd aggregate(T);
    if (reference_aggregate) {
        if (static_cast<Eigen::Index>(reference_aggregate->size()) != T)
            throw ShapeError("evaluate: reference aggregate length mismatch");
        for (Eigen::Index t = 0; t < T; ++t)
            aggregate(t) = (*reference_aggregate)[static_cast<std::size_t>(t)];
    } else {
        aggregate = data.Y.rowwise().sum();
    }
    const double aggregate_max = aggregate.maxCoeff();
    const double target_max = data.Y.maxCoeff();

    const Eigen::MatrixXd pred = ensemble_forward(ens, data.X);
    const Eigen::MatrixXd err = pred - data.Y;

    EvalReport rep;
    rep.mean_e_by_t.assign(static_cast<std::size_t>(T), 0.0);
    rep.mean_wre_by_t.assign(static_cast<std::size_t>(T), 0.0);

    std::vector<double> all_e;
    std::vector<double> all_wre;
    all_e.reserve(static_cast<std::size_t>(T * N));
    all_wre.reserve(static_cast<std::size_t>(T * N));

    for (Eigen::Index t = 0; t < T; ++t) {
        const bool wre_defined = relative_error_defined(aggregate(t), aggregate_max);
        double row_sum = 0.0;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double e = err(t, i);
            all_e.push_back(e);
            row_sum += e;
            if (wre_defined) all_wre.push_back(e / aggregate(t));
        }
        rep.mean_e_by_t[static_cast<std::size_t>(t)] = row_sum / static_cast<double>(N);
        rep.mean_wre_by_t[static_cast<std::size_t>(t)] =
            wre_defined ? rep.mean_e_by_t[static_cast<std::size_t>(t)] / aggregate(t)
                        : std::numeric_limits<double>::quiet_NaN();
    }

    auto mean_of = [](const std::vector<double>& v, bool absolute) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double x : v) s += absolute ? std::abs(x) : x;
        return s / static_cast<double>(v.size());
    };
    rep.mean_e = mean_of(all_e, false);
    rep.mean_abs_e = mean_of(all_e, true);
    rep.mean_wre = mean_of(all_wre, false);
    rep.mean_abs_wre = mean_of(all_wre, true);
    rep.pc99_abs_e = percentile_abs(all_e, 0.99);
    rep.pc99_abs_wre = percentile_abs(all_wre, 0.99);

    // Relative error bucketed by contract volume max_t R(x) relative to
    // the overall maximum; low-volume contracts are where re degrades.
    const std::vector<double> edges = {0.0, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0};
    std::vector<std::vector<double>> bucket_re(edges.size() - 1);
    std::vector<std::int64_t> bucket_count(edges.size() - 1, 0);
    for (Eigen::Index i = 0; i < N; ++i) {
        const double contract_max = data.Y.col(i).maxCoeff();
        const double volume = target_max > 0.0 ? contract_max / target_max : 0.0;
        std::size_t b = 0;
        while (b + 2 < edges.size() && volume >= edges[b + 1]) ++b;
        ++bucket_count[b];
        for (Eigen::Index t = 0; t < T; ++t)
            if (relative_error_defined(data.Y(t, i), contract_max))
                bucket_re[b].push_back(err(t, i) / data.Y(t, i));
    }
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        VolumeBucketStat st;
        st.lo = edges[b];
        st.hi = edges[b + 1];
        st.count = bucket_count[b];
        st.mean_re = mean_of(bucket_re[b], false);
        st.pc99_abs_re = percentile_abs(bucket_re[b], 0.99);
        rep.re_by_volume.push_back(st);
    }
    return rep;
}

std::string eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["mean_e"] = r.mean_e;
    j["mean_abs_e"] = r.mean_abs_e;
    j["mean_wre"] = r.mean_wre;
    j["mean_abs_wre"] = r.mean_abs_wre;
    j["pc99_abs_e"] = r.pc99_abs_e;
    j["pc99_abs_wre"] = r.pc99_abs_wre;
    j["re_by_volume"] = nlohmann::json::array();
    for (const auto& b : r.re_by_volume) {
        j["re_by_volume"].push_back({{"lo", b.lo},
                                     {"hi", b.hi},
                                     {"count", b.count},
                                     {"mean_re", b.mean_re},
                                     {"pc99_abs_re", b.pc99_abs_re}});
    }
    auto series = [](const std::vector<double>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (double x : v) {
            if (std::isnan(x))
                arr.push_back(nullptr);
            else
                arr.push_back(x);
        }
        return arr;
    };
    j["mean_e_by_t"] = series(r.mean_e_by_t);
    j["mean_wre_by_t"] = series(r.mean_wre_by_t);
    return j.dump(2);
}

void write_eval_report_csv(const std::string& path, const EvalReport& r) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "stat,t,value\n";
    f << "mean_e,-1," << format_double(r.mean_e) << '\n';
    f << "mean_abs_e,-1," << format_double(r.mean_abs_e) << '\n';
    f << "mean_wre,-1," << format_double(r.mean_wre) << '\n';
    f << "mean_abs_wre,-1," << format_double(r.mean_abs_wre) << '\n';
    f << "pc99_abs_e,-1," << format_double(r.pc99_abs_e) << '\n';
    f << "pc99_abs_wre,-1," << format_double(r.pc99_abs_wre) << '\n';
    for (std::size_t t = 0; t < r.mean_e_by_t.size(); ++t)
        f << "mean_e," << t << ',' << format_double(r.mean_e_by_t[t]) << '\n';
    for (std::size_t t = 0; t < r.mean_wre_by_t.size(); ++t)
        if (!std::isnan(r.mean_wre_by_t[t]))
            f << "mean_wre," << t << ',' << format_double(r.mean_wre_by_t[t]) << '\n';
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
