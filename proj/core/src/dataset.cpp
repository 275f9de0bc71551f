#include "grouper/dataset.hpp"

#include "grouper/errors.hpp"
#include "grouper/parallel.hpp"
#include "grouper/rng.hpp"

#include <numeric>

namespace grouper {

Dataset make_dataset(const Portfolio& p, const ValuationAssumptions& a) {
    if (p.entries.empty()) throw RangeError("make_dataset: empty portfolio");
    const std::int64_t n = p.total_count();
    const int T = path_length(p.line);

    Dataset d;
    d.line = p.line;
    d.X.resize(5, n);
    d.Y.resize(T, n);

    // Column start per entry (count k occupies k identical columns).
    std::vector<std::int64_t> offsets(p.entries.size());
    std::int64_t off = 0;
    for (std::size_t i = 0; i < p.entries.size(); ++i) {
        offsets[i] = off;
        off += p.entries[i].count;
    }

    parallel_for(p.entries.size(), [&](std::size_t i) {
        const auto& e = p.entries[i];
        const auto z = scale_to_unit(e.contract);
        const PolicyValuePath y = policy_values(e.contract, a);
        for (std::int64_t k = 0; k < e.count; ++k) {
            const Eigen::Index col = offsets[i] + k;
            for (int f = 0; f < 5; ++f) d.X(f, col) = z[static_cast<std::size_t>(f)];
            for (int t = 0; t < T; ++t) d.Y(t, col) = y[static_cast<std::size_t>(t)];
        }
    });
    return d;
}

namespace {

Dataset take(const Dataset& d, const std::vector<std::int64_t>& idx,
             std::size_t lo, std::size_t hi) {
    Dataset out;
    out.line = d.line;
    out.X.resize(d.X.rows(), static_cast<Eigen::Index>(hi - lo));
    out.Y.resize(d.Y.rows(), static_cast<Eigen::Index>(hi - lo));
    for (std::size_t k = lo; k < hi; ++k) {
        out.X.col(static_cast<Eigen::Index>(k - lo)) = d.X.col(idx[k]);
        out.Y.col(static_cast<Eigen::Index>(k - lo)) = d.Y.col(idx[k]);
    }
    return out;
}

} // namespace

DataSplit split(const Dataset& data, std::uint64_t seed) {
    const auto n = static_cast<std::int64_t>(data.size());
    if (n < 10) throw RangeError("split: need at least 10 samples");

    std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0x5b17));
    deterministic_shuffle(idx, rng);

    const auto n_test = static_cast<std::size_t>(0.30 * static_cast<double>(n));
    const auto n_val =
        static_cast<std::size_t>(0.25 * static_cast<double>(n - static_cast<std::int64_t>(n_test)));

    DataSplit s;
    s.test = take(data, idx, 0, n_test);
    s.validation = take(data, idx, n_test, n_test + n_val);
    s.train = take(data, idx, n_test + n_val, static_cast<std::size_t>(n));
    return s;
}

} // namespace grouper
