#ifndef GROUPER_DATASET_HPP
#define GROUPER_DATASET_HPP

#include "grouper/contracts.hpp"
#include "grouper/policy_values.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace grouper {

// Supervised sample set: columns are contracts. X holds [-1,1]-scaled
// features, Y the exact zero-padded policy-value paths in currency.
struct Dataset {
    ProductLine line = ProductLine::TermLife;
    Eigen::MatrixXd X; // 5 x N
    Eigen::MatrixXd Y; // T x N

    Eigen::Index size() const { return X.cols(); }
};

// Values every contract with the exact oracle (entries with count k
// appear k times, matching the multiset semantics of a portfolio).
Dataset make_dataset(const Portfolio& p, const ValuationAssumptions& a);

struct DataSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
};

// Deterministic shuffle-split: test gets floor(0.30 N), validation
// floor(0.25 (N - test)), train the rest. Throws RangeError for N < 10.
DataSplit split(const Dataset& data, std::uint64_t seed);

} // namespace grouper

#endif // GROUPER_DATASET_HPP
