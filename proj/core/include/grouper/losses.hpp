#ifndef GROUPER_LOSSES_HPP
#define GROUPER_LOSSES_HPP

#include <Eigen/Core>

#include <string>

namespace grouper {

enum class LossKind { MSE, MAE };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& tag);

struct LossResult {
    double value = 0.0;
    Eigen::MatrixXd grad; // d value / d pred
};

// Mean over all entries of the (possibly batched) prediction matrix:
// MSE with gradient 2(pred-target)/n, MAE with subgradient
// sign(pred-target)/n (zero at ties).
LossResult loss(LossKind kind, const Eigen::MatrixXd& pred,
                const Eigen::MatrixXd& target);

} // namespace grouper

#endif // GROUPER_LOSSES_HPP
