#include "grouper/losses.hpp"

#include "grouper/errors.hpp"

namespace grouper {

std::string to_string(LossKind kind) {
    return kind == LossKind::MSE ? "mse" : "mae";
}

LossKind loss_kind_from_string(const std::string& tag) {
    if (tag == "mse") return LossKind::MSE;
    if (tag == "mae") return LossKind::MAE;
    throw RangeError("unknown loss kind '" + tag + "' (expected mse|mae)");
}

LossResult loss(LossKind kind, const Eigen::MatrixXd& pred,
                const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ShapeError("loss: prediction and target shapes differ");
    const double n = static_cast<double>(pred.size());
    const Eigen::ArrayXXd diff = pred.array() - target.array();
    LossResult r;
    if (kind == LossKind::MSE) {
        r.value = diff.square().sum() / n;
        r.grad = (2.0 / n * diff).matrix();
    } else {
        r.value = diff.abs().sum() / n;
        r.grad = (diff.sign() / n).matrix();
    }
    return r;
}

} // namespace grouper
