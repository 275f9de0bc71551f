#include "grouper/optimizer.hpp"

#include "grouper/errors.hpp"

#include <cmath>

namespace grouper {

std::string to_string(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "fixed";
}

OptimizerKind optimizer_kind_from_string(const std::string& tag) {
    if (tag == "adam") return OptimizerKind::Adam;
    if (tag == "fixed" || tag == "fixed_step") return OptimizerKind::FixedStep;
    throw RangeError("unknown optimizer '" + tag + "' (expected adam|fixed)");
}

void update_matrix(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
                   AdamMoments& moments, long t, const OptimizerConfig& cfg) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw ShapeError("optimizer update: gradient shape mismatch");
    if (cfg.kind == OptimizerKind::FixedStep) {
        param.noalias() -= cfg.lr * grad;
        return;
    }
    if (moments.m.size() == 0) {
        moments.m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
        moments.v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    }
    moments.m = cfg.beta1 * moments.m + (1.0 - cfg.beta1) * grad;
    moments.v = (cfg.beta2 * moments.v.array() +
                 (1.0 - cfg.beta2) * grad.array().square())
                    .matrix();
    const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    param.array() -= cfg.lr * (moments.m.array() / corr1) /
                     ((moments.v.array() / corr2).sqrt() + cfg.eps);
}

TrainState::TrainState(const Network& net, OptimizerConfig cfg, std::uint64_t seed_in)
    : seed(seed_in), cfg_(cfg) {
    mW_.resize(net.layers.size());
    mU_.resize(net.layers.size());
    mb_.resize(net.layers.size());
}

void TrainState::step(Network& net, const Gradients& grads) {
    if (grads.layers.size() != net.layers.size())
        throw ShapeError("TrainState::step: gradient/layer count mismatch");
    ++t_;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        Layer& l = net.layers[i];
        if (!l.trainable()) continue;
        const LayerGrads& lg = grads.layers[i];
        update_matrix(l.W, lg.dW, mW_[i], t_, cfg_);
        if (l.U.size() > 0) update_matrix(l.U, lg.dU, mU_[i], t_, cfg_);
        if (l.b.size() > 0) {
            Eigen::MatrixXd b = l.b;
            Eigen::MatrixXd db = lg.db;
            update_matrix(b, db, mb_[i], t_, cfg_);
            l.b = b.col(0);
        }
    }
}

} // namespace grouper
