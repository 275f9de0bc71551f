#ifndef GROUPER_OPTIMIZER_HPP
#define GROUPER_OPTIMIZER_HPP

#include "grouper/network.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace grouper {

enum class OptimizerKind { Adam, FixedStep };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(const std::string& tag);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

// Adam moments for a single parameter matrix; FixedStep keeps no state.
struct AdamMoments {
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;
};

// One update of a free parameter matrix. `t` is the 1-based Adam step
// counter (bias correction); ignored for FixedStep.
void update_matrix(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad,
                   AdamMoments& moments, long t, const OptimizerConfig& cfg);

// Optimizer state over all trainable parameters of a network. The
// moment buffers mirror the gradient shapes; updates are deterministic.
class TrainState {
public:
    TrainState(const Network& net, OptimizerConfig cfg, std::uint64_t seed = 0);

    // p <- p - lr g (FixedStep) or the bias-corrected Adam update.
    void step(Network& net, const Gradients& grads);

    long steps_taken() const { return t_; }
    long epoch = 0;
    std::uint64_t seed = 0;
    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    long t_ = 0;
    std::vector<AdamMoments> mW_, mU_, mb_;
};

} // namespace grouper

#endif // GROUPER_OPTIMIZER_HPP
