#include "grouper/surrogate.hpp"

#include "grouper/errors.hpp"
#include "grouper/optimizer.hpp"
#include "grouper/parallel.hpp"
#include "grouper/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace grouper {

Network make_surrogate_network(ProductLine line, const TrainConfig& cfg,
                               double target_min, double target_max) {
    const int T = path_length(line);
    Network net;
    net.input_dim = 5;
    net.output_dim = T;
    net.layers.push_back(dense_layer(5, cfg.hidden));
    net.layers.push_back(tanh_layer(cfg.hidden));
    if (cfg.cell == RecurrentCell::Elman)
        net.layers.push_back(recurrent_layer(cfg.hidden, cfg.rec_units, T));
    else
        net.layers.push_back(lstm_layer(cfg.hidden, cfg.rec_units, T));
    net.layers.push_back(dense_layer(cfg.rec_units, 1, true, T));
    net.layers.push_back(scale_layer(line == ProductLine::TermLife
                                         ? LayerKind::ScaleLog
                                         : LayerKind::ScaleLinear,
                                     T, target_min, target_max));
    net.validate();
    return net;
}

namespace {

std::vector<Layer> snapshot_weights(const Network& net) { return net.layers; }

double evaluate_loss(const Network& net, LossKind kind, const Dataset& d) {
    const Eigen::MatrixXd pred = forward(net, d.X);
    return loss(kind, pred, d.Y).value;
}

} // namespace

TrainResult train_surrogate(const DataSplit& data, const TrainConfig& cfg,
                            double target_min, double target_max) {
    if (data.train.size() < 1 || data.validation.size() < 1)
        throw RangeError("train_surrogate: empty train or validation split");
    if (data.train.X.rows() != 5)
        throw ShapeError("train_surrogate: expected 5 input features");

    TrainResult result;
    result.net = make_surrogate_network(data.train.line, cfg, target_min, target_max);
    init_weights(result.net, cfg.seed);

    OptimizerConfig opt;
    opt.kind = OptimizerKind::Adam;
    opt.lr = cfg.lr;
    TrainState state(result.net, opt, cfg.seed);

    const auto n_train = static_cast<std::size_t>(data.train.size());
    std::vector<Eigen::Index> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    std::vector<Layer> best;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;

    const int batch = std::max(1, cfg.batch_size);
    Eigen::MatrixXd bx(5, batch), by(data.train.Y.rows(), batch);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(cfg.seed, 0xe70c + static_cast<std::uint64_t>(epoch)));
        deterministic_shuffle(order, shuffle_rng);

        double train_loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(batch)) {
            const auto b = static_cast<Eigen::Index>(
                std::min<std::size_t>(static_cast<std::size_t>(batch), n_train - start));
            bx.resize(5, b);
            by.resize(data.train.Y.rows(), b);
            for (Eigen::Index k = 0; k < b; ++k) {
                bx.col(k) = data.train.X.col(order[start + static_cast<std::size_t>(k)]);
                by.col(k) = data.train.Y.col(order[start + static_cast<std::size_t>(k)]);
            }
            Tape tape;
            const Eigen::MatrixXd pred = forward(result.net, bx, &tape);
            const LossResult lr = loss(cfg.loss_kind, pred, by);
            if (!std::isfinite(lr.value))
                throw TrainingError("training loss diverged", epoch);
            Gradients grads = backward(result.net, tape, lr.grad);
            state.step(result.net, grads);
            train_loss_sum += lr.value * static_cast<double>(b);
            seen += static_cast<std::size_t>(b);
        }
        state.epoch = epoch;

        const double train_loss = train_loss_sum / static_cast<double>(seen);
        const double val_loss = evaluate_loss(result.net, cfg.loss_kind, data.validation);
        if (!std::isfinite(val_loss))
            throw TrainingError("validation loss diverged", epoch);
        result.log.push_back({epoch, train_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            best_epoch = epoch;
            best = snapshot_weights(result.net);
        } else if (epoch - best_epoch >= cfg.patience) {
            break;
        }
    }

    result.net.layers = std::move(best);
    result.best_epoch = best_epoch;
    result.best_val_loss = best_val;
    return result;
}

int SurrogateEnsemble::output_dim() const {
    return members.empty() ? 0 : members.front().output_dim;
}

void SurrogateEnsemble::validate() const {
    if (members.empty()) throw ShapeError("ensemble needs at least one member");
    if (member_losses.size() != members.size())
        throw ShapeError("ensemble: one loss tag per member required");
    for (const auto& m : members) {
        m.validate();
        if (m.input_dim != members.front().input_dim ||
            m.output_dim != members.front().output_dim)
            throw ShapeError("ensemble members disagree on dimensions");
    }
}

Eigen::MatrixXd ensemble_forward(const SurrogateEnsemble& ens, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd sum;
    for (const auto& m : ens.members) {
        Eigen::MatrixXd out = forward(m, X);
        if (sum.size() == 0)
            sum = std::move(out);
        else
            sum += out;
    }
    return sum / static_cast<double>(ens.members.size());
}

Eigen::MatrixXd ensemble_input_gradient(const SurrogateEnsemble& ens,
                                        const Eigen::MatrixXd& X,
                                        const Eigen::MatrixXd& upstream) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(X.rows(), X.cols());
    for (const auto& m : ens.members) {
        Tape tape;
        forward(m, X, &tape);
        sum += backward(m, tape, upstream).input;
    }
    return sum / static_cast<double>(ens.members.size());
}

EnsembleLossMix loss_mix_from_string(const std::string& tag) {
    if (tag == "mse") return EnsembleLossMix::AllMse;
    if (tag == "mae") return EnsembleLossMix::AllMae;
    if (tag == "mixed") return EnsembleLossMix::Mixed;
    throw RangeError("unknown ensemble loss mix '" + tag + "' (expected mse|mae|mixed)");
}

std::string to_string(EnsembleLossMix mix) {
    switch (mix) {
        case EnsembleLossMix::AllMse: return "mse";
        case EnsembleLossMix::AllMae: return "mae";
        case EnsembleLossMix::Mixed: return "mixed";
    }
    return "?";
}

EnsembleTrainResult train_ensemble(const DataSplit& data, const TrainConfig& cfg,
                                   int n_members, EnsembleLossMix mix) {
    if (n_members < 1) throw RangeError("train_ensemble: n_members must be >= 1");

    // Scale-layer range from the data the trainer sees.
    double lo = std::min(data.train.Y.minCoeff(),
                         std::min(data.validation.Y.minCoeff(), data.test.Y.minCoeff()));
    double hi = std::max(data.train.Y.maxCoeff(),
                         std::max(data.validation.Y.maxCoeff(), data.test.Y.maxCoeff()));
    if (!(lo < hi)) hi = lo + 1.0;

    auto member_loss = [mix](std::size_t k) {
        switch (mix) {
            case EnsembleLossMix::AllMse: return LossKind::MSE;
            case EnsembleLossMix::AllMae: return LossKind::MAE;
            case EnsembleLossMix::Mixed: break;
        }
        return k % 2 == 0 ? LossKind::MSE : LossKind::MAE;
    };

    EnsembleTrainResult out;
    out.member_results.resize(static_cast<std::size_t>(n_members));

    parallel_for(static_cast<std::size_t>(n_members), [&](std::size_t k) {
        TrainConfig member_cfg = cfg;
        member_cfg.seed = derive_seed(cfg.seed, 0xa11ce + k);
        member_cfg.loss_kind = member_loss(k);
        out.member_results[k] = train_surrogate(data, member_cfg, lo, hi);
    });

    for (std::size_t k = 0; k < out.member_results.size(); ++k) {
        out.ensemble.members.push_back(out.member_results[k].net);
        out.ensemble.member_losses.push_back(member_loss(k));
    }
    out.ensemble.validate();
    return out;
}

} // namespace grouper
