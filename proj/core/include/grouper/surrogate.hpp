#ifndef GROUPER_SURROGATE_HPP
#define GROUPER_SURROGATE_HPP

#include "grouper/dataset.hpp"
#include "grouper/losses.hpp"
#include "grouper/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace grouper {

enum class RecurrentCell { Elman, Lstm };

struct TrainConfig {
    int hidden = 64;                       // width of the input embedding
    int rec_units = 64;                    // recurrent state width
    RecurrentCell cell = RecurrentCell::Elman;
    LossKind loss_kind = LossKind::MSE;
    int max_epochs = 300;                  // paper-scale runs use 1500
    int patience = 50;                     // early-stopping window
    int batch_size = 64;
    double lr = 1e-3;                      // Adam defaults otherwise
    std::uint64_t seed = 1;
};

// input 5 -> Dense(hidden) -> tanh -> recurrent(rec_units, T steps)
// -> shared Dense 1 per step -> scale layer. Term life uses the
// logarithmic scale (targets concentrate near zero), DC the linear one.
// target_min/target_max set the scale layer's range.
Network make_surrogate_network(ProductLine line, const TrainConfig& cfg,
                               double target_min, double target_max);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    Network net;
    std::vector<EpochStats> log;
    int best_epoch = -1;
    double best_val_loss = 0.0;
};

// Mini-batch Adam on scaled inputs against raw-currency targets (the
// loss is computed after the scale layer). Keeps the weights of the
// best validation epoch; stops after `patience` epochs without
// improvement. Throws TrainingError when the loss turns non-finite.
TrainResult train_surrogate(const DataSplit& data, const TrainConfig& cfg,
                            double target_min, double target_max);

struct SurrogateEnsemble {
    std::vector<Network> members;
    std::vector<LossKind> member_losses;

    int output_dim() const;
    void validate() const;
};

// Prediction = arithmetic mean of member outputs.
Eigen::MatrixXd ensemble_forward(const SurrogateEnsemble& ens,
                                 const Eigen::MatrixXd& X);

// Gradient of <upstream, mean member output> w.r.t. the inputs.
Eigen::MatrixXd ensemble_input_gradient(const SurrogateEnsemble& ens,
                                        const Eigen::MatrixXd& X,
                                        const Eigen::MatrixXd& upstream);

enum class EnsembleLossMix { AllMse, AllMae, Mixed };

EnsembleLossMix loss_mix_from_string(const std::string& tag);
std::string to_string(EnsembleLossMix mix);

struct EnsembleTrainResult {
    SurrogateEnsemble ensemble;
    std::vector<TrainResult> member_results;
};

// Members train with derived seeds (and alternating losses when mixed),
// in parallel up to the worker cap.
EnsembleTrainResult train_ensemble(const DataSplit& data, const TrainConfig& cfg,
                                   int n_members, EnsembleLossMix mix);

std::string ensemble_to_json(const SurrogateEnsemble& ens);
SurrogateEnsemble ensemble_from_json(const std::string& text);
SurrogateEnsemble load_ensemble(const std::string& path);
void save_ensemble(const std::string& path, const SurrogateEnsemble& ens);

} // namespace grouper

#endif // GROUPER_SURROGATE_HPP
