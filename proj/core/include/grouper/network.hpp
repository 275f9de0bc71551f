#ifndef GROUPER_NETWORK_HPP
#define GROUPER_NETWORK_HPP

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace grouper {

// Layer kinds. Recurrent is an Elman cell unrolled over `steps` output
// positions with the same input fed at every step; Lstm is the gated
// variant behind the same interface. Scale layers map [-1,1]^T onto the
// target range and carry no trainable parameters.
enum class LayerKind { Dense, Recurrent, Lstm, Tanh, ScaleLinear, ScaleLog };

std::string to_string(LayerKind kind);

struct Layer {
    LayerKind kind = LayerKind::Dense;
    int in_dim = 0;
    int out_dim = 0;

    // Dense: W (rows x cols) applied to each of `steps` input chunks,
    //        so in = steps*cols and out = steps*rows (steps > 1 is the
    //        shared per-step readout).
    // Recurrent: W (units x in), U (units x units), out = steps*units.
    // Lstm: W (4u x in), U (4u x u), gate order [input forget cell output].
    Eigen::MatrixXd W;
    Eigen::MatrixXd U;
    Eigen::VectorXd b;
    bool has_bias = true;
    int steps = 1;

    // Scale target range.
    double out_min = -1.0;
    double out_max = 1.0;

    bool trainable() const {
        return kind == LayerKind::Dense || kind == LayerKind::Recurrent ||
               kind == LayerKind::Lstm;
    }
    int units() const; // Recurrent/Lstm hidden width
};

Layer dense_layer(int in, int out, bool bias = true, int steps = 1);
Layer recurrent_layer(int in, int units, int steps);
Layer lstm_layer(int in, int units, int steps);
Layer tanh_layer(int dim);
Layer scale_layer(LayerKind kind, int dim, double out_min, double out_max);

struct Network {
    std::vector<Layer> layers;
    int input_dim = 0;
    int output_dim = 0;

    void validate() const; // throws ShapeError when dimensions do not chain
    std::size_t parameter_count() const;
};

// Per-layer forward caches; needed by backward.
struct LayerCache {
    Eigen::MatrixXd in;
    Eigen::MatrixXd out;
    Eigen::MatrixXd gates; // lstm: post-activation gates, (4u*steps) x batch
    Eigen::MatrixXd cells; // lstm: cell states, (u*steps) x batch
};

struct Tape {
    std::vector<LayerCache> layers;
    bool valid = false;
};

// Batched evaluation; columns of X are samples. Pass a tape to record
// the forward pass for a later backward call.
Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& X,
                        Tape* tape = nullptr);

struct LayerGrads {
    Eigen::MatrixXd dW;
    Eigen::MatrixXd dU;
    Eigen::VectorXd db;
};

struct Gradients {
    std::vector<LayerGrads> layers;
    Eigen::MatrixXd input; // gradient w.r.t. the network input
};

// Reverse-mode gradients of <upstream, forward(net, X)> summed over the
// batch. Requires the tape of the matching forward pass (StateError
// otherwise).
Gradients backward(const Network& net, const Tape& tape,
                   const Eigen::MatrixXd& upstream);

// Glorot-uniform weights, zero biases (LSTM forget-gate bias 1);
// deterministic in seed.
void init_weights(Network& net, std::uint64_t seed);

// Inverse of a scale layer's map, used by tests and diagnostics.
double scale_apply(const Layer& scale, double z);
double scale_invert(const Layer& scale, double y);

// JSON (de)serialization. Values are printed so that a round trip
// reproduces every weight bit-exactly. Malformed documents raise
// ParseError naming the field, wrong-sized arrays raise ShapeError with
// the layer index.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

} // namespace grouper

#endif // GROUPER_NETWORK_HPP
