#include "grouper/network.hpp"

#include "grouper/errors.hpp"
#include "grouper/rng.hpp"

#include <cmath>
#include <string>

namespace grouper {

std::string to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::Dense: return "dense";
        case LayerKind::Recurrent: return "recurrent";
        case LayerKind::Lstm: return "lstm";
        case LayerKind::Tanh: return "tanh";
        case LayerKind::ScaleLinear: return "scale_linear";
        case LayerKind::ScaleLog: return "scale_log";
    }
    return "?";
}

int Layer::units() const {
    if (kind == LayerKind::Recurrent) return static_cast<int>(W.rows());
    if (kind == LayerKind::Lstm) return static_cast<int>(W.rows() / 4);
    return 0;
}

Layer dense_layer(int in, int out, bool bias, int steps) {
    Layer l;
    l.kind = LayerKind::Dense;
    l.steps = steps;
    l.in_dim = in * steps;
    l.out_dim = out * steps;
    l.W = Eigen::MatrixXd::Zero(out, in);
    l.has_bias = bias;
    l.b = Eigen::VectorXd::Zero(bias ? out : 0);
    return l;
}

Layer recurrent_layer(int in, int units, int steps) {
    Layer l;
    l.kind = LayerKind::Recurrent;
    l.steps = steps;
    l.in_dim = in;
    l.out_dim = units * steps;
    l.W = Eigen::MatrixXd::Zero(units, in);
    l.U = Eigen::MatrixXd::Zero(units, units);
    l.b = Eigen::VectorXd::Zero(units);
    return l;
}

Layer lstm_layer(int in, int units, int steps) {
    Layer l;
    l.kind = LayerKind::Lstm;
    l.steps = steps;
    l.in_dim = in;
    l.out_dim = units * steps;
    l.W = Eigen::MatrixXd::Zero(4 * units, in);
    l.U = Eigen::MatrixXd::Zero(4 * units, units);
    l.b = Eigen::VectorXd::Zero(4 * units);
    return l;
}

Layer tanh_layer(int dim) {
    Layer l;
    l.kind = LayerKind::Tanh;
    l.in_dim = l.out_dim = dim;
    l.has_bias = false;
    return l;
}

Layer scale_layer(LayerKind kind, int dim, double out_min, double out_max) {
    if (kind != LayerKind::ScaleLinear && kind != LayerKind::ScaleLog)
        throw ShapeError("scale_layer: kind must be a scale kind");
    if (!(out_min < out_max))
        throw RangeError("scale_layer: requires out_min < out_max");
    Layer l;
    l.kind = kind;
    l.in_dim = l.out_dim = dim;
    l.has_bias = false;
    l.out_min = out_min;
    l.out_max = out_max;
    return l;
}

void Network::validate() const {
    if (layers.empty()) throw ShapeError("network has no layers");
    int dim = input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const Layer& l = layers[i];
        const std::string at = "layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
        if (l.in_dim != dim)
            throw ShapeError(at + ": expects input dim " + std::to_string(l.in_dim) +
                             ", got " + std::to_string(dim));
        switch (l.kind) {
            case LayerKind::Dense:
                if (l.steps < 1 || l.in_dim != l.steps * static_cast<int>(l.W.cols()) ||
                    l.out_dim != l.steps * static_cast<int>(l.W.rows()))
                    throw ShapeError(at + ": weight shape inconsistent with dims");
                if (l.has_bias && l.b.size() != l.W.rows())
                    throw ShapeError(at + ": bias size mismatch");
                break;
            case LayerKind::Recurrent:
                if (l.W.cols() != l.in_dim || l.U.rows() != l.U.cols() ||
                    l.U.rows() != l.W.rows() || l.out_dim != l.steps * static_cast<int>(l.W.rows()) ||
                    l.b.size() != l.W.rows())
                    throw ShapeError(at + ": weight shape inconsistent with dims");
                break;
            case LayerKind::Lstm:
                if (l.W.rows() % 4 != 0 || l.W.cols() != l.in_dim ||
                    l.U.rows() != l.W.rows() || l.U.cols() * 4 != l.U.rows() ||
                    l.out_dim != l.steps * static_cast<int>(l.U.cols()) ||
                    l.b.size() != l.W.rows())
                    throw ShapeError(at + ": weight shape inconsistent with dims");
                break;
            case LayerKind::Tanh:
            case LayerKind::ScaleLinear:
            case LayerKind::ScaleLog:
                if (l.in_dim != l.out_dim)
                    throw ShapeError(at + ": must preserve dimension");
                break;
        }
        dim = l.out_dim;
    }
    if (dim != output_dim)
        throw ShapeError("network output dim " + std::to_string(output_dim) +
                         " does not match last layer (" + std::to_string(dim) + ")");
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers)
        if (l.trainable())
            n += static_cast<std::size_t>(l.W.size() + l.U.size() + l.b.size());
    return n;
}

namespace {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

double log_span(const Layer& l) { return std::log1p(l.out_max - l.out_min); }

} // namespace

double scale_apply(const Layer& scale, double z) {
    if (scale.kind == LayerKind::ScaleLinear)
        return scale.out_min + (z + 1.0) / 2.0 * (scale.out_max - scale.out_min);
    return std::exp((z + 1.0) / 2.0 * log_span(scale)) - 1.0 + scale.out_min;
}

double scale_invert(const Layer& scale, double y) {
    if (scale.kind == LayerKind::ScaleLinear)
        return 2.0 * (y - scale.out_min) / (scale.out_max - scale.out_min) - 1.0;
    return 2.0 * std::log1p(y - scale.out_min) / log_span(scale) - 1.0;
}

Eigen::MatrixXd forward(const Network& net, const Eigen::MatrixXd& X, Tape* tape) {
    if (X.rows() != net.input_dim)
        throw ShapeError("forward: input has " + std::to_string(X.rows()) +
                         " rows, network expects " + std::to_string(net.input_dim));
    if (tape) {
        tape->layers.assign(net.layers.size(), {});
        tape->valid = true;
    }

    const Eigen::Index batch = X.cols();
    Eigen::MatrixXd cur = X;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const Layer& l = net.layers[li];
        Eigen::MatrixXd out;
        LayerCache* cache = tape ? &tape->layers[li] : nullptr;
        switch (l.kind) {
            case LayerKind::Dense: {
                const int rows = static_cast<int>(l.W.rows());
                const int cols = static_cast<int>(l.W.cols());
                out.resize(l.out_dim, batch);
                for (int s = 0; s < l.steps; ++s) {
                    out.middleRows(s * rows, rows).noalias() =
                        l.W * cur.middleRows(s * cols, cols);
                    if (l.has_bias)
                        out.middleRows(s * rows, rows).colwise() += l.b;
                }
                break;
            }
            case LayerKind::Recurrent: {
                const int u = l.units();
                // The same input feeds every step, so the input part of
                // the pre-activation is computed once.
                Eigen::MatrixXd base = l.W * cur;
                base.colwise() += l.b;
                out.resize(l.out_dim, batch);
                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(u, batch);
                for (int s = 0; s < l.steps; ++s) {
                    Eigen::MatrixXd a = base;
                    a.noalias() += l.U * h;
                    h = a.array().tanh();
                    out.middleRows(s * u, u) = h;
                }
                break;
            }
            case LayerKind::Lstm: {
                const int u = l.units();
                Eigen::MatrixXd base = l.W * cur;
                base.colwise() += l.b;
                out.resize(l.out_dim, batch);
                if (cache) {
                    cache->gates.resize(4 * u * l.steps, batch);
                    cache->cells.resize(u * l.steps, batch);
                }
                Eigen::MatrixXd h = Eigen::MatrixXd::Zero(u, batch);
                Eigen::MatrixXd c = Eigen::MatrixXd::Zero(u, batch);
                for (int s = 0; s < l.steps; ++s) {
                    Eigen::MatrixXd z = base;
                    z.noalias() += l.U * h;
                    Eigen::ArrayXXd gi = sigmoid(z.topRows(u).array());
                    Eigen::ArrayXXd gf = sigmoid(z.middleRows(u, u).array());
                    Eigen::ArrayXXd gg = z.middleRows(2 * u, u).array().tanh();
                    Eigen::ArrayXXd go = sigmoid(z.bottomRows(u).array());
                    c = (gf * c.array() + gi * gg).matrix();
                    h = (go * c.array().tanh()).matrix();
                    out.middleRows(s * u, u) = h;
                    if (cache) {
                        cache->gates.middleRows(s * 4 * u, u) = gi.matrix();
                        cache->gates.middleRows(s * 4 * u + u, u) = gf.matrix();
                        cache->gates.middleRows(s * 4 * u + 2 * u, u) = gg.matrix();
                        cache->gates.middleRows(s * 4 * u + 3 * u, u) = go.matrix();
                        cache->cells.middleRows(s * u, u) = c;
                    }
                }
                break;
            }
            case LayerKind::Tanh:
                out = cur.array().tanh().matrix();
                break;
            case LayerKind::ScaleLinear:
                out = (l.out_min + (cur.array() + 1.0) / 2.0 * (l.out_max - l.out_min))
                          .matrix();
                break;
            case LayerKind::ScaleLog: {
                const double span = log_span(l);
                out = (((cur.array() + 1.0) / 2.0 * span).exp() - 1.0 + l.out_min)
                          .matrix();
                break;
            }
        }
        if (cache) {
            cache->in = cur;
            cache->out = out;
        }
        cur = std::move(out);
    }
    return cur;
}

Gradients backward(const Network& net, const Tape& tape,
                   const Eigen::MatrixXd& upstream) {
    if (!tape.valid || tape.layers.size() != net.layers.size())
        throw StateError("backward: no cached forward pass for this network");
    if (upstream.rows() != net.output_dim ||
        upstream.cols() != tape.layers.back().out.cols())
        throw ShapeError("backward: upstream shape mismatch");

    Gradients g;
    g.layers.resize(net.layers.size());
    Eigen::MatrixXd grad = upstream;

    for (std::size_t i = net.layers.size(); i-- > 0;) {
        const Layer& l = net.layers[i];
        const LayerCache& cache = tape.layers[i];
        LayerGrads& lg = g.layers[i];
        Eigen::MatrixXd down(l.in_dim, grad.cols());
        switch (l.kind) {
            case LayerKind::Dense: {
                const int rows = static_cast<int>(l.W.rows());
                const int cols = static_cast<int>(l.W.cols());
                lg.dW = Eigen::MatrixXd::Zero(rows, cols);
                if (l.has_bias) lg.db = Eigen::VectorXd::Zero(rows);
                for (int s = 0; s < l.steps; ++s) {
                    const auto gs = grad.middleRows(s * rows, rows);
                    lg.dW.noalias() += gs * cache.in.middleRows(s * cols, cols).transpose();
                    if (l.has_bias) lg.db += gs.rowwise().sum();
                    down.middleRows(s * cols, cols).noalias() = l.W.transpose() * gs;
                }
                break;
            }
            case LayerKind::Recurrent: {
                const int u = l.units();
                lg.dU = Eigen::MatrixXd::Zero(u, u);
                Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(u, grad.cols());
                Eigen::MatrixXd dsum = Eigen::MatrixXd::Zero(u, grad.cols());
                for (int s = l.steps; s-- > 0;) {
                    const auto h = cache.out.middleRows(s * u, u);
                    Eigen::MatrixXd dh = grad.middleRows(s * u, u);
                    dh.noalias() += l.U.transpose() * delta;
                    delta = (dh.array() * (1.0 - h.array().square())).matrix();
                    if (s > 0)
                        lg.dU.noalias() +=
                            delta * cache.out.middleRows((s - 1) * u, u).transpose();
                    dsum += delta;
                }
                lg.dW.noalias() = dsum * cache.in.transpose();
                lg.db = dsum.rowwise().sum();
                down.noalias() = l.W.transpose() * dsum;
                break;
            }
            case LayerKind::Lstm: {
                const int u = l.units();
                lg.dU = Eigen::MatrixXd::Zero(4 * u, u);
                Eigen::MatrixXd dh_carry = Eigen::MatrixXd::Zero(u, grad.cols());
                Eigen::MatrixXd dc_carry = Eigen::MatrixXd::Zero(u, grad.cols());
                Eigen::MatrixXd dsum = Eigen::MatrixXd::Zero(4 * u, grad.cols());
                Eigen::MatrixXd dz(4 * u, grad.cols());
                for (int s = l.steps; s-- > 0;) {
                    const auto gi = cache.gates.middleRows(s * 4 * u, u).array();
                    const auto gf = cache.gates.middleRows(s * 4 * u + u, u).array();
                    const auto gg = cache.gates.middleRows(s * 4 * u + 2 * u, u).array();
                    const auto go = cache.gates.middleRows(s * 4 * u + 3 * u, u).array();
                    const auto ct = cache.cells.middleRows(s * u, u).array();
                    const Eigen::ArrayXXd tc = ct.tanh();

                    Eigen::ArrayXXd dh = grad.middleRows(s * u, u).array() + dh_carry.array();
                    Eigen::ArrayXXd dc = dh * go * (1.0 - tc.square()) + dc_carry.array();

                    Eigen::ArrayXXd dgi = dc * gg;
                    Eigen::ArrayXXd dgf =
                        s > 0 ? (dc * cache.cells.middleRows((s - 1) * u, u).array()).eval()
                              : Eigen::ArrayXXd::Zero(u, grad.cols()).eval();
                    Eigen::ArrayXXd dgg = dc * gi;
                    Eigen::ArrayXXd dgo = dh * tc;

                    dz.middleRows(0, u) = (dgi * gi * (1.0 - gi)).matrix();
                    dz.middleRows(u, u) = (dgf * gf * (1.0 - gf)).matrix();
                    dz.middleRows(2 * u, u) = (dgg * (1.0 - gg.square())).matrix();
                    dz.middleRows(3 * u, u) = (dgo * go * (1.0 - go)).matrix();

                    if (s > 0)
                        lg.dU.noalias() +=
                            dz * cache.out.middleRows((s - 1) * u, u).transpose();
                    dsum += dz;
                    dh_carry.noalias() = l.U.transpose() * dz;
                    dc_carry = (dc * gf).matrix();
                }
                lg.dW.noalias() = dsum * cache.in.transpose();
                lg.db = dsum.rowwise().sum();
                down.noalias() = l.W.transpose() * dsum;
                break;
            }
            case LayerKind::Tanh:
                down = (grad.array() * (1.0 - cache.out.array().square())).matrix();
                break;
            case LayerKind::ScaleLinear:
                down = grad * ((l.out_max - l.out_min) / 2.0);
                break;
            case LayerKind::ScaleLog: {
                const double span = log_span(l);
                down = (grad.array() * (cache.out.array() - l.out_min + 1.0) * (span / 2.0))
                           .matrix();
                break;
            }
        }
        grad = std::move(down);
    }
    g.input = std::move(grad);
    return g;
}

void init_weights(Network& net, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x9e11));
    auto fill = [&rng](Eigen::MatrixXd& M, double bound) {
        for (Eigen::Index r = 0; r < M.rows(); ++r)
            for (Eigen::Index c = 0; c < M.cols(); ++c)
                M(r, c) = rng.uniform(-bound, bound);
    };
    for (auto& l : net.layers) {
        if (!l.trainable()) continue;
        const int u = l.units();
        switch (l.kind) {
            case LayerKind::Dense:
                fill(l.W, std::sqrt(6.0 / static_cast<double>(l.W.rows() + l.W.cols())));
                if (l.has_bias) l.b.setZero();
                break;
            case LayerKind::Recurrent:
                fill(l.W, std::sqrt(6.0 / static_cast<double>(u + l.W.cols())));
                fill(l.U, std::sqrt(6.0 / static_cast<double>(2 * u)));
                l.b.setZero();
                break;
            case LayerKind::Lstm:
                fill(l.W, std::sqrt(6.0 / static_cast<double>(u + l.W.cols())));
                fill(l.U, std::sqrt(6.0 / static_cast<double>(2 * u)));
                l.b.setZero();
                l.b.segment(u, u).setOnes(); // forget-gate bias
                break;
            default:
                break;
        }
    }
}

} // namespace grouper
