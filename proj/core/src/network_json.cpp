#include "grouper/errors.hpp"
#include "grouper/network.hpp"

#include <json.hpp>

namespace grouper {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(M.size()));
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c)
            flat.push_back(M(r, c));
    return json(flat);
}

const json& require(const json& j, const char* field, const std::string& where) {
    auto it = j.find(field);
    if (it == j.end())
        throw ParseError(std::string("missing field '") + field + "'", where);
    return *it;
}

Eigen::MatrixXd matrix_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                 const std::string& where) {
    if (!arr.is_array())
        throw ParseError("expected a flat weight array", where);
    if (static_cast<Eigen::Index>(arr.size()) != rows * cols)
        throw ShapeError(where + ": expected " + std::to_string(rows * cols) +
                         " values, got " + std::to_string(arr.size()));
    Eigen::MatrixXd M(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            M(r, c) = arr[k++].get<double>();
    return M;
}

Eigen::VectorXd vector_from_json(const json& arr, Eigen::Index n, const std::string& where) {
    Eigen::MatrixXd M = matrix_from_json(arr, n, 1, where);
    return M.col(0);
}

} // namespace

std::string network_to_json(const Network& net) {
    json j;
    j["input_dim"] = net.input_dim;
    j["output_dim"] = net.output_dim;
    json layers = json::array();
    for (const auto& l : net.layers) {
        json lj;
        lj["kind"] = to_string(l.kind);
        switch (l.kind) {
            case LayerKind::Dense:
                lj["steps"] = l.steps;
                lj["rows"] = l.W.rows();
                lj["cols"] = l.W.cols();
                lj["has_bias"] = l.has_bias;
                lj["W"] = matrix_to_json(l.W);
                if (l.has_bias) lj["b"] = matrix_to_json(l.b);
                break;
            case LayerKind::Recurrent:
            case LayerKind::Lstm:
                lj["steps"] = l.steps;
                lj["in"] = l.W.cols();
                lj["units"] = l.units();
                lj["W"] = matrix_to_json(l.W);
                lj["U"] = matrix_to_json(l.U);
                lj["b"] = matrix_to_json(l.b);
                break;
            case LayerKind::Tanh:
                lj["dim"] = l.in_dim;
                break;
            case LayerKind::ScaleLinear:
            case LayerKind::ScaleLog:
                lj["dim"] = l.in_dim;
                lj["min"] = l.out_min;
                lj["max"] = l.out_max;
                break;
        }
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    return j.dump();
}

Network network_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid network JSON: ") + e.what(), "document");
    }
    Network net;
    net.input_dim = require(j, "input_dim", "document").get<int>();
    net.output_dim = require(j, "output_dim", "document").get<int>();
    const json& layers = require(j, "layers", "document");
    if (!layers.is_array()) throw ParseError("'layers' must be an array", "document");

    for (std::size_t i = 0; i < layers.size(); ++i) {
        const json& lj = layers[i];
        const std::string where = "layers[" + std::to_string(i) + "]";
        const std::string kind = require(lj, "kind", where).get<std::string>();
        if (kind == "dense") {
            const int steps = require(lj, "steps", where).get<int>();
            const auto rows = require(lj, "rows", where).get<Eigen::Index>();
            const auto cols = require(lj, "cols", where).get<Eigen::Index>();
            const bool bias = require(lj, "has_bias", where).get<bool>();
            Layer l = dense_layer(static_cast<int>(cols), static_cast<int>(rows), bias, steps);
            l.W = matrix_from_json(require(lj, "W", where), rows, cols, where + ".W");
            if (bias) l.b = vector_from_json(require(lj, "b", where), rows, where + ".b");
            net.layers.push_back(std::move(l));
        } else if (kind == "recurrent" || kind == "lstm") {
            const int steps = require(lj, "steps", where).get<int>();
            const int in = require(lj, "in", where).get<int>();
            const int units = require(lj, "units", where).get<int>();
            Layer l = kind == "recurrent" ? recurrent_layer(in, units, steps)
                                          : lstm_layer(in, units, steps);
            const Eigen::Index wrows = l.W.rows();
            l.W = matrix_from_json(require(lj, "W", where), wrows, in, where + ".W");
            l.U = matrix_from_json(require(lj, "U", where), wrows, units, where + ".U");
            l.b = vector_from_json(require(lj, "b", where), wrows, where + ".b");
            net.layers.push_back(std::move(l));
        } else if (kind == "tanh") {
            net.layers.push_back(tanh_layer(require(lj, "dim", where).get<int>()));
        } else if (kind == "scale_linear" || kind == "scale_log") {
            net.layers.push_back(scale_layer(
                kind == "scale_linear" ? LayerKind::ScaleLinear : LayerKind::ScaleLog,
                require(lj, "dim", where).get<int>(),
                require(lj, "min", where).get<double>(),
                require(lj, "max", where).get<double>()));
        } else {
            throw ParseError("unknown layer kind '" + kind + "'", where);
        }
    }
    net.validate();
    return net;
}

} // namespace grouper
