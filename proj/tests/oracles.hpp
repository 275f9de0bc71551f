// Test-only reference implementations, kept independent of the library
// code paths they check.

#ifndef GROUPER_TESTS_ORACLES_HPP
#define GROUPER_TESTS_ORACLES_HPP

#include "grouper/assumptions.hpp"
#include "grouper/contracts.hpp"
#include "grouper/network.hpp"
#include "grouper/policy_values.hpp"
#include "grouper/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace oracles {

// Non-recursive expansion of the DC fund projection:
//   tV = x2 prod_{k=1..t} g_k + sum_{j=1..t} x5 x3 (1+x4)^j prod_{k=j..t} g_k
// with g_k = (1+i)(1 - rr_{age+k-1}) p_{age+k-1}.
inline grouper::PolicyValuePath dc_closed_form(const grouper::Contract& c,
                                               const grouper::ValuationAssumptions& a) {
    const int age = static_cast<int>(std::lround(c.x[grouper::kAge]));
    const double fund = c.x[grouper::kFund];
    const double salary = c.x[grouper::kSalary];
    const double scale = c.x[grouper::kSalaryScale];
    const double contribution = c.x[grouper::kContribution];
    const int horizon = 67 - age;

    auto g = [&](int k) {
        const int attained = age + k - 1;
        return (1.0 + a.dc_fund_rate) * (1.0 - a.retirement.rate(attained)) *
               grouper::survival_prob(a.mortality, static_cast<double>(attained), 1.0);
    };

    grouper::PolicyValuePath y(
        static_cast<std::size_t>(grouper::path_length(grouper::ProductLine::DCPlan)), 0.0);
    y[0] = fund;
    for (int t = 1; t <= horizon; ++t) {
        double value = fund;
        for (int k = 1; k <= t; ++k) value *= g(k);
        for (int j = 1; j <= t; ++j) {
            double term = contribution * salary * std::pow(1.0 + scale, j);
            for (int k = j; k <= t; ++k) term *= g(k);
            value += term;
        }
        y[static_cast<std::size_t>(t)] = value;
    }
    return y;
}

// Central finite differences of s(theta) = <upstream, forward(net, x)>.
// Returns the largest floored relative error over all parameters and
// input coordinates.
struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checks = 0;
};

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    return std::abs(analytic - numeric) / denom;
}

inline GradCheckResult finite_difference_check(grouper::Network net,
                                               const Eigen::MatrixXd& x,
                                               const Eigen::MatrixXd& upstream,
                                               double h = 1e-5) {
    auto scalar = [&](const grouper::Network& n, const Eigen::MatrixXd& input) {
        return (upstream.array() * grouper::forward(n, input).array()).sum();
    };

    grouper::Tape tape;
    grouper::forward(net, x, &tape);
    const grouper::Gradients grads = grouper::backward(net, tape, upstream);

    GradCheckResult res;
    auto update = [&res](double analytic, double numeric) {
        res.max_rel_err = std::max(res.max_rel_err, rel_err(analytic, numeric));
        ++res.checks;
    };

    // input gradient
    Eigen::MatrixXd xp = x;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double keep = xp(r, c);
            xp(r, c) = keep + h;
            const double up = scalar(net, xp);
            xp(r, c) = keep - h;
            const double dn = scalar(net, xp);
            xp(r, c) = keep;
            update(grads.input(r, c), (up - dn) / (2.0 * h));
        }

    // parameter gradients
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        grouper::Layer& l = net.layers[li];
        if (!l.trainable()) continue;
        auto check_matrix = [&](Eigen::MatrixXd& M, const Eigen::MatrixXd& dM) {
            for (Eigen::Index r = 0; r < M.rows(); ++r)
                for (Eigen::Index c = 0; c < M.cols(); ++c) {
                    const double keep = M(r, c);
                    M(r, c) = keep + h;
                    const double up = scalar(net, x);
                    M(r, c) = keep - h;
                    const double dn = scalar(net, x);
                    M(r, c) = keep;
                    update(dM(r, c), (up - dn) / (2.0 * h));
                }
        };
        check_matrix(l.W, grads.layers[li].dW);
        if (l.U.size() > 0) check_matrix(l.U, grads.layers[li].dU);
        if (l.b.size() > 0) {
            Eigen::MatrixXd b = l.b;
            for (Eigen::Index r = 0; r < b.rows(); ++r) {
                const double keep = l.b(r);
                l.b(r) = keep + h;
                const double up = scalar(net, x);
                l.b(r) = keep - h;
                const double dn = scalar(net, x);
                l.b(r) = keep;
                update(grads.layers[li].db(r), (up - dn) / (2.0 * h));
            }
        }
    }
    return res;
}

// Random small layer stack covering every layer kind; ends with a scale
// layer (kind alternating with the draw) so both scale maps get hit.
inline grouper::Network random_stack(grouper::Rng& rng) {
    grouper::Network net;
    net.input_dim = 2 + static_cast<int>(rng.next_below(4)); // 2..5
    int dim = net.input_dim;

    const int hidden_layers = 1 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < hidden_layers; ++i) {
        switch (rng.next_below(4)) {
            case 0: {
                const int out = 1 + static_cast<int>(rng.next_below(4));
                net.layers.push_back(
                    grouper::dense_layer(dim, out, rng.next_below(2) == 0));
                dim = out;
                break;
            }
            case 1: {
                const int units = 1 + static_cast<int>(rng.next_below(3));
                const int steps = 1 + static_cast<int>(rng.next_below(3));
                net.layers.push_back(grouper::recurrent_layer(dim, units, steps));
                dim = units * steps;
                break;
            }
            case 2: {
                const int units = 1 + static_cast<int>(rng.next_below(3));
                const int steps = 1 + static_cast<int>(rng.next_below(2));
                net.layers.push_back(grouper::lstm_layer(dim, units, steps));
                dim = units * steps;
                break;
            }
            default:
                net.layers.push_back(grouper::tanh_layer(dim));
                break;
        }
    }
    // keep scale inputs in a moderate range
    net.layers.push_back(grouper::tanh_layer(dim));
    const double lo = rng.uniform(0.0, 2.0);
    const double hi = lo + rng.uniform(1.0, 50.0);
    net.layers.push_back(grouper::scale_layer(rng.next_below(2) == 0
                                                  ? grouper::LayerKind::ScaleLinear
                                                  : grouper::LayerKind::ScaleLog,
                                              dim, lo, hi));
    net.output_dim = dim;
    net.validate();
    grouper::init_weights(net, rng.next_u64());
    return net;
}

} // namespace oracles

#endif // GROUPER_TESTS_ORACLES_HPP
