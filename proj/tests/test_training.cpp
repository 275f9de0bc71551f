#include "grouper/dataset.hpp"
#include "grouper/errors.hpp"
#include "grouper/evaluation.hpp"
#include "grouper/rng.hpp"
#include "grouper/surrogate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace grouper;

namespace {

// DC-like toy whose targets are linear in the first scaled feature;
// representable by the default architecture.
Dataset linear_toy(int n, std::uint64_t seed) {
    const int T = path_length(ProductLine::DCPlan);
    Dataset d;
    d.line = ProductLine::DCPlan;
    d.X.resize(5, n);
    d.Y.resize(T, n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < 5; ++f) d.X(f, i) = rng.uniform(-1.0, 1.0);
        for (int t = 0; t < T; ++t)
            d.Y(t, i) = (static_cast<double>(t) + 1.0) * (d.X(0, i) + 2.0) * 100.0;
    }
    return d;
}

SurrogateEnsemble single(const Network& net, LossKind kind = LossKind::MSE) {
    SurrogateEnsemble e;
    e.members = {net};
    e.member_losses = {kind};
    return e;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("split sizes follow the 30/25 rule") {
    const Dataset d = linear_toy(1000, 4);
    const DataSplit s = split(d, 9);
    CHECK(s.test.size() == 300);
    CHECK(s.validation.size() == 175);
    CHECK(s.train.size() == 525);
}

TEST_CASE("split is a deterministic partition") {
    // tag every sample through an injective feature value
    const int n = 200;
    Dataset d = linear_toy(n, 4);
    for (int i = 0; i < n; ++i) d.X(4, i) = static_cast<double>(i);

    const DataSplit a = split(d, 123);
    const DataSplit b = split(d, 123);
    CHECK(a.train.X == b.train.X);
    CHECK(a.test.X == b.test.X);

    std::multiset<double> seen;
    for (const Dataset* part : {&a.train, &a.validation, &a.test})
        for (Eigen::Index i = 0; i < part->size(); ++i)
            seen.insert(part->X(4, i));
    CHECK(seen.size() == static_cast<std::size_t>(n));
    std::multiset<double> expected;
    for (int i = 0; i < n; ++i) expected.insert(static_cast<double>(i));
    CHECK(seen == expected);

    const DataSplit c = split(d, 124);
    CHECK(a.train.X != c.train.X);
    CHECK_THROWS_AS(split(linear_toy(9, 1), 1), RangeError);
}

TEST_CASE("the linear toy trains to sub-percent relative error") {
    const Dataset d = linear_toy(1500, 11);
    const DataSplit s = split(d, 11);

    TrainConfig cfg;
    cfg.hidden = 12;
    cfg.rec_units = 12;
    cfg.max_epochs = 200;
    cfg.patience = 200;
    cfg.batch_size = 32;
    cfg.seed = 5;

    const double lo = d.Y.minCoeff();
    const double hi = d.Y.maxCoeff();
    const TrainResult r = train_surrogate(s, cfg, lo, hi);

    // mean relative error on the validation split
    const Eigen::MatrixXd pred = forward(r.net, s.validation.X);
    const Eigen::ArrayXXd re =
        (pred.array() - s.validation.Y.array()).abs() / s.validation.Y.array();
    CHECK(re.mean() < 0.01);

    // descent sanity: final training loss beats the initial epochs
    CHECK(r.log.back().train_loss < r.log.front().train_loss);
}

TEST_CASE("early stopping restores the best validation epoch") {
    const Dataset d = linear_toy(400, 21);
    const DataSplit s = split(d, 21);
    TrainConfig cfg;
    cfg.hidden = 8;
    cfg.rec_units = 8;
    cfg.max_epochs = 60;
    cfg.patience = 10;
    cfg.seed = 17;
    const TrainResult r = train_surrogate(s, cfg, d.Y.minCoeff(), d.Y.maxCoeff());

    double min_val = std::numeric_limits<double>::infinity();
    for (const auto& row : r.log) min_val = std::min(min_val, row.val_loss);
    CHECK(r.best_val_loss == min_val);
    CHECK(r.log[static_cast<std::size_t>(r.best_epoch)].val_loss == min_val);

    // the returned network reproduces the recorded best validation loss
    const Eigen::MatrixXd pred = forward(r.net, s.validation.X);
    const double val = loss(cfg.loss_kind, pred, s.validation.Y).value;
    CHECK(val == doctest::Approx(min_val).epsilon(1e-12));
}

TEST_CASE("training is deterministic in the seed") {
    const Dataset d = linear_toy(300, 31);
    const DataSplit s = split(d, 31);
    TrainConfig cfg;
    cfg.hidden = 6;
    cfg.rec_units = 6;
    cfg.max_epochs = 15;
    cfg.seed = 77;
    const TrainResult a = train_surrogate(s, cfg, d.Y.minCoeff(), d.Y.maxCoeff());
    const TrainResult b = train_surrogate(s, cfg, d.Y.minCoeff(), d.Y.maxCoeff());
    CHECK(network_to_json(a.net) == network_to_json(b.net));
}

TEST_CASE("identical seeds with different losses give different weights") {
    const Dataset d = linear_toy(300, 41);
    const DataSplit s = split(d, 41);
    TrainConfig cfg;
    cfg.hidden = 6;
    cfg.rec_units = 6;
    cfg.max_epochs = 10;
    cfg.seed = 99;
    cfg.loss_kind = LossKind::MSE;
    const TrainResult mse = train_surrogate(s, cfg, d.Y.minCoeff(), d.Y.maxCoeff());
    cfg.loss_kind = LossKind::MAE;
    const TrainResult mae = train_surrogate(s, cfg, d.Y.minCoeff(), d.Y.maxCoeff());
    CHECK(network_to_json(mse.net) != network_to_json(mae.net));
}

TEST_CASE("an ensemble of one predicts like its member") {
    const Dataset d = linear_toy(300, 51);
    const DataSplit s = split(d, 51);
    TrainConfig cfg;
    cfg.hidden = 6;
    cfg.rec_units = 6;
    cfg.max_epochs = 5;
    cfg.seed = 3;
    const EnsembleTrainResult r = train_ensemble(s, cfg, 1, EnsembleLossMix::AllMse);
    const Eigen::MatrixXd a = ensemble_forward(r.ensemble, s.test.X);
    const Eigen::MatrixXd b = forward(r.ensemble.members[0], s.test.X);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ensemble prediction is the member mean") {
    const Dataset d = linear_toy(200, 61);
    const DataSplit s = split(d, 61);
    TrainConfig cfg;
    cfg.hidden = 6;
    cfg.rec_units = 6;
    cfg.max_epochs = 4;
    cfg.seed = 8;
    const EnsembleTrainResult r = train_ensemble(s, cfg, 3, EnsembleLossMix::Mixed);
    CHECK(r.ensemble.member_losses[0] == LossKind::MSE);
    CHECK(r.ensemble.member_losses[1] == LossKind::MAE);
    CHECK(r.ensemble.member_losses[2] == LossKind::MSE);

    const Eigen::MatrixXd mean = ensemble_forward(r.ensemble, s.test.X);
    Eigen::MatrixXd manual = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
    for (const auto& mbr : r.ensemble.members) manual += forward(mbr, s.test.X);
    manual /= 3.0;
    CHECK((mean - manual).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ensemble JSON round-trips") {
    const Dataset d = linear_toy(200, 71);
    const DataSplit s = split(d, 71);
    TrainConfig cfg;
    cfg.hidden = 5;
    cfg.rec_units = 4;
    cfg.max_epochs = 2;
    cfg.seed = 12;
    const EnsembleTrainResult r = train_ensemble(s, cfg, 2, EnsembleLossMix::Mixed);
    const SurrogateEnsemble back = ensemble_from_json(ensemble_to_json(r.ensemble));
    const Eigen::MatrixXd a = ensemble_forward(r.ensemble, s.test.X);
    const Eigen::MatrixXd b = ensemble_forward(back, s.test.X);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.member_losses == r.ensemble.member_losses);
}

TEST_CASE("a perfect model evaluates to zero error") {
    Rng rng(81);
    Network net;
    net.input_dim = 5;
    net.output_dim = 7;
    net.layers.push_back(dense_layer(5, 7));
    init_weights(net, 4);

    Dataset d;
    d.line = ProductLine::DCPlan;
    d.X.resize(5, 40);
    for (Eigen::Index i = 0; i < d.X.size(); ++i) d.X(i) = rng.uniform(-1.0, 1.0);
    d.Y = forward(net, d.X);

    const EvalReport rep = evaluate(single(net), d);
    CHECK(rep.mean_e == 0.0);
    CHECK(rep.mean_wre == 0.0);
    CHECK(rep.pc99_abs_e == 0.0);
    CHECK(rep.pc99_abs_wre == 0.0);
}

TEST_CASE("singleton portfolio makes wre equal re") {
    Rng rng(91);
    Network net;
    net.input_dim = 5;
    net.output_dim = 4;
    net.layers.push_back(dense_layer(5, 4));
    init_weights(net, 14);

    Dataset d;
    d.line = ProductLine::DCPlan;
    d.X = Eigen::MatrixXd::Zero(5, 1);
    for (int f = 0; f < 5; ++f) d.X(f, 0) = rng.uniform(-0.5, 0.5);
    d.Y.resize(4, 1);
    d.Y << 10.0, 20.0, 5.0, 8.0;

    const EvalReport rep = evaluate(single(net), d);
    // with one contract, the wre denominator is the contract itself
    const auto& top_bucket = rep.re_by_volume.back();
    CHECK(top_bucket.count == 1);
    CHECK(rep.mean_wre == doctest::Approx(top_bucket.mean_re).epsilon(1e-12));
}

TEST_CASE("hand-computed error statistics") {
    // constant prediction 2; targets 1 and 9 at a single time step
    Network net;
    net.input_dim = 5;
    net.output_dim = 1;
    net.layers.push_back(dense_layer(5, 1));
    net.layers[0].W.setZero();
    net.layers[0].b << 2.0;

    Dataset d;
    d.line = ProductLine::DCPlan;
    d.X = Eigen::MatrixXd::Zero(5, 2);
    d.Y.resize(1, 2);
    d.Y << 1.0, 9.0;

    const EvalReport rep = evaluate(single(net), d);
    // e = (1, -7), sum R = 10 -> wre = (0.1, -0.7)
    CHECK(rep.mean_e == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(rep.mean_wre == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(rep.mean_abs_wre == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("evaluation is invariant under dataset permutation") {
    const Dataset d = linear_toy(120, 101);
    Network net = make_surrogate_network(ProductLine::DCPlan, TrainConfig{.hidden = 6,
                                                                          .rec_units = 6},
                                         d.Y.minCoeff(), d.Y.maxCoeff());
    init_weights(net, 9);

    Dataset reversed = d;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        reversed.X.col(i) = d.X.col(d.size() - 1 - i);
        reversed.Y.col(i) = d.Y.col(d.size() - 1 - i);
    }
    const EvalReport a = evaluate(single(net), d);
    const EvalReport b = evaluate(single(net), reversed);
    CHECK(a.mean_e == doctest::Approx(b.mean_e).epsilon(1e-12));
    CHECK(a.pc99_abs_e == doctest::Approx(b.pc99_abs_e).epsilon(1e-12));
    CHECK(a.pc99_abs_wre == doctest::Approx(b.pc99_abs_wre).epsilon(1e-12));
}

TEST_CASE("report magnitudes are internally consistent") {
    const Dataset d = linear_toy(150, 111);
    Network net = make_surrogate_network(ProductLine::DCPlan, TrainConfig{.hidden = 6,
                                                                          .rec_units = 6},
                                         d.Y.minCoeff(), d.Y.maxCoeff());
    init_weights(net, 10);
    const EvalReport rep = evaluate(single(net), d);
    CHECK(std::abs(rep.mean_wre) <= rep.pc99_abs_wre);
    CHECK(std::abs(rep.mean_e) <= rep.pc99_abs_e);
    CHECK(rep.mean_abs_wre >= std::abs(rep.mean_wre));
}

TEST_CASE("nearest-rank percentile") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(static_cast<double>(i));
    CHECK(percentile_abs(v, 0.99) == 99.0);
    CHECK(percentile_abs(v, 1.0) == 100.0);
    CHECK(percentile_abs({-5.0, 1.0}, 0.99) == 5.0);
}

} // TEST_SUITE
