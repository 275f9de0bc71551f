#ifndef GROUPER_MODEL_POINTS_HPP
#define GROUPER_MODEL_POINTS_HPP

#include "grouper/kmeans.hpp"
#include "grouper/optimizer.hpp"
#include "grouper/policy_values.hpp"
#include "grouper/surrogate.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace grouper {

// Per-feature interval constraints in scaled coordinates, intersected
// with [-1,1] (cluster-member ranges keep optimized points plausible).
using FeatureBox = std::array<std::pair<double, double>, 5>;

struct ModelPointProblem {
    Eigen::VectorXd cluster_target;          // exact R(C), length T
    std::int64_t cluster_size = 0;           // |C|
    const SurrogateEnsemble* surrogate = nullptr; // frozen
    int m = 1;                               // model points for this cluster
    Eigen::MatrixXd init;                    // 5 x m, scaled coordinates
    std::optional<FeatureBox> feature_box;
};

struct OptimizedModelPoints {
    Eigen::MatrixXd points;          // 5 x m, scaled; best iterate found
    std::vector<double> weights;     // equal, 1/m
    std::vector<double> loss_trace;  // loss_trace[0] is the loss at init
    double best_loss = 0.0;
    double init_loss = 0.0;          // loss of the unjittered centroid input
};

struct OptimizeOpts {
    int steps = 2000;
    double lr = 0.05;
    OptimizerKind optimizer = OptimizerKind::FixedStep;
};

// Initial free weights for the nested grouping net: m (possibly
// jittered) copies of the centroid, pulled back through tanh so that
// tanh(W) reproduces them. Centroid components at +-1 are clamped
// slightly inside.
Eigen::MatrixXd init_from_centroid(const Eigen::VectorXd& centroid_scaled, int m,
                                   std::uint64_t seed,
                                   const std::optional<FeatureBox>& box = {});

// Loss of the nested grouping net at free weights W (5 x m):
// MSE(|C| * o, R(C)) with o the surrogate prediction averaged over the
// m points tanh(W). Fills dW with the exact gradient when non-null.
double model_point_loss(const ModelPointProblem& problem, const Eigen::MatrixXd& W,
                        Eigen::MatrixXd* dW = nullptr);

// The nested net of the grouping step: constant input 1 -> bias-free
// trainable layer W (5 x m) -> tanh -> frozen surrogate, averaged over
// the m points. Minimizes MSE(|C| * o, R(C)) by gradient steps on W
// only; iterates are projected into the feature box after each step and
// the best iterate (including the centroid input itself) is returned.
OptimizedModelPoints optimize_model_points(const ModelPointProblem& problem,
                                           const OptimizeOpts& opts);

struct GroupingResult {
    Portfolio model_points;                    // fractional contracts, integer counts
    std::vector<double> weights;               // per entry, 1/m within a cluster
    ClusterModel clusters;                     // preprocessing clusters (K >= 1)
    std::vector<OptimizedModelPoints> per_cluster;
    std::vector<double> centroid_init_losses;  // surrogate loss of each centroid init
};

struct GroupOpts {
    OptimizeOpts optimize;
    std::uint64_t seed = 1;
    bool use_feature_box = true;
    int kmeans_max_iter = 300;
    double kmeans_tol = 1e-6;
};

// Full grouping: K-means preprocessing (skipped for K = 1, where the
// whole portfolio forms one cluster), then per-cluster optimization
// with m model points each. Cluster counts are split into m equal
// integer parts, remainder to the lowest-index points.
GroupingResult group_portfolio(const Portfolio& p, const SurrogateEnsemble& surrogate,
                               int k, int m, const ValuationAssumptions& assumptions,
                               const GroupOpts& opts);

} // namespace grouper

#endif // GROUPER_MODEL_POINTS_HPP
