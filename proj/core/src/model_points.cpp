#include "grouper/model_points.hpp"

#include "grouper/errors.hpp"
#include "grouper/parallel.hpp"
#include "grouper/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace grouper {

namespace {

constexpr double kEdge = 1.0 - 1e-6; // keeps atanh finite

double clamp_scaled(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

// Effective clamp interval of a coordinate: feature box intersected
// with the open cube, pulled in so tanh/atanh round-trips stay finite.
std::pair<double, double> effective_bounds(const std::optional<FeatureBox>& box, int f) {
    double lo = -kEdge;
    double hi = kEdge;
    if (box) {
        lo = std::max(lo, (*box)[static_cast<std::size_t>(f)].first);
        hi = std::min(hi, (*box)[static_cast<std::size_t>(f)].second);
    }
    if (lo > hi) std::swap(lo, hi);
    return {lo, hi};
}

} // namespace

Eigen::MatrixXd init_from_centroid(const Eigen::VectorXd& centroid_scaled, int m,
                                   std::uint64_t seed,
                                   const std::optional<FeatureBox>& box) {
    if (centroid_scaled.size() != 5)
        throw ShapeError("init_from_centroid: centroid must have 5 coordinates");
    if (m < 1) throw RangeError("init_from_centroid: m must be >= 1");

    Eigen::MatrixXd init(5, m);
    Rng rng(derive_seed(seed, 0x111));
    for (int j = 0; j < m; ++j) {
        for (int f = 0; f < 5; ++f) {
            const auto [lo, hi] = effective_bounds(box, f);
            double v = centroid_scaled(f);
            if (m > 1) v += rng.uniform(-0.05, 0.05);
            init(f, j) = clamp_scaled(v, lo, hi);
        }
    }
    return init;
}

namespace {

void validate_problem(const ModelPointProblem& problem) {
    if (!problem.surrogate) throw StateError("model points: no surrogate");
    problem.surrogate->validate();
    if (problem.m < 1) throw RangeError("model points: m must be >= 1");
    if (problem.cluster_size < 1)
        throw RangeError("model points: cluster size must be >= 1");
    if (problem.cluster_target.size() != problem.surrogate->output_dim())
        throw ShapeError("model points: target length does not match surrogate");
}

} // namespace

double model_point_loss(const ModelPointProblem& problem, const Eigen::MatrixXd& W,
                        Eigen::MatrixXd* dW) {
    validate_problem(problem);
    if (W.rows() != 5 || W.cols() != problem.m)
        throw ShapeError("model_point_loss: W must be 5 x m");

    const Eigen::Index T = problem.cluster_target.size();
    const double size = static_cast<double>(problem.cluster_size);
    const double inv_m = 1.0 / static_cast<double>(problem.m);

    const Eigen::MatrixXd points = W.array().tanh().matrix();
    const Eigen::MatrixXd out = ensemble_forward(*problem.surrogate, points);
    const Eigen::VectorXd o = out.rowwise().mean();
    const Eigen::VectorXd diff = size * o - problem.cluster_target;
    const double loss = diff.squaredNorm() / static_cast<double>(T);
    if (dW) {
        const Eigen::VectorXd dLdo = (2.0 * size / static_cast<double>(T)) * diff;
        Eigen::MatrixXd upstream(T, problem.m);
        for (int j = 0; j < problem.m; ++j) upstream.col(j) = inv_m * dLdo;
        const Eigen::MatrixXd dPoints =
            ensemble_input_gradient(*problem.surrogate, points, upstream);
        *dW = (dPoints.array() * (1.0 - points.array().square())).matrix();
    }
    return loss;
}

OptimizedModelPoints optimize_model_points(const ModelPointProblem& problem,
                                           const OptimizeOpts& opts) {
    validate_problem(problem);
    if (problem.init.rows() != 5 || problem.init.cols() != problem.m)
        throw ShapeError("optimize_model_points: init must be 5 x m");

    const double inv_m = 1.0 / static_cast<double>(problem.m);

    auto project = [&](Eigen::MatrixXd& W) {
        for (int j = 0; j < problem.m; ++j)
            for (int f = 0; f < 5; ++f) {
                const auto [lo, hi] = effective_bounds(problem.feature_box, f);
                const double p = std::tanh(W(f, j));
                if (p < lo || p > hi) W(f, j) = std::atanh(clamp_scaled(p, lo, hi));
            }
    };
    auto eval = [&](const Eigen::MatrixXd& W, Eigen::MatrixXd* dW) {
        return model_point_loss(problem, W, dW);
    };

    Eigen::MatrixXd W(5, problem.m);
    for (int j = 0; j < problem.m; ++j)
        for (int f = 0; f < 5; ++f)
            W(f, j) = std::atanh(clamp_scaled(problem.init(f, j), -kEdge, kEdge));
    project(W);

    OptimizedModelPoints result;
    result.weights.assign(static_cast<std::size_t>(problem.m), inv_m);

    OptimizerConfig cfg;
    cfg.kind = opts.optimizer;
    cfg.lr = opts.lr;
    AdamMoments moments;

    Eigen::MatrixXd grad;
    double loss = eval(W, &grad);
    if (!std::isfinite(loss)) throw TrainingError("grouping loss not finite", 0);
    result.loss_trace.push_back(loss);
    result.init_loss = loss;
    Eigen::MatrixXd best_w = W;
    double best = loss;

    for (int step = 1; step <= opts.steps; ++step) {
        update_matrix(W, grad, moments, step, cfg);
        project(W);
        loss = eval(W, &grad);
        if (!std::isfinite(loss))
            throw TrainingError("grouping loss diverged", step);
        result.loss_trace.push_back(loss);
        if (loss < best) {
            best = loss;
            best_w = W;
        }
    }

    result.best_loss = best;
    result.points = best_w.array().tanh().matrix();
    // Snap any residual excursion from the tanh/atanh round trip.
    for (int j = 0; j < problem.m; ++j)
        for (int f = 0; f < 5; ++f) {
            const auto [lo, hi] = effective_bounds(problem.feature_box, f);
            result.points(f, j) = clamp_scaled(result.points(f, j), lo, hi);
        }
    return result;
}

GroupingResult group_portfolio(const Portfolio& p, const SurrogateEnsemble& surrogate,
                               int k, int m, const ValuationAssumptions& assumptions,
                               const GroupOpts& opts) {
    if (k < 1) throw RangeError("group_portfolio: K must be >= 1");
    if (m < 1) throw RangeError("group_portfolio: m must be >= 1");
    if (p.entries.empty()) throw RangeError("group_portfolio: empty portfolio");
    surrogate.validate();
    if (surrogate.output_dim() != path_length(p.line))
        throw ShapeError("group_portfolio: surrogate horizon does not match product line");

    // Expand entries into individual contracts (scaled coordinates) and
    // their exact value paths; counts replicate columns.
    const std::int64_t n = p.total_count();
    Eigen::MatrixXd points(5, n);
    std::vector<PolicyValuePath> paths(static_cast<std::size_t>(n));
    {
        std::vector<std::int64_t> offsets(p.entries.size());
        std::int64_t off = 0;
        for (std::size_t i = 0; i < p.entries.size(); ++i) {
            offsets[i] = off;
            off += p.entries[i].count;
        }
        parallel_for(p.entries.size(), [&](std::size_t i) {
            const auto z = scale_to_unit(p.entries[i].contract);
            const PolicyValuePath y = policy_values(p.entries[i].contract, assumptions);
            for (std::int64_t c = 0; c < p.entries[i].count; ++c) {
                const auto col = offsets[i] + c;
                for (int f = 0; f < 5; ++f)
                    points(f, col) = z[static_cast<std::size_t>(f)];
                paths[static_cast<std::size_t>(col)] = y;
            }
        });
    }

    GroupingResult result;
    if (k == 1) {
        // A single cluster is the whole portfolio; no preprocessing.
        const Eigen::VectorXd mean = points.rowwise().mean();
        result.clusters.centroids = mean;
        result.clusters.assignment.assign(static_cast<std::size_t>(n), 0);
        result.clusters.sizes = {n};
        result.clusters.inertia = (points.colwise() - mean).squaredNorm();
    } else {
        result.clusters = kmeans(points, k, opts.seed, opts.kmeans_max_iter, opts.kmeans_tol);
    }
    const int n_clusters = static_cast<int>(result.clusters.sizes.size());

    // Exact cluster targets R(C), summed with the fixed pairwise tree.
    std::vector<std::vector<std::size_t>> member_idx(static_cast<std::size_t>(n_clusters));
    for (std::size_t i = 0; i < result.clusters.assignment.size(); ++i)
        member_idx[static_cast<std::size_t>(result.clusters.assignment[i])].push_back(i);

    result.per_cluster.resize(static_cast<std::size_t>(n_clusters));
    result.centroid_init_losses.assign(static_cast<std::size_t>(n_clusters), 0.0);

    std::vector<std::vector<Eigen::MatrixXd>> cluster_points(
        static_cast<std::size_t>(n_clusters));
    std::vector<std::vector<std::int64_t>> cluster_counts(
        static_cast<std::size_t>(n_clusters));

    parallel_for(static_cast<std::size_t>(n_clusters), [&](std::size_t j) {
        const auto& members = member_idx[j];
        if (members.empty()) return;

        std::vector<std::vector<double>> terms;
        terms.reserve(members.size());
        for (std::size_t i : members) terms.push_back(paths[i]);
        const std::vector<double> target_vec = pairwise_sum(std::move(terms));
        Eigen::VectorXd target(target_vec.size());
        for (std::size_t t = 0; t < target_vec.size(); ++t)
            target(static_cast<Eigen::Index>(t)) = target_vec[t];

        ModelPointProblem problem;
        problem.cluster_target = target;
        problem.cluster_size = static_cast<std::int64_t>(members.size());
        problem.surrogate = &surrogate;
        problem.m = m;

        if (opts.use_feature_box) {
            FeatureBox box;
            for (int f = 0; f < 5; ++f) {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (std::size_t i : members) {
                    lo = std::min(lo, points(f, static_cast<Eigen::Index>(i)));
                    hi = std::max(hi, points(f, static_cast<Eigen::Index>(i)));
                }
                box[static_cast<std::size_t>(f)] = {lo, hi};
            }
            problem.feature_box = box;
        }

        const Eigen::VectorXd centroid = result.clusters.centroids.col(
            static_cast<Eigen::Index>(j));
        problem.init = init_from_centroid(centroid, m,
                                          derive_seed(opts.seed, 0x917 + j),
                                          problem.feature_box);

        OptimizedModelPoints optimized =
            optimize_model_points(problem, opts.optimize);

        // The K-means centroid itself (replicated over the m slots) is a
        // valid configuration; never return anything worse under the
        // surrogate metric.
        ModelPointProblem centroid_problem = problem;
        centroid_problem.init = centroid.replicate(1, m);
        OptimizeOpts no_steps;
        no_steps.steps = 0;
        const OptimizedModelPoints at_centroid =
            optimize_model_points(centroid_problem, no_steps);
        result.centroid_init_losses[j] = at_centroid.best_loss;
        if (at_centroid.best_loss < optimized.best_loss) {
            optimized.points = at_centroid.points;
            optimized.best_loss = at_centroid.best_loss;
        }
        result.per_cluster[j] = std::move(optimized);

        // Equal integer split of |C| over the m points, remainder to the
        // lowest indices; zero-count points are dropped.
        const auto size = static_cast<std::int64_t>(members.size());
        const std::int64_t base = size / m;
        const std::int64_t rem = size % m;
        for (int i = 0; i < m; ++i) {
            const std::int64_t count = base + (i < rem ? 1 : 0);
            if (count == 0) continue;
            cluster_points[j].push_back(result.per_cluster[j].points.col(i));
            cluster_counts[j].push_back(count);
        }
    });

    result.model_points.line = p.line;
    for (std::size_t j = 0; j < static_cast<std::size_t>(n_clusters); ++j) {
        const double w = 1.0 / static_cast<double>(m);
        for (std::size_t i = 0; i < cluster_points[j].size(); ++i) {
            std::array<double, 5> z{};
            for (int f = 0; f < 5; ++f)
                z[static_cast<std::size_t>(f)] = cluster_points[j][i](f, 0);
            result.model_points.entries.push_back(
                {unscale(p.line, z), cluster_counts[j][i]});
            result.weights.push_back(w);
        }
    }
    return result;
}

} // namespace grouper
