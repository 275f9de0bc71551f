#include "grouper/kmeans.hpp"

#include "grouper/errors.hpp"
#include "grouper/parallel.hpp"
#include "grouper/portfolio_io.hpp"
#include "grouper/rng.hpp"

#include <json.hpp>

#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>

namespace grouper {

namespace {

// Nearest centroid per point; returns inertia. Parallel over points,
// each writing only its own slot.
double assign_points(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                     std::vector<int>& assignment, std::vector<double>& dist2) {
    const auto n = static_cast<std::size_t>(points.cols());
    const int k = static_cast<int>(centroids.cols());
    parallel_for(n, [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        int best_j = 0;
        for (int j = 0; j < k; ++j) {
            const double d = (points.col(static_cast<Eigen::Index>(i)) - centroids.col(j))
                                 .squaredNorm();
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        assignment[i] = best_j;
        dist2[i] = best;
    });
    double inertia = 0.0;
    for (double d : dist2) inertia += d;
    return inertia;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const Eigen::Index n = points.cols();
    Eigen::MatrixXd centroids(points.rows(), k);
    centroids.col(0) = points.col(static_cast<Eigen::Index>(rng.next_below(
        static_cast<std::uint64_t>(n))));

    std::vector<double> d2(static_cast<std::size_t>(n),
                           std::numeric_limits<double>::infinity());
    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = (points.col(i) - centroids.col(j - 1)).squaredNorm();
            auto& slot = d2[static_cast<std::size_t>(i)];
            if (d < slot) slot = d;
            total += slot;
        }
        if (total <= 0.0) {
            // All remaining mass at existing centroids; pick uniformly.
            centroids.col(j) = points.col(static_cast<Eigen::Index>(
                rng.next_below(static_cast<std::uint64_t>(n))));
            continue;
        }
        double target = rng.next_double() * total;
        Eigen::Index pick = n - 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            target -= d2[static_cast<std::size_t>(i)];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        centroids.col(j) = points.col(pick);
    }
    return centroids;
}

} // namespace

ClusterModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int max_iter, double tol) {
    const Eigen::Index n = points.cols();
    if (k < 1) throw RangeError("kmeans: k must be >= 1");
    if (static_cast<Eigen::Index>(k) > n)
        throw RangeError("kmeans: k = " + std::to_string(k) + " exceeds point count " +
                         std::to_string(n));

    Rng rng(derive_seed(seed, 0xc105));
    ClusterModel model;
    model.centroids = seed_plus_plus(points, k, rng);
    model.assignment.assign(static_cast<std::size_t>(n), 0);
    std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        const double inertia =
            assign_points(points, model.centroids, model.assignment, dist2);
        // Lloyd's update can only lower the objective.
        assert(inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12);
        prev_inertia = inertia;

        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(points.rows(), k);
        std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int j = model.assignment[static_cast<std::size_t>(i)];
            next.col(j) += points.col(i);
            ++counts[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0) {
                next.col(j) /= static_cast<double>(counts[static_cast<std::size_t>(j)]);
            } else {
                // Re-seed an empty cluster at the point farthest from its
                // current centroid.
                Eigen::Index far = 0;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < n; ++i)
                    if (dist2[static_cast<std::size_t>(i)] > far_d) {
                        far_d = dist2[static_cast<std::size_t>(i)];
                        far = i;
                    }
                next.col(j) = points.col(far);
                dist2[static_cast<std::size_t>(far)] = 0.0;
            }
        }

        const double shift = (next - model.centroids).colwise().norm().maxCoeff();
        model.centroids = std::move(next);
        if (shift < tol) break;
    }

    // Final assignment consistent with the returned centroids.
    model.inertia = assign_points(points, model.centroids, model.assignment, dist2);
    model.sizes.assign(static_cast<std::size_t>(k), 0);
    for (int j : model.assignment) ++model.sizes[static_cast<std::size_t>(j)];
    return model;
}

Portfolio baseline_grouping(const ClusterModel& model, ProductLine line) {
    Portfolio p;
    p.line = line;
    for (Eigen::Index j = 0; j < model.centroids.cols(); ++j) {
        if (model.sizes[static_cast<std::size_t>(j)] == 0) continue;
        std::array<double, 5> z{};
        for (int f = 0; f < 5; ++f) z[static_cast<std::size_t>(f)] = model.centroids(f, j);
        p.entries.push_back({unscale(line, z), model.sizes[static_cast<std::size_t>(j)]});
    }
    return p;
}

std::string cluster_model_to_json(const ClusterModel& model) {
    nlohmann::json j;
    j["inertia"] = model.inertia;
    j["sizes"] = model.sizes;
    j["centroids"] = nlohmann::json::array();
    for (Eigen::Index c = 0; c < model.centroids.cols(); ++c) {
        std::vector<double> col(5);
        for (int f = 0; f < 5; ++f)
            col[static_cast<std::size_t>(f)] = model.centroids(f, c);
        j["centroids"].push_back(col);
    }
    return j.dump(2);
}

void write_assignment_csv(const std::string& path, const ClusterModel& model) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing", path);
    f << "contract_index,cluster\n";
    for (std::size_t i = 0; i < model.assignment.size(); ++i)
        f << i << ',' << model.assignment[i] << '\n';
    if (!f) throw IoError("write failed", path);
}

} // namespace grouper
