#ifndef GROUPER_KMEANS_HPP
#define GROUPER_KMEANS_HPP

#include "grouper/contracts.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace grouper {

struct ClusterModel {
    Eigen::MatrixXd centroids;      // 5 x K, in scaled coordinates
    std::vector<int> assignment;    // point index -> cluster id
    std::vector<std::int64_t> sizes;
    double inertia = 0.0;           // sum of squared distances to own centroid
};

// Lloyd's algorithm with k-means++ seeding on scaled features.
// Stops when the largest centroid shift drops below tol or after
// max_iter rounds; empty clusters are re-seeded to the farthest point.
// The returned assignment is optimal for the returned centroids.
ClusterModel kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    int max_iter = 300, double tol = 1e-6);

// Centroids as model points: unscaled, fractional features kept, count
// = cluster size. Bound handling happens at valuation time.
Portfolio baseline_grouping(const ClusterModel& model, ProductLine line);

std::string cluster_model_to_json(const ClusterModel& model);
void write_assignment_csv(const std::string& path, const ClusterModel& model);

} // namespace grouper

#endif // GROUPER_KMEANS_HPP
