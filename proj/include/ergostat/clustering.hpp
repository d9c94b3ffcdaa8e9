#pragma once

#include <Eigen/Core>
#include <vector>

namespace ergo {

struct Clustering {
  std::vector<std::vector<int>> clusters;  // member indices per cluster
  std::vector<int> medoids;                // one representative per cluster
};

// Single linkage at tolerance = connected components of the graph
// {d(i,j) <= tol}. Preserves connected structure (continua stay one cluster).
Clustering cluster_single_linkage(const Eigen::MatrixXd& dist, double tol);

// Complete linkage: merge while the merged diameter stays <= tol. Splits
// continua into tolerance-sized blocks; used when pooling measures across
// an ensemble.
Clustering cluster_complete_linkage(const Eigen::MatrixXd& dist, double tol);

int medoid_of(const Eigen::MatrixXd& dist, const std::vector<int>& members);

}  // namespace ergo
