#include "ergostat/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ergo {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

Clustering finalize(const Eigen::MatrixXd& dist, std::vector<std::vector<int>> groups) {
  // deterministic order: by smallest member index
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  Clustering out;
  out.clusters = std::move(groups);
  for (const auto& members : out.clusters) out.medoids.push_back(medoid_of(dist, members));
  return out;
}

}  // namespace

int medoid_of(const Eigen::MatrixXd& dist, const std::vector<int>& members) {
  if (members.empty()) throw std::invalid_argument("medoid_of: empty cluster");
  int best = members.front();
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i : members) {
    double cost = 0.0;
    for (int j : members) cost += dist(i, j);
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return best;
}

Clustering cluster_single_linkage(const Eigen::MatrixXd& dist, double tol) {
  const int n = static_cast<int>(dist.rows());
  if (n == 0) return {};
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist(i, j) <= tol) uf.unite(i, j);
  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);
  groups.erase(std::remove_if(groups.begin(), groups.end(),
                              [](const auto& g) { return g.empty(); }),
               groups.end());
  return finalize(dist, std::move(groups));
}

Clustering cluster_complete_linkage(const Eigen::MatrixXd& dist, double tol) {
  const int n = static_cast<int>(dist.rows());
  if (n == 0) return {};
  std::vector<std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups.push_back({i});

  auto complete_link = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double mx = 0.0;
    for (int i : a)
      for (int j : b) mx = std::max(mx, dist(i, j));
    return mx;
  };

  while (groups.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < groups.size(); ++i)
      for (size_t j = i + 1; j < groups.size(); ++j) {
        double d = complete_link(groups[i], groups[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    if (best > tol) break;
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    std::sort(groups[bi].begin(), groups[bi].end());
    groups.erase(groups.begin() + static_cast<long>(bj));
  }
  return finalize(dist, std::move(groups));
}

}  // namespace ergo
