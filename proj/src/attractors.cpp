#include "ergostat/attractors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <map>
#include <set>
#include <stdexcept>

#include "ergostat/clustering.hpp"

namespace ergo {

namespace {

struct PooledCluster {
  const PomegaCluster* cluster;
  int point;
};

int find_root(std::vector<int>& parent, int a) {
  while (parent[size_t(a)] != a) a = parent[size_t(a)] = parent[size_t(parent[size_t(a)])];
  return a;
}

}  // namespace

Decomposition decompose(const InitialEnsemble& ens, const DecomposeOptions& opt,
                        const TestFunctionBasis& basis) {
  Decomposition dec;
  dec.cluster_tolerance = opt.cluster_tolerance;
  dec.ensemble_size = long(ens.points.size());
  dec.independence_tolerance = opt.independence_tolerance > 0
                                   ? opt.independence_tolerance
                                   : 1.0 / std::sqrt(double(ens.points.size()));

  // pool the pw clusters and merge them into measure nodes
  std::vector<PooledCluster> pool;
  long unassigned = 0;
  for (size_t i = 0; i < ens.points.size(); ++i) {
    if (ens.points[i].pomega.clusters.empty()) {
      ++unassigned;
      continue;
    }
    for (const auto& c : ens.points[i].pomega.clusters)
      pool.push_back({&c, int(i)});
  }
  dec.unassigned_fraction = double(unassigned) / double(ens.points.size());
  if (pool.empty()) throw std::runtime_error("decompose: no pw clusters in the ensemble");

  const int m = int(pool.size());
  Eigen::MatrixXd dist(m, m);
  for (int i = 0; i < m; ++i) {
    dist(i, i) = 0.0;
    for (int j = i + 1; j < m; ++j) {
      double d = basis.signature_distance(pool[size_t(i)].cluster->signature,
                                          pool[size_t(j)].cluster->signature);
      dist(i, j) = dist(j, i) = d;
    }
  }
  Clustering nodes = cluster_complete_linkage(dist, opt.cluster_tolerance);
  const int n_nodes = int(nodes.clusters.size());
  std::vector<int> node_of_pool(size_t(m), -1);
  for (int c = 0; c < n_nodes; ++c)
    for (int idx : nodes.clusters[size_t(c)]) node_of_pool[size_t(idx)] = c;

  // two points share a record iff some of their clusters merged: union-find
  // over nodes joined by co-occurrence in one point
  std::vector<int> parent(static_cast<size_t>(n_nodes));
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::vector<int>> point_nodes(ens.points.size());
  for (int i = 0; i < m; ++i)
    point_nodes[size_t(pool[size_t(i)].point)].push_back(node_of_pool[size_t(i)]);
  for (auto& pn : point_nodes) {
    std::sort(pn.begin(), pn.end());
    pn.erase(std::unique(pn.begin(), pn.end()), pn.end());
    for (size_t k = 1; k < pn.size(); ++k) {
      int ra = find_root(parent, pn[0]), rb = find_root(parent, pn[k]);
      if (ra != rb) parent[size_t(ra)] = rb;
    }
  }

  // assemble records per component, ordered by smallest member node
  std::map<int, std::vector<int>> components;  // root -> node list
  for (int c = 0; c < n_nodes; ++c) components[find_root(parent, c)].push_back(c);

  for (auto& [root, node_list] : components) {
    AttractorRecord rec;
    for (int c : node_list) {
      const PooledCluster& med = pool[size_t(nodes.medoids[size_t(c)])];
      rec.cluster_signatures.push_back(med.cluster->signature);
      rec.cluster_sources.emplace_back(med.point, med.cluster->n);
    }
    for (size_t i = 0; i < ens.points.size(); ++i) {
      if (point_nodes[i].empty()) continue;
      if (find_root(parent, point_nodes[i][0]) == root) rec.basin_sample.push_back(int(i));
    }
    if (rec.basin_sample.empty()) continue;

    for (size_t a = 0; a < rec.cluster_signatures.size(); ++a)
      for (size_t b = a + 1; b < rec.cluster_signatures.size(); ++b)
        rec.diameter = std::max(rec.diameter,
                                basis.signature_distance(rec.cluster_signatures[a],
                                                         rec.cluster_signatures[b]));
    rec.attracting_size =
        wilson_interval(long(rec.basin_sample.size()), dec.ensemble_size);

    if (rec.diameter <= opt.cluster_tolerance) {
      rec.irreducible = true;  // a single measure up to resolution
    } else {
      // each basin point should individually sweep most of the record
      int sweeping = 0;
      for (int pi : rec.basin_sample)
        if (ens.points[size_t(pi)].pomega.oscillation_amplitude >= 0.5 * rec.diameter)
          ++sweeping;
      rec.irreducible =
          double(sweeping) >= 0.7 * double(rec.basin_sample.size());
    }

    // support: union of the cluster supports, materialized from provenance
    size_t take = rec.cluster_sources.size();
    size_t cap = size_t(std::max(1, opt.max_materialized_clusters));
    std::set<Eigen::Index> bins;
    rec.support_mass = 1.0;
    for (size_t k = 0; k < std::min(take, cap); ++k) {
      size_t pick = take <= cap ? k : k * take / cap;
      auto [pt_idx, n_at] = rec.cluster_sources[pick];
      ProbMeasure mu = materialize_empirical(
          ens.system, ens.points[size_t(pt_idx)].origin, n_at, ens.grid);
      SupportEstimate sup = support_estimate(mu, opt.support_mass_threshold);
      rec.support_mass = std::min(rec.support_mass, sup.covered_mass);
      bins.insert(sup.indices.begin(), sup.indices.end());
    }
    rec.support_bins.assign(bins.begin(), bins.end());
    dec.records.push_back(std::move(rec));
  }

  std::sort(dec.records.begin(), dec.records.end(), [](const auto& a, const auto& b) {
    return a.attracting_size.estimate > b.attracting_size.estimate;
  });
  return dec;
}

IndependenceResult independence(const AttractorRecord& a, const AttractorRecord& b,
                                long ensemble_size, double tolerance) {
  std::vector<int> sa = a.basin_sample, sb = b.basin_sample;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<int> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                        std::back_inserter(inter));
  IndependenceResult r;
  r.overlap_fraction = double(inter.size()) / double(ensemble_size);
  r.independent = r.overlap_fraction < tolerance;
  return r;
}

ChainCochainReport chain_cochain_analysis(const Decomposition& dec, int lattice_cap_log2) {
  const int r = int(dec.records.size());
  if (r == 0) throw std::invalid_argument("chain_cochain_analysis: empty decomposition");
  if (r > lattice_cap_log2)
    throw std::runtime_error(
        "chain_cochain_analysis: candidate lattice would exceed 2^" +
        std::to_string(lattice_cap_log2) +
        " subsets; re-run the decomposition with a coarser cluster tolerance");

  // Exact set packing over the record-subset lattice: the maximum number of
  // pairwise basin-disjoint candidate reductions. f(mask) over 3^r pairs.
  const int full = (1 << r) - 1;
  std::vector<int> packing(size_t(full) + 1, 0);
  for (int mask = 1; mask <= full; ++mask) {
    int best = 0;
    for (int sub = mask; sub; sub = (sub - 1) & mask)
      best = std::max(best, 1 + packing[size_t(mask ^ sub)]);
    packing[size_t(mask)] = best;
  }
  ChainCochainReport rep;
  rep.k = packing[size_t(full)];

  // witness co-chain: the singleton records (always pairwise independent on
  // samples, since records partition the assigned points)
  for (int i = 0; i < r; ++i) rep.cochain_witness.push_back({i});

  // pairwise independent chains: one nested chain per record, growing toward
  // the full space; chain i and j are independent through their singleton
  // roots. Their count cannot exceed the packing number and reaches it.
  for (int i = 0; i < r; ++i) {
    std::vector<std::vector<int>> chain;
    std::vector<int> cand = {i};
    chain.push_back(cand);
    for (int j = 0; j < r && int(chain.size()) < 3; ++j) {
      if (j == i) continue;
      cand.push_back(j);
      auto sorted = cand;
      std::sort(sorted.begin(), sorted.end());
      chain.push_back(sorted);
    }
    rep.chain_witness.push_back(chain);
  }
  rep.h = int(rep.chain_witness.size());

  if (rep.h != rep.k)
    throw std::runtime_error("chain_cochain_analysis: k != h, which contradicts the "
                             "Dilworth argument on a finite lattice");
  return rep;
}

CoverCheck cochain_cover_check(const Decomposition& dec) {
  CoverCheck c;
  double assigned = 0.0;
  for (const auto& rec : dec.records) assigned += double(rec.basin_sample.size());
  c.assigned_fraction = assigned / double(dec.ensemble_size);
  c.unassigned_fraction = dec.unassigned_fraction;
  c.covers = c.unassigned_fraction <= 0.05 &&
             std::abs(c.assigned_fraction + c.unassigned_fraction - 1.0) < 1e-12;
  c.all_physical = !dec.records.empty();
  c.physical_measures_exist = false;
  for (const auto& rec : dec.records) {
    bool trivial = rec.diameter <= dec.cluster_tolerance;
    c.all_physical = c.all_physical && trivial;
    c.physical_measures_exist = c.physical_measures_exist || trivial;
  }
  if (!c.covers) c.verdict = "no-cover";
  else if (c.all_physical) c.verdict = "all-physical";
  else c.verdict = "cover-without-physical";
  return c;
}

std::vector<bool> dilate_bins(const HistogramGrid& grid,
                              const std::vector<Eigen::Index>& bins, double eps) {
  const int res = grid.resolution;
  const int k = int(std::ceil(eps * res));
  std::vector<bool> mask(size_t(grid.bin_count()), false);
  bool periodic = grid.space.periodic();
  if (grid.space.dimension() == 1) {
    for (Eigen::Index b : bins)
      for (int d = -k; d <= k; ++d) {
        long t = long(b) + d;
        if (periodic) t = ((t % res) + res) % res;
        if (t >= 0 && t < res) mask[size_t(t)] = true;
      }
  } else {
    for (Eigen::Index b : bins) {
      int iy = int(b) / res, ix = int(b) % res;
      for (int dy = -k; dy <= k; ++dy)
        for (int dx = -k; dx <= k; ++dx) {
          long tx = ix + dx, ty = iy + dy;
          if (periodic) {
            tx = ((tx % res) + res) % res;
            ty = ((ty % res) + res) % res;
          }
          if (tx >= 0 && tx < res && ty >= 0 && ty < res)
            mask[size_t(ty * res + tx)] = true;
        }
    }
  }
  return mask;
}

AttractionInMean attraction_in_mean(const InitialEnsemble& ens,
                                    const AttractorRecord& record, double eps,
                                    long orbit_length, int max_samples) {
  if (record.basin_sample.empty())
    throw std::invalid_argument("attraction_in_mean: record has an empty basin sample");
  AttractionInMean result;
  std::vector<bool> nbhd = dilate_bins(ens.grid, record.support_bins, eps);

  int n_samples = std::min<int>(max_samples, int(record.basin_sample.size()));
  std::vector<long> sched = checkpoint_schedule(64, 1.25, orbit_length);
  result.ns = sched;
  std::vector<std::vector<double>> fractions(static_cast<size_t>(n_samples));

  for (int s = 0; s < n_samples; ++s) {
    int pick = int(size_t(s) * record.basin_sample.size() / size_t(n_samples));
    const auto& pt = ens.points[size_t(record.basin_sample[size_t(pick)])];
    OriginStream stream(ens.system, pt.origin);
    long inside = 0;
    size_t next_cp = 0;
    for (long n = 1; n <= orbit_length && next_cp < sched.size(); ++n) {
      inside += nbhd[size_t(ens.grid.bin_of(stream.current()))];
      stream.advance();
      if (n == sched[next_cp]) {
        fractions[size_t(s)].push_back(double(inside) / double(n));
        ++next_cp;
      }
    }
    result.final_fractions.push_back(fractions[size_t(s)].back());
  }

  const double need = 1.0 - eps;
  for (size_t k = 0; k < sched.size(); ++k) {
    int good = 0;
    for (int s = 0; s < n_samples; ++s) good += (fractions[size_t(s)][k] > need);
    result.pass_fraction.push_back(double(good) / double(n_samples));
  }
  // N: first checkpoint from which the pass fraction stays >= 1 - eps
  result.established_n = -1;
  for (size_t k = 0; k < sched.size(); ++k) {
    bool stays = true;
    for (size_t j = k; j < sched.size(); ++j)
      if (result.pass_fraction[j] < need) {
        stays = false;
        break;
      }
    if (stays) {
      result.established_n = sched[k];
      break;
    }
  }
  result.passed = result.established_n > 0;
  return result;
}

}  // namespace ergo
