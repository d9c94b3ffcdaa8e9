#pragma once

#include <string>
#include <vector>

#include "ergostat/observability.hpp"

namespace ergo {

// One generalized attractor: a compact cluster of observable measures, its
// support in phase space, and the sampled basin.
struct AttractorRecord {
  std::vector<Eigen::VectorXd> cluster_signatures;      // measure nodes
  std::vector<std::pair<int, long>> cluster_sources;    // (point, n) per node
  std::vector<int> basin_sample;                        // ensemble indices
  double diameter = 0.0;          // max pairwise distance over the nodes
  WilsonInterval attracting_size; // basin fraction of the ensemble
  bool irreducible = false;
  std::vector<Eigen::Index> support_bins;  // union of cluster supports
  double support_mass = 0.0;               // min covered mass over the clusters
};

struct Decomposition {
  std::vector<AttractorRecord> records;
  double unassigned_fraction = 0.0;  // points without a usable pw estimate
  double cluster_tolerance = 0.0;
  double independence_tolerance = 0.0;
  long ensemble_size = 0;
};

struct DecomposeOptions {
  double cluster_tolerance = 0.02;
  double independence_tolerance = 0.0;  // <= 0: 1/sqrt(ensemble size)
  double support_mass_threshold = 0.01;
  int max_materialized_clusters = 12;   // per record, for support estimation
};

// Groups sample points by the cluster set of their pw estimate: two points
// share a record exactly when their pw clusters merge under the tolerance
// (union-find over pooled measure nodes). Records partition the assigned
// points, so their basins are pairwise disjoint on samples by construction.
// Positive-diameter records are flagged irreducible when the bulk of their
// basin points individually sweep most of the record's diameter.
Decomposition decompose(const InitialEnsemble& ens, const DecomposeOptions& opt,
                        const TestFunctionBasis& basis);

struct IndependenceResult {
  bool independent = false;
  double overlap_fraction = 0.0;  // |basin(a) and basin(b)| / ensemble size
};

IndependenceResult independence(const AttractorRecord& a, const AttractorRecord& b,
                                long ensemble_size, double tolerance);

// Chains and co-chains on the finite lattice of candidate reductions (all
// unions of decomposition records; capped at 2^10 subsets). k = largest
// co-chain (pairwise independent candidates, exact set-packing over the
// lattice), h = largest family of pairwise independent chains; the
// constructive argument of the Dilworth reformulation forces k = h.
struct ChainCochainReport {
  int k = 0;
  int h = 0;
  std::vector<std::vector<int>> cochain_witness;               // record indices
  std::vector<std::vector<std::vector<int>>> chain_witness;    // nested candidates
};

ChainCochainReport chain_cochain_analysis(const Decomposition& dec,
                                          int lattice_cap_log2 = 10);

struct CoverCheck {
  double assigned_fraction = 0.0;
  double unassigned_fraction = 0.0;
  bool covers = false;        // assigned + unassigned account for everything
                              // and the unassigned remainder is negligible
  bool all_physical = false;  // every record has diameter ~ 0
  bool physical_measures_exist = false;  // some record has diameter ~ 0
  std::string verdict;  // "all-physical" | "cover-without-physical" | "no-cover"
};

CoverCheck cochain_cover_check(const Decomposition& dec);

struct AttractionInMean {
  long established_n = 0;            // N from the adaptive search
  std::vector<long> ns;              // checkpoint schedule used
  std::vector<double> pass_fraction; // per n: fraction of samples with
                                     // iterate-fraction > 1 - eps
  std::vector<double> final_fractions;  // per sample at n_max
  bool passed = false;
};

// For sampled basin points, the fraction of the first n iterates inside the
// eps-neighborhood (bin dilation) of the record support must exceed 1 - eps
// for at least (1 - eps) of the samples, for every n >= N.
AttractionInMean attraction_in_mean(const InitialEnsemble& ens,
                                    const AttractorRecord& record, double eps,
                                    long orbit_length, int max_samples = 32);

// eps-dilation of a bin set in the phase-space metric.
std::vector<bool> dilate_bins(const HistogramGrid& grid,
                              const std::vector<Eigen::Index>& bins, double eps);

}  // namespace ergo
