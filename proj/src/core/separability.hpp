#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qstate.hpp"

namespace qsep {

// Set partition of {1..n} into k disjoint nonempty blocks. Canonical form:
// block members ascending, blocks ordered by smallest member.
class BlockPartition {
 public:
  BlockPartition(int n, std::vector<std::vector<int>> blocks);

  int n() const { return n_; }
  int k() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  std::vector<int> sectioning() const;  // block sizes m̄

  // σ with σ(position) = qubit, so apply_permutation(σ, φ) lays the blocks out
  // contiguously in block order.
  QubitPermutation canonical_sigma() const;

  bool operator==(const BlockPartition&) const = default;

 private:
  int n_;
  std::vector<std::vector<int>> blocks_;
};

// All partitions of {1..n} into exactly k blocks, canonical order
// (restricted-growth strings, lexicographic). Count is Stirling S(n,k).
std::vector<BlockPartition> partitions_into(int n, int k);
std::uint64_t stirling_second(int n, int k);

// Partition induced by a (σ, m̄) pair: section i covers positions
// (Σ_{j<i} m_j, ...]; its block is {σ(pos) : pos in section i}.
BlockPartition partition_from_pair(const QubitPermutation& sigma, const std::vector<int>& sectioning);

// (σ, m̄) pairs achieving a given partition: the canonical one plus
// `extra_random` samples (block order and within-block order shuffled).
std::vector<std::pair<QubitPermutation, std::vector<int>>> achieving_pairs(const BlockPartition& partition,
                                                                           int extra_random, Rng& rng);

struct SeparabilityReport {
  int sind = 1;
  BlockPartition finest_partition;
  std::vector<Qustring> factors;      // one per block, on the block's qubits (ascending)
  std::vector<double> residuals;      // per-block purity defects of accepted splits
  std::vector<double> borderline;     // purity defects in (1e-9, 1e-6]: flagged, not split
  double reconstruction_distance = 0.0;
};

// Unique finest factorization via recursive minimal-splitting-subset search.
// A subset splits iff its reduced purity is >= 1 - 1e-9. Cost 2^n; n <= 14.
SeparabilityReport finest_factorization(const Qustring& phi);

// true iff sind(phi) >= k.
bool is_k_separable(const Qustring& phi, int k);

struct ProductOverlap {
  double overlap = 0.0;
  std::vector<Qustring> witness;  // per-block factors
  bool converged = true;
  int iterations = 0;
  int restarts_used = 0;
};

struct OverlapOptions {
  int restarts = 16;
  double tol = tol::kOverlapGain;
  int max_sweeps = 1000;
  std::uint64_t seed = 1;
  bool exact_bipartition = true;  // 2-block partitions solved by SVD
};

// Local maximum of |⟨φ | ⊗_i ψ_i⟩| over unit vectors on the partition blocks,
// by alternating contraction updates with multi-restart. Exact (top singular
// value) for 2-block partitions.
ProductOverlap best_product_overlap(const Qustring& phi, const BlockPartition& partition,
                                    const OverlapOptions& opts = {});

// Product state over the partition from per-block factors.
Qustring assemble_product(const BlockPartition& partition, const std::vector<Qustring>& factors);

struct SdisResult {
  double value = 0.0;
  Qustring nearest;
  BlockPartition partition;
  double overlap = 0.0;
  bool all_converged = true;
};

struct SdisOptions {
  int restarts = 16;
  int threads = 1;
  std::uint64_t seed = 1;
};

// k-separability distance: min over k-block partitions of sqrt(1 - overlap²),
// with the optimizing witness. 2 <= k <= n, n <= 10.
SdisResult sdis(const Qustring& phi, int k, const SdisOptions& opts = {});

// Independent brute-force cross-check: per-block states from a discretized
// parameter grid (last block solved by exact contraction), plus the exact
// Schmidt evaluation on 2-block partitions. Upper-bounds sdis within grid
// resolution. n <= 4.
double sdis_oracle(const Qustring& phi, int k, int grid);

// Grid-only oracle value (no Schmidt shortcut), for resolution tests.
double sdis_oracle_grid_only(const Qustring& phi, int k, int grid);

enum class Closeness { kClose, kFar };

struct ClosenessReport {
  Closeness verdict = Closeness::kClose;
  double sdis_value = 0.0;
  double delta = 0.0;
  double margin = 0.0;
};

// (k,δ)-close iff sdis <= δ.
ClosenessReport classify_closeness(const Qustring& phi, int k, double delta,
                                   const SdisOptions& opts = {});

struct EntropyGapReport {
  bool applicable = false;  // requires sdis <= 1/e
  double sdis_value = 0.0;
  double lhs = 0.0;    // |E(φ) − E(nearest)|
  double bound = 0.0;  // sdis · (n − log₂ sdis)
  bool holds = false;
};

EntropyGapReport entropy_gap_check(const Qustring& phi, int k, const SdisOptions& opts = {});

}  // namespace qsep
