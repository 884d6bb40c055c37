#include "separability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

namespace qsep {

namespace {

constexpr double kInvE = 0.36787944117144232159552377016146;

void sort_canonical(std::vector<std::vector<int>>& blocks) {
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

}  // namespace

BlockPartition::BlockPartition(int n, std::vector<std::vector<int>> blocks)
    : n_(n), blocks_(std::move(blocks)) {
  if (n_ < 1) throw ValidationError("BlockPartition: need n >= 1");
  if (blocks_.empty()) throw ValidationError("BlockPartition: need at least one block");
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  int count = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw ValidationError("BlockPartition: empty block");
    for (int q : b) {
      if (q < 1 || q > n_ || seen[static_cast<std::size_t>(q - 1)]) {
        throw ValidationError("BlockPartition: blocks must partition {1..n}");
      }
      seen[static_cast<std::size_t>(q - 1)] = true;
      ++count;
    }
  }
  if (count != n_) throw ValidationError("BlockPartition: blocks must cover {1..n}");
  sort_canonical(blocks_);
}

std::vector<int> BlockPartition::sectioning() const {
  std::vector<int> m;
  m.reserve(blocks_.size());
  for (const auto& b : blocks_) m.push_back(static_cast<int>(b.size()));
  return m;
}

QubitPermutation BlockPartition::canonical_sigma() const {
  std::vector<int> mapping;
  mapping.reserve(static_cast<std::size_t>(n_));
  for (const auto& b : blocks_) mapping.insert(mapping.end(), b.begin(), b.end());
  return QubitPermutation(n_, std::move(mapping));
}

std::uint64_t stirling_second(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (n == 0) return k == 0 ? 1 : 0;
  std::vector<std::uint64_t> prev(static_cast<std::size_t>(k) + 1, 0), cur(static_cast<std::size_t>(k) + 1, 0);
  prev[0] = 1;
  for (int i = 1; i <= n; ++i) {
    cur.assign(cur.size(), 0);
    for (int j = 1; j <= std::min(i, k); ++j) {
      cur[static_cast<std::size_t>(j)] =
          static_cast<std::uint64_t>(j) * prev[static_cast<std::size_t>(j)] + prev[static_cast<std::size_t>(j - 1)];
    }
    std::swap(prev, cur);
  }
  return prev[static_cast<std::size_t>(k)];
}

namespace {

void rgs_recurse(int n, int k, int i, int maxv, std::vector<int>& a,
                 std::vector<BlockPartition>& out) {
  if (k - 1 - maxv > n - i) return;  // cannot reach k blocks anymore
  if (i == n) {
    if (maxv + 1 != k) return;
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(k));
    for (int q = 0; q < n; ++q) blocks[static_cast<std::size_t>(a[static_cast<std::size_t>(q)])].push_back(q + 1);
    out.emplace_back(n, std::move(blocks));
    return;
  }
  const int top = std::min(maxv + 1, k - 1);
  for (int v = 0; v <= top; ++v) {
    a[static_cast<std::size_t>(i)] = v;
    rgs_recurse(n, k, i + 1, std::max(maxv, v), a, out);
  }
}

}  // namespace

std::vector<BlockPartition> partitions_into(int n, int k) {
  if (k < 1 || k > n) throw ValidationError("partitions_into: need 1 <= k <= n");
  std::vector<BlockPartition> out;
  out.reserve(stirling_second(n, k));
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  rgs_recurse(n, k, 1, 0, a, out);  // a[0] = 0 fixed
  return out;
}

BlockPartition partition_from_pair(const QubitPermutation& sigma, const std::vector<int>& sectioning) {
  const int n = sigma.size();
  std::vector<std::vector<int>> blocks;
  int pos = 1;
  for (int m : sectioning) {
    if (m < 1) throw ValidationError("partition_from_pair: sectioning entries must be >= 1");
    std::vector<int> block;
    for (int j = 0; j < m; ++j) block.push_back(sigma(pos++));
    blocks.push_back(std::move(block));
  }
  if (pos != n + 1) throw ValidationError("partition_from_pair: sectioning must sum to n");
  return BlockPartition(n, std::move(blocks));
}

std::vector<std::pair<QubitPermutation, std::vector<int>>> achieving_pairs(const BlockPartition& partition,
                                                                           int extra_random, Rng& rng) {
  std::vector<std::pair<QubitPermutation, std::vector<int>>> out;
  out.emplace_back(partition.canonical_sigma(), partition.sectioning());
  const auto& blocks = partition.blocks();
  for (int r = 0; r < extra_random; ++r) {
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    std::vector<int> mapping;
    std::vector<int> sectioning;
    for (std::size_t bi : order) {
      std::vector<int> members = blocks[bi];
      for (std::size_t i = members.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(members[i - 1], members[std::min(j, i - 1)]);
      }
      mapping.insert(mapping.end(), members.begin(), members.end());
      sectioning.push_back(static_cast<int>(members.size()));
    }
    out.emplace_back(QubitPermutation(partition.n(), std::move(mapping)), std::move(sectioning));
  }
  return out;
}

// --- finest factorization -------------------------------------------------------

namespace {

// Reshape psi into a (block side) x (rest side) matrix, both sides in ascending
// local qubit order.
Mat reshape_split(const Qustring& psi, const std::vector<int>& block) {
  const int n = psi.qubits();
  std::vector<int> rest;
  for (int q = 1; q <= n; ++q) {
    if (std::find(block.begin(), block.end(), q) == block.end()) rest.push_back(q);
  }
  const int bn = static_cast<int>(block.size());
  const int rn = static_cast<int>(rest.size());
  Mat m(static_cast<Eigen::Index>(dim_of(bn)), static_cast<Eigen::Index>(std::max<std::uint64_t>(1, dim_of(rn))));
  for (std::uint64_t a = 0; a < dim_of(bn); ++a) {
    for (std::uint64_t e = 0; e < (rn == 0 ? 1 : dim_of(rn)); ++e) {
      std::uint64_t idx = 0;
      for (int j = 0; j < bn; ++j) idx = set_bit(idx, block[static_cast<std::size_t>(j)], n, bit_of(a, j + 1, bn));
      for (int j = 0; j < rn; ++j) idx = set_bit(idx, rest[static_cast<std::size_t>(j)], n, bit_of(e, j + 1, rn));
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(e)) = psi.amplitude(idx);
    }
  }
  return m;
}

struct FactorStep {
  Qustring block_state;
  Qustring rest_state;
};

FactorStep split_factors(const Qustring& psi, const std::vector<int>& block) {
  const Mat m = reshape_split(psi, block);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec u = svd.matrixU().col(0);
  Vec v = svd.matrixV().col(0).conjugate();
  return {Qustring(static_cast<int>(block.size()), std::move(u)),
          Qustring(psi.qubits() - static_cast<int>(block.size()), std::move(v))};
}

void factorize_recurse(const Qustring& state, const std::vector<int>& orig,
                       std::vector<std::vector<int>>& blocks, std::vector<Qustring>& factors,
                       std::vector<double>& residuals, std::vector<double>& borderline) {
  const int m = state.qubits();
  if (m == 1) {
    blocks.push_back(orig);
    factors.push_back(state);
    residuals.push_back(0.0);
    return;
  }
  // subsets through the anchor (local qubit 1), smallest first; the first one
  // that splits is the anchor's finest block
  std::vector<std::vector<std::uint64_t>> by_size(static_cast<std::size_t>(m));
  for (std::uint64_t mask = 0; mask < dim_of(m - 1); ++mask) {
    const auto sz = static_cast<std::size_t>(std::popcount(mask));
    if (sz + 1 < static_cast<std::size_t>(m)) by_size[sz].push_back(mask);
  }
  for (std::size_t sz = 0; sz + 1 < static_cast<std::size_t>(m); ++sz) {
    for (std::uint64_t mask : by_size[sz]) {
      std::vector<int> block{1};
      for (int q = 2; q <= m; ++q) {
        if ((mask >> (q - 2)) & 1u) block.push_back(q);
      }
      std::set<int> block_set(block.begin(), block.end());
      const double defect = 1.0 - subset_purity(state, block_set);
      if (defect <= tol::kPurity) {
        const FactorStep step = split_factors(state, block);
        std::vector<int> block_orig, rest_orig;
        for (int q : block) block_orig.push_back(orig[static_cast<std::size_t>(q - 1)]);
        for (int q = 1; q <= m; ++q) {
          if (!block_set.count(q)) rest_orig.push_back(orig[static_cast<std::size_t>(q - 1)]);
        }
        blocks.push_back(std::move(block_orig));
        factors.push_back(step.block_state);
        residuals.push_back(std::max(0.0, defect));
        factorize_recurse(step.rest_state, rest_orig, blocks, factors, residuals, borderline);
        return;
      }
      if (defect <= tol::kPurityFlag) borderline.push_back(defect);
    }
  }
  blocks.push_back(orig);
  factors.push_back(state);
  residuals.push_back(0.0);
}

}  // namespace

Qustring assemble_product(const BlockPartition& partition, const std::vector<Qustring>& factors) {
  const int n = partition.n();
  if (factors.size() != partition.blocks().size()) {
    throw ValidationError("assemble_product: factor count does not match block count");
  }
  Vec out(static_cast<Eigen::Index>(dim_of(n)));
  for (std::uint64_t idx = 0; idx < dim_of(n); ++idx) {
    cplx v = 1.0;
    for (std::size_t bi = 0; bi < factors.size(); ++bi) {
      const auto& block = partition.blocks()[bi];
      std::uint64_t sub = 0;
      const int bn = static_cast<int>(block.size());
      for (int j = 0; j < bn; ++j) sub = set_bit(sub, j + 1, bn, bit_of(idx, block[static_cast<std::size_t>(j)], n));
      v *= factors[bi].amplitude(sub);
    }
    out(static_cast<Eigen::Index>(idx)) = v;
  }
  return Qustring(n, std::move(out));
}

SeparabilityReport finest_factorization(const Qustring& phi) {
  const int n = phi.qubits();
  if (n > 14) throw CapabilityError("finest_factorization: limited to n <= 14");
  std::vector<std::vector<int>> blocks;
  std::vector<Qustring> factors;
  std::vector<double> residuals, borderline;
  std::vector<int> orig(static_cast<std::size_t>(n));
  std::iota(orig.begin(), orig.end(), 1);
  factorize_recurse(phi, orig, blocks, factors, residuals, borderline);

  BlockPartition partition(n, blocks);
  // blocks come out anchored on ascending minima, matching canonical order
  Qustring recon = assemble_product(partition, factors);
  const cplx z = inner_product(recon, phi);
  if (std::abs(z) > 1e-12) {
    Vec adjusted = factors.front().amplitudes() * (z / std::abs(z));
    factors.front() = Qustring(factors.front().qubits(), std::move(adjusted));
    recon = assemble_product(partition, factors);
  }

  SeparabilityReport report{static_cast<int>(blocks.size()), std::move(partition), std::move(factors),
                            std::move(residuals), std::move(borderline),
                            trace_distance(recon, phi)};
  return report;
}

bool is_k_separable(const Qustring& phi, int k) {
  if (k < 1 || k > phi.qubits()) throw ValidationError("is_k_separable: need 1 <= k <= n");
  if (k == 1) return true;
  return finest_factorization(phi).sind >= k;
}

// --- best product overlap --------------------------------------------------------

namespace {

// Per-qubit-index tables: sub[j][idx] = basis index of block j inside idx.
std::vector<std::vector<std::uint32_t>> block_subindex_tables(const BlockPartition& partition) {
  const int n = partition.n();
  std::vector<std::vector<std::uint32_t>> tables(partition.blocks().size());
  for (std::size_t bi = 0; bi < partition.blocks().size(); ++bi) {
    const auto& block = partition.blocks()[bi];
    const int bn = static_cast<int>(block.size());
    tables[bi].resize(dim_of(n));
    for (std::uint64_t idx = 0; idx < dim_of(n); ++idx) {
      std::uint64_t sub = 0;
      for (int j = 0; j < bn; ++j) sub = set_bit(sub, j + 1, bn, bit_of(idx, block[static_cast<std::size_t>(j)], n));
      tables[bi][idx] = static_cast<std::uint32_t>(sub);
    }
  }
  return tables;
}

Vec random_unit(Eigen::Index dim, Rng& rng) {
  Vec v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = random_cplx_normal(rng);
  v /= v.norm();
  return v;
}

ProductOverlap overlap_bipartition_svd(const Qustring& phi, const BlockPartition& partition) {
  const Mat m = reshape_split(phi, partition.blocks()[0]);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ProductOverlap result;
  result.overlap = svd.singularValues()(0);
  Vec u = svd.matrixU().col(0);
  Vec v = svd.matrixV().col(0).conjugate();
  result.witness.emplace_back(static_cast<int>(partition.blocks()[0].size()), std::move(u));
  result.witness.emplace_back(static_cast<int>(partition.blocks()[1].size()), std::move(v));
  result.converged = true;
  return result;
}

}  // namespace

ProductOverlap best_product_overlap(const Qustring& phi, const BlockPartition& partition,
                                    const OverlapOptions& opts) {
  if (partition.n() != phi.qubits()) {
    throw ValidationError("best_product_overlap: partition size does not match state");
  }
  const int k = partition.k();
  if (k == 1) {
    ProductOverlap r;
    r.overlap = 1.0;
    r.witness.push_back(phi);
    return r;
  }
  if (k == 2 && opts.exact_bipartition) return overlap_bipartition_svd(phi, partition);

  const auto tables = block_subindex_tables(partition);
  const int n = phi.qubits();
  const auto dim = dim_of(n);

  ProductOverlap best;
  best.overlap = -1.0;
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Rng rng = make_rng(opts.seed, static_cast<std::uint64_t>(restart));
    std::vector<Vec> psi;
    for (int bi = 0; bi < k; ++bi) {
      const auto bdim = static_cast<Eigen::Index>(dim_of(static_cast<int>(partition.blocks()[static_cast<std::size_t>(bi)].size())));
      if (restart == 0) {
        // warm start: dominant eigenvector of the block's reduced state
        std::set<int> keep(partition.blocks()[static_cast<std::size_t>(bi)].begin(),
                           partition.blocks()[static_cast<std::size_t>(bi)].end());
        Eigen::SelfAdjointEigenSolver<Mat> es(reduced_density(phi, keep).matrix());
        psi.push_back(es.eigenvectors().col(es.eigenvalues().size() - 1));
      } else {
        psi.push_back(random_unit(bdim, rng));
      }
    }

    double prev = 0.0;
    bool converged = false;
    int sweeps = 0;
    for (; sweeps < opts.max_sweeps; ++sweeps) {
      double current = prev;
      for (int bi = 0; bi < k; ++bi) {
        const auto bdim = static_cast<Eigen::Index>(psi[static_cast<std::size_t>(bi)].size());
        Vec contraction = Vec::Zero(bdim);
        for (std::uint64_t idx = 0; idx < dim; ++idx) {
          cplx w = phi.amplitude(idx);
          if (w == cplx{0.0, 0.0}) continue;
          for (int bj = 0; bj < k; ++bj) {
            if (bj == bi) continue;
            w *= std::conj(psi[static_cast<std::size_t>(bj)](static_cast<Eigen::Index>(tables[static_cast<std::size_t>(bj)][idx])));
          }
          contraction(static_cast<Eigen::Index>(tables[static_cast<std::size_t>(bi)][idx])) += w;
        }
        const double norm = contraction.norm();
        if (norm < 1e-14) {
          psi[static_cast<std::size_t>(bi)] = random_unit(bdim, rng);  // degenerate block, fresh start
          continue;
        }
        psi[static_cast<std::size_t>(bi)] = contraction / norm;
        current = norm;
      }
      if (current - prev < opts.tol && sweeps > 0) {
        prev = std::max(prev, current);
        converged = true;
        break;
      }
      prev = current;
    }

    if (prev > best.overlap) {
      best.overlap = prev;
      best.converged = converged;
      best.iterations = sweeps;
      best.restarts_used = restart + 1;
      best.witness.clear();
      for (int bi = 0; bi < k; ++bi) {
        best.witness.emplace_back(static_cast<int>(partition.blocks()[static_cast<std::size_t>(bi)].size()),
                                  psi[static_cast<std::size_t>(bi)]);
      }
    }
  }
  best.overlap = std::min(1.0, best.overlap);
  return best;
}

// --- sdis -------------------------------------------------------------------------

SdisResult sdis(const Qustring& phi, int k, const SdisOptions& opts) {
  const int n = phi.qubits();
  if (k < 2 || k > n) throw ValidationError("sdis: need 2 <= k <= n");
  if (n > 10) throw CapabilityError("sdis: partition enumeration limited to n <= 10");

  const std::vector<BlockPartition> parts = partitions_into(n, k);
  struct Branch {
    double overlap = -1.0;
    bool converged = true;
    std::vector<Qustring> witness;
  };
  std::vector<Branch> branches(parts.size());
  parallel_for(parts.size(), opts.threads, [&](std::size_t i) {
    OverlapOptions oo;
    oo.restarts = opts.restarts;
    oo.seed = mix_seed(opts.seed, i);
    const ProductOverlap po = best_product_overlap(phi, parts[i], oo);
    branches[i] = Branch{po.overlap, po.converged, po.witness};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < branches.size(); ++i) {
    if (branches[i].overlap > branches[best].overlap) best = i;
  }

  SdisResult result{std::sqrt(std::max(0.0, 1.0 - branches[best].overlap * branches[best].overlap)),
                    assemble_product(parts[best], branches[best].witness), parts[best],
                    branches[best].overlap, true};
  for (const Branch& b : branches) result.all_converged = result.all_converged && b.converged;
  return result;
}

// --- brute-force oracle -------------------------------------------------------------

namespace {

Vec bloch_point(int theta_step, int phi_step, int grid) {
  const double theta = 3.14159265358979323846 * theta_step / std::max(1, grid - 1);
  const double ph = 2.0 * 3.14159265358979323846 * phi_step / grid;
  Vec v(2);
  v(0) = std::cos(theta / 2.0);
  v(1) = std::polar(std::sin(theta / 2.0), ph);
  return v;
}

double oracle_partition_overlap(const Qustring& phi, const BlockPartition& partition, int grid) {
  const int k = partition.k();
  const auto tables = block_subindex_tables(partition);
  // grid every block except the largest, which is solved exactly by contraction
  std::size_t solve = 0;
  for (std::size_t bi = 1; bi < partition.blocks().size(); ++bi) {
    if (partition.blocks()[bi].size() > partition.blocks()[solve].size()) solve = bi;
  }
  std::vector<std::size_t> gridded;
  for (std::size_t bi = 0; bi < partition.blocks().size(); ++bi) {
    if (bi != solve) {
      if (partition.blocks()[bi].size() != 1) {
        throw CapabilityError("sdis_oracle: grid search requires single-qubit gridded blocks");
      }
      gridded.push_back(bi);
    }
  }

  const auto dim = dim_of(phi.qubits());
  const auto solve_dim = static_cast<Eigen::Index>(dim_of(static_cast<int>(partition.blocks()[solve].size())));
  std::vector<Vec> psi(static_cast<std::size_t>(k), Vec());
  double best = 0.0;
  std::vector<int> steps(gridded.size() * 2, 0);

  const std::size_t points = static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  std::size_t total = 1;
  for (std::size_t i = 0; i < gridded.size(); ++i) total *= points;

  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t gi = 0; gi < gridded.size(); ++gi) {
      const auto point = rem % points;
      rem /= points;
      psi[gridded[gi]] = bloch_point(static_cast<int>(point / grid), static_cast<int>(point % grid), grid);
    }
    Vec contraction = Vec::Zero(solve_dim);
    for (std::uint64_t idx = 0; idx < dim; ++idx) {
      cplx w = phi.amplitude(idx);
      if (w == cplx{0.0, 0.0}) continue;
      for (std::size_t bi = 0; bi < static_cast<std::size_t>(k); ++bi) {
        if (bi == solve) continue;
        w *= std::conj(psi[bi](static_cast<Eigen::Index>(tables[bi][idx])));
      }
      contraction(static_cast<Eigen::Index>(tables[solve][idx])) += w;
    }
    best = std::max(best, contraction.norm());
  }
  return best;
}

}  // namespace

double sdis_oracle(const Qustring& phi, int k, int grid) {
  const int n = phi.qubits();
  if (n > 4) throw CapabilityError("sdis_oracle: limited to n <= 4");
  if (k < 2 || k > n) throw ValidationError("sdis_oracle: need 2 <= k <= n");
  if (grid < 2) throw ValidationError("sdis_oracle: grid must be >= 2");
  double best = 0.0;
  for (const BlockPartition& p : partitions_into(n, k)) {
    double ov;
    if (p.k() == 2) {
      ov = overlap_bipartition_svd(phi, p).overlap;  // exact Schmidt evaluation
    } else {
      ov = oracle_partition_overlap(phi, p, grid);
    }
    best = std::max(best, ov);
  }
  return std::sqrt(std::max(0.0, 1.0 - best * best));
}

double sdis_oracle_grid_only(const Qustring& phi, int k, int grid) {
  const int n = phi.qubits();
  if (n > 4) throw CapabilityError("sdis_oracle: limited to n <= 4");
  if (k < 2 || k > n) throw ValidationError("sdis_oracle: need 2 <= k <= n");
  double best = 0.0;
  for (const BlockPartition& p : partitions_into(n, k)) {
    best = std::max(best, oracle_partition_overlap(phi, p, grid));
  }
  return std::sqrt(std::max(0.0, 1.0 - best * best));
}

// --- closeness and the entropy gap ---------------------------------------------------

ClosenessReport classify_closeness(const Qustring& phi, int k, double delta, const SdisOptions& opts) {
  if (delta < 0.0 || delta > 1.0) throw ValidationError("classify_closeness: delta must be in [0,1]");
  const SdisResult r = sdis(phi, k, opts);
  ClosenessReport report;
  report.sdis_value = r.value;
  report.delta = delta;
  report.verdict = r.value <= delta ? Closeness::kClose : Closeness::kFar;
  report.margin = std::abs(r.value - delta);
  return report;
}

EntropyGapReport entropy_gap_check(const Qustring& phi, int k, const SdisOptions& opts) {
  const SdisResult r = sdis(phi, k, opts);
  EntropyGapReport report;
  report.sdis_value = r.value;
  if (r.value > kInvE) {
    report.applicable = false;
    return report;
  }
  report.applicable = true;
  report.lhs = std::abs(average_entropy(phi) - average_entropy(r.nearest));
  // sdis·(n − log₂ sdis) = n·sdis + η(sdis)
  report.bound = r.value * static_cast<double>(phi.qubits()) + eta(r.value);
  report.holds = report.lhs <= report.bound + 1e-9;
  return report;
}

}  // namespace qsep
