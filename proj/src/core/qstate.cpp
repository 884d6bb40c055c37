#include "qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qsep {

namespace {

void check_same_length(int a, int b, const char* where) {
  if (a != b) {
    throw ValidationError(std::string(where) + ": qubit counts differ (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
}

Mat matrix_sqrt_psd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Vec root = es.eigenvalues().cast<cplx>();
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    const double ev = std::max(0.0, root(i).real());
    root(i) = std::sqrt(ev);
  }
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Qustring::Qustring(int n, Vec amplitudes) : n_(n), amp_(std::move(amplitudes)) {
  if (n_ < 1) throw ValidationError("Qustring: need n >= 1");
  if (static_cast<std::uint64_t>(amp_.size()) != dim_of(n_)) {
    throw ValidationError("Qustring: amplitude vector length must be 2^n");
  }
  const double norm = amp_.norm();
  if (std::abs(norm * norm - 1.0) > tol::kNorm) {
    throw ValidationError("Qustring: squared norm " + std::to_string(norm * norm) +
                          " outside 1e-9 of 1");
  }
  amp_ /= norm;
}

Qustring Qustring::basis_state(int n, std::uint64_t index) {
  if (n < 1) throw ValidationError("basis_state: need n >= 1");
  if (index >= dim_of(n)) throw ValidationError("basis_state: index out of range");
  Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  a(static_cast<Eigen::Index>(index)) = 1.0;
  return Qustring(n, std::move(a));
}

Qustring Qustring::basis_state(const std::string& bits) {
  if (bits.empty()) throw ValidationError("basis_state: empty bit string");
  std::uint64_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("basis_state: bits must be 0/1");
    idx = (idx << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return basis_state(static_cast<int>(bits.size()), idx);
}

DensityOperator DensityOperator::checked(int n, Mat m) {
  if (n < 1) throw ValidationError("DensityOperator: need n >= 1");
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  if (m.rows() != d || m.cols() != d) {
    throw ValidationError("DensityOperator: matrix must be 2^n x 2^n");
  }
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol::kHermitian) {
    throw ValidationError("DensityOperator: not Hermitian within 1e-9");
  }
  if (std::abs(m.trace().real() - 1.0) > tol::kHermitian || std::abs(m.trace().imag()) > tol::kHermitian) {
    throw ValidationError("DensityOperator: trace must be 1 within 1e-9");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::kHermitian) {
    throw ValidationError("DensityOperator: negative eigenvalue beyond 1e-9");
  }
  return DensityOperator(n, std::move(m));
}

DensityOperator DensityOperator::from_pure(const Qustring& psi) {
  Mat m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityOperator(psi.qubits(), std::move(m));
}

QubitPermutation::QubitPermutation(int n, std::vector<int> mapping) : n_(n), map_(std::move(mapping)) {
  if (n_ < 1 || map_.size() != static_cast<std::size_t>(n_)) {
    throw ValidationError("QubitPermutation: mapping length must equal n");
  }
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  for (int v : map_) {
    if (v < 1 || v > n_ || seen[static_cast<std::size_t>(v - 1)]) {
      throw ValidationError("QubitPermutation: mapping is not a bijection on {1..n}");
    }
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
}

QubitPermutation QubitPermutation::identity(int n) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 1);
  return QubitPermutation(n, std::move(m));
}

QubitPermutation QubitPermutation::random(int n, Rng& rng) {
  std::vector<int> m(static_cast<std::size_t>(n));
  std::iota(m.begin(), m.end(), 1);
  for (std::size_t i = m.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(m[i - 1], m[std::min(j, i - 1)]);
  }
  return QubitPermutation(n, std::move(m));
}

QubitPermutation QubitPermutation::inverse() const {
  std::vector<int> inv(static_cast<std::size_t>(n_));
  for (int j = 1; j <= n_; ++j) inv[static_cast<std::size_t>(map_[static_cast<std::size_t>(j - 1)] - 1)] = j;
  return QubitPermutation(n_, std::move(inv));
}

QubitPermutation QubitPermutation::then(const QubitPermutation& b) const {
  check_same_length(n_, b.n_, "QubitPermutation::then");
  // P_b P_a = P_{a∘b}: composite(j) = a(b(j)).
  std::vector<int> m(static_cast<std::size_t>(n_));
  for (int j = 1; j <= n_; ++j) m[static_cast<std::size_t>(j - 1)] = map_[static_cast<std::size_t>(b(j) - 1)];
  return QubitPermutation(n_, std::move(m));
}

bool QubitPermutation::is_identity() const {
  for (int j = 1; j <= n_; ++j) {
    if ((*this)(j) != j) return false;
  }
  return true;
}

Qustring tensor_product(const Qustring& a, const Qustring& b) {
  const int n = a.qubits() + b.qubits();
  Vec out(static_cast<Eigen::Index>(dim_of(n)));
  const auto db = dim_of(b.qubits());
  for (std::uint64_t x = 0; x < a.dim(); ++x) {
    for (std::uint64_t y = 0; y < db; ++y) {
      out(static_cast<Eigen::Index>((x << b.qubits()) | y)) = a.amplitude(x) * b.amplitude(y);
    }
  }
  return Qustring(n, std::move(out));
}

Qustring apply_permutation(const QubitPermutation& sigma, const Qustring& phi) {
  check_same_length(sigma.size(), phi.qubits(), "apply_permutation");
  const int n = phi.qubits();
  Vec out(phi.amplitudes().size());
  for (std::uint64_t y = 0; y < phi.dim(); ++y) {
    // output string y_1..y_n came from input x with x_{σ(j)} = y_j
    std::uint64_t x = 0;
    for (int j = 1; j <= n; ++j) x = set_bit(x, sigma(j), n, bit_of(y, j, n));
    out(static_cast<Eigen::Index>(y)) = phi.amplitude(x);
  }
  return Qustring(n, std::move(out));
}

DensityOperator apply_permutation(const QubitPermutation& sigma, const DensityOperator& rho) {
  check_same_length(sigma.size(), rho.qubits(), "apply_permutation");
  const int n = rho.qubits();
  const auto d = dim_of(n);
  std::vector<std::uint64_t> src(d);
  for (std::uint64_t y = 0; y < d; ++y) {
    std::uint64_t x = 0;
    for (int j = 1; j <= n; ++j) x = set_bit(x, sigma(j), n, bit_of(y, j, n));
    src[y] = x;
  }
  Mat out(rho.matrix().rows(), rho.matrix().cols());
  for (std::uint64_t r = 0; r < d; ++r) {
    for (std::uint64_t c = 0; c < d; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rho.matrix()(static_cast<Eigen::Index>(src[r]), static_cast<Eigen::Index>(src[c]));
    }
  }
  return DensityOperator::trusted(n, std::move(out));
}

namespace {

// Packs basis indices for a keep/rest split of {1..n}.
struct SplitIndexer {
  int n;
  std::vector<int> keep;  // ascending
  std::vector<int> rest;  // ascending

  SplitIndexer(int n_, const std::set<int>& keep_set) : n(n_) {
    for (int q : keep_set) {
      if (q < 1 || q > n) throw ValidationError("partial_trace: qubit index out of range");
      keep.push_back(q);
    }
    if (keep.empty()) throw ValidationError("partial_trace: keep set must be nonempty");
    for (int q = 1; q <= n; ++q) {
      if (!keep_set.count(q)) rest.push_back(q);
    }
  }

  std::uint64_t full_index(std::uint64_t keep_bits, std::uint64_t rest_bits) const {
    std::uint64_t idx = 0;
    const int kn = static_cast<int>(keep.size());
    const int rn = static_cast<int>(rest.size());
    for (int j = 0; j < kn; ++j) idx = set_bit(idx, keep[static_cast<std::size_t>(j)], n, bit_of(keep_bits, j + 1, kn));
    for (int j = 0; j < rn; ++j) idx = set_bit(idx, rest[static_cast<std::size_t>(j)], n, bit_of(rest_bits, j + 1, rn));
    return idx;
  }
};

}  // namespace

DensityOperator partial_trace(const DensityOperator& rho, const std::set<int>& keep) {
  const SplitIndexer ix(rho.qubits(), keep);
  const auto dk = dim_of(static_cast<int>(ix.keep.size()));
  const auto dr = dim_of(static_cast<int>(ix.rest.size()));
  Mat out = Mat::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::uint64_t a = 0; a < dk; ++a) {
    for (std::uint64_t b = 0; b < dk; ++b) {
      cplx acc = 0.0;
      for (std::uint64_t e = 0; e < dr; ++e) {
        acc += rho.matrix()(static_cast<Eigen::Index>(ix.full_index(a, e)),
                            static_cast<Eigen::Index>(ix.full_index(b, e)));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = acc;
    }
  }
  return DensityOperator::trusted(static_cast<int>(ix.keep.size()), std::move(out));
}

DensityOperator reduced_density(const Qustring& psi, const std::set<int>& keep) {
  const SplitIndexer ix(psi.qubits(), keep);
  const auto dk = dim_of(static_cast<int>(ix.keep.size()));
  const auto dr = dim_of(static_cast<int>(ix.rest.size()));
  // ρ_S = M M† with M[a,e] = ψ[interleave(a,e)]
  Mat m(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dr));
  for (std::uint64_t a = 0; a < dk; ++a) {
    for (std::uint64_t e = 0; e < dr; ++e) {
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(e)) = psi.amplitude(ix.full_index(a, e));
    }
  }
  Mat out = m * m.adjoint();
  return DensityOperator::trusted(static_cast<int>(ix.keep.size()), std::move(out));
}

double subset_purity(const Qustring& psi, const std::set<int>& keep) {
  const int n = psi.qubits();
  std::set<int> side = keep;
  if (2 * static_cast<int>(keep.size()) > n) {
    side.clear();
    for (int q = 1; q <= n; ++q) {
      if (!keep.count(q)) side.insert(q);
    }
    if (side.empty()) return 1.0;  // keep-all: pure input
  }
  const DensityOperator red = reduced_density(psi, side);
  return purity(red);
}

namespace {

Metrics pure_metrics(const Qustring& a, const Qustring& b) {
  check_same_length(a.qubits(), b.qubits(), "metrics");
  Metrics m;
  const double f = std::min(1.0, std::abs(inner_product(a, b)));
  m.fidelity = f;
  m.trace_distance = std::sqrt(std::max(0.0, 1.0 - f * f));
  m.bures = 2.0 * (1.0 - f);
  m.l2 = (a.amplitudes() - b.amplitudes()).norm();
  return m;
}

}  // namespace

Metrics metrics(const Qustring& a, const Qustring& b) { return pure_metrics(a, b); }

Metrics metrics(const DensityOperator& a, const DensityOperator& b) {
  check_same_length(a.qubits(), b.qubits(), "metrics");
  Metrics m;
  m.fidelity = fidelity(a, b);
  m.trace_distance = trace_distance(a, b);
  m.bures = 2.0 * (1.0 - m.fidelity);
  return m;  // l2 absent for mixed inputs
}

Metrics metrics(const Qustring& a, const DensityOperator& b) {
  return metrics(DensityOperator::from_pure(a), b);
}

double fidelity(const DensityOperator& a, const DensityOperator& b) {
  check_same_length(a.qubits(), b.qubits(), "fidelity");
  const Mat ra = matrix_sqrt_psd(a.matrix());
  Eigen::SelfAdjointEigenSolver<Mat> es(ra * b.matrix() * ra, Eigen::EigenvaluesOnly);
  double f = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    f += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  }
  return std::min(1.0, f);
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  check_same_length(a.qubits(), b.qubits(), "trace_distance");
  Eigen::SelfAdjointEigenSolver<Mat> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const Qustring& a, const Qustring& b) {
  const double f = std::min(1.0, std::abs(inner_product(a, b)));
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

double trace_distance_dual(const DensityOperator& a, const DensityOperator& b) {
  check_same_length(a.qubits(), b.qubits(), "trace_distance_dual");
  Eigen::SelfAdjointEigenSolver<Mat> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::max(0.0, es.eigenvalues()(i));
  return s;
}

double von_neumann_entropy(const DensityOperator& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix(), Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double ev = es.eigenvalues()(i);
    if (ev < -tol::kHermitian || ev > 1.0 + tol::kHermitian) {
      throw ValidationError("von_neumann_entropy: eigenvalue outside [0,1] beyond tolerance");
    }
    ev = std::clamp(ev, 0.0, 1.0);
    s += eta(ev);
  }
  return s;
}

double average_entropy(const Qustring& psi) {
  const int n = psi.qubits();
  if (n < 2) throw ValidationError("average_entropy: need n >= 2");
  double total = 0.0;
  for (int i = 2; i <= n; ++i) {
    std::set<int> prefix;
    for (int q = 1; q < i; ++q) prefix.insert(q);
    // spectrum of the prefix reduction equals the suffix reduction's
    std::set<int> side = prefix;
    if (2 * static_cast<int>(prefix.size()) > n) {
      side.clear();
      for (int q = i; q <= n; ++q) side.insert(q);
    }
    total += von_neumann_entropy(reduced_density(psi, side));
  }
  return total / static_cast<double>(n - 1);
}

double purity(const DensityOperator& rho) { return rho.matrix().squaredNorm(); }

namespace {

// Sorted single-qubit spectra, the fingerprint used to prune isotopy search.
std::vector<double> qubit_spectrum(const Qustring& psi, int q) {
  const DensityOperator red = reduced_density(psi, {q});
  Eigen::SelfAdjointEigenSolver<Mat> es(red.matrix(), Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

bool spectra_match(const std::vector<double>& a, const std::vector<double>& b) {
  return std::abs(a[0] - b[0]) < 1e-7 && std::abs(a[1] - b[1]) < 1e-7;
}

bool isotopy_backtrack(const Qustring& phi, const Qustring& psi,
                       const std::vector<std::vector<int>>& candidates, std::vector<int>& sigma,
                       std::vector<bool>& used, int pos) {
  const int n = phi.qubits();
  if (pos > n) {
    const Qustring mapped = apply_permutation(QubitPermutation(n, sigma), phi);
    return phase_insensitive_gap(mapped, psi) <= 1e-8;
  }
  for (int q : candidates[static_cast<std::size_t>(pos - 1)]) {
    if (used[static_cast<std::size_t>(q - 1)]) continue;
    sigma[static_cast<std::size_t>(pos - 1)] = q;
    used[static_cast<std::size_t>(q - 1)] = true;
    if (isotopy_backtrack(phi, psi, candidates, sigma, used, pos + 1)) return true;
    used[static_cast<std::size_t>(q - 1)] = false;
  }
  return false;
}

}  // namespace

double phase_insensitive_gap(const Qustring& a, const Qustring& b) {
  return 1.0 - std::abs(inner_product(a, b));
}

std::optional<QubitPermutation> is_isotopic(const Qustring& phi, const Qustring& psi) {
  check_same_length(phi.qubits(), psi.qubits(), "is_isotopic");
  const int n = phi.qubits();
  if (n > 8) throw CapabilityError("is_isotopic: exhaustive search limited to n <= 8");
  if (phase_insensitive_gap(phi, psi) <= 1e-8) return QubitPermutation::identity(n);

  std::vector<std::vector<double>> spec_phi, spec_psi;
  for (int q = 1; q <= n; ++q) {
    spec_phi.push_back(qubit_spectrum(phi, q));
    spec_psi.push_back(qubit_spectrum(psi, q));
  }
  // output position j takes input qubit σ(j), so spectra must agree
  std::vector<std::vector<int>> candidates(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    for (int q = 1; q <= n; ++q) {
      if (spectra_match(spec_phi[static_cast<std::size_t>(q - 1)], spec_psi[static_cast<std::size_t>(j - 1)])) {
        candidates[static_cast<std::size_t>(j - 1)].push_back(q);
      }
    }
    if (candidates[static_cast<std::size_t>(j - 1)].empty()) return std::nullopt;
  }
  std::vector<int> sigma(static_cast<std::size_t>(n), 0);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  if (isotopy_backtrack(phi, psi, candidates, sigma, used, 1)) {
    return QubitPermutation(n, sigma);
  }
  return std::nullopt;
}

Qustring random_qustring(int n, Rng& rng) {
  Vec a(static_cast<Eigen::Index>(dim_of(n)));
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = random_cplx_normal(rng);
  a /= a.norm();
  return Qustring(n, std::move(a));
}

DensityOperator random_density(int n, Rng& rng, int rank) {
  const auto d = static_cast<Eigen::Index>(dim_of(n));
  const Eigen::Index r = rank > 0 ? std::min<Eigen::Index>(rank, d) : d;
  Mat g(d, r);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) g(i, j) = random_cplx_normal(rng);
  }
  Mat m = g * g.adjoint();
  m /= m.trace().real();
  return DensityOperator::trusted(n, std::move(m));
}

}  // namespace qsep
