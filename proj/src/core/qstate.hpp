#pragma once

#include <optional>
#include <set>
#include <vector>

#include "common.hpp"

namespace qsep {

// Pure state of n qubits. Amplitudes are indexed by basis strings in
// lexicographic order; qubit 1 is the most significant bit of the index.
class Qustring {
 public:
  Qustring(int n, Vec amplitudes);

  static Qustring basis_state(int n, std::uint64_t index);
  static Qustring basis_state(const std::string& bits);
  static Qustring zeros(int n) { return basis_state(n, 0); }

  int qubits() const { return n_; }
  std::uint64_t dim() const { return dim_of(n_); }
  const Vec& amplitudes() const { return amp_; }
  cplx amplitude(std::uint64_t index) const { return amp_(static_cast<Eigen::Index>(index)); }

 private:
  int n_;
  Vec amp_;
};

class DensityOperator {
 public:
  // Checks Hermiticity / PSD / unit trace within 1e-9.
  static DensityOperator checked(int n, Mat m);
  static DensityOperator from_pure(const Qustring& psi);

  int qubits() const { return n_; }
  const Mat& matrix() const { return m_; }

  // For operator outputs that preserve the invariants by construction.
  static DensityOperator trusted(int n, Mat m) { return DensityOperator(n, std::move(m)); }

 private:
  DensityOperator(int n, Mat m) : n_(n), m_(std::move(m)) {}
  int n_;
  Mat m_;
};

// Bijection sigma on {1..n}; sigma(j) = mapping()[j-1].
class QubitPermutation {
 public:
  QubitPermutation(int n, std::vector<int> mapping);

  static QubitPermutation identity(int n);
  static QubitPermutation random(int n, Rng& rng);

  int size() const { return n_; }
  int operator()(int j) const { return map_[static_cast<std::size_t>(j - 1)]; }
  const std::vector<int>& mapping() const { return map_; }

  QubitPermutation inverse() const;
  // (a.then(b))(φ) = b(a(φ)).
  QubitPermutation then(const QubitPermutation& b) const;
  bool is_identity() const;

 private:
  int n_;
  std::vector<int> map_;
};

Qustring tensor_product(const Qustring& a, const Qustring& b);

// σ(|φ⟩) = Σ α_x |x_{σ(1)} ... x_{σ(n)}⟩.
Qustring apply_permutation(const QubitPermutation& sigma, const Qustring& phi);

// Conjugates a density operator by the permutation unitary.
DensityOperator apply_permutation(const QubitPermutation& sigma, const DensityOperator& rho);

// Keeps the listed qubits (ascending order in the result), traces out the rest.
DensityOperator partial_trace(const DensityOperator& rho, const std::set<int>& keep);

// Reduced state of a pure input without forming the full 2^n x 2^n matrix.
DensityOperator reduced_density(const Qustring& psi, const std::set<int>& keep);

// Tr[ρ_S²] for pure psi, computed on the smaller side of the S | S^c cut.
double subset_purity(const Qustring& psi, const std::set<int>& keep);

struct Metrics {
  double fidelity = 0.0;
  double trace_distance = 0.0;  // ½-normalized trace norm, range [0,1]
  double bures = 0.0;           // 2(1 − F)
  std::optional<double> l2;     // pure inputs only
};

Metrics metrics(const Qustring& a, const Qustring& b);
Metrics metrics(const DensityOperator& a, const DensityOperator& b);
Metrics metrics(const Qustring& a, const DensityOperator& b);

double fidelity(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const DensityOperator& a, const DensityOperator& b);
double trace_distance(const Qustring& a, const Qustring& b);

// max over PSD contractive P of Tr(P(a−b)); equals the ½-normalized trace
// distance for trace-equal inputs. Used to exercise the dual characterization.
double trace_distance_dual(const DensityOperator& a, const DensityOperator& b);

inline cplx inner_product(const Qustring& a, const Qustring& b) {
  return a.amplitudes().dot(b.amplitudes());
}

// −Σ λ log₂ λ in bits; eigenvalues within 1e-9 of [0,1] are clipped,
// anything further out is a validation error.
double von_neumann_entropy(const DensityOperator& rho);

// (1/(n−1)) Σ_{i=2..n} S(reduction onto qubits 1..i−1).
double average_entropy(const Qustring& psi);

// Pure within tolerance: Tr ρ² ≥ 1 − 1e-9.
double purity(const DensityOperator& rho);

// Finds σ with σ(φ) = ψ up to global phase (1 − |⟨σ(φ)|ψ⟩| ≤ 1e-8), if any.
// Exhaustive with per-qubit spectral pruning; n ≤ 8.
std::optional<QubitPermutation> is_isotopic(const Qustring& phi, const Qustring& psi);

Qustring random_qustring(int n, Rng& rng);
DensityOperator random_density(int n, Rng& rng, int rank = 0);

// Largest |⟨a|e^{iθ}b⟩| alignment; returns 1 − |⟨a|b⟩|.
double phase_insensitive_gap(const Qustring& a, const Qustring& b);

}  // namespace qsep
