#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace qsep {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

// Input failed a contract (bad dimensions, malformed data, out-of-range k, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Request is well-formed but exceeds a documented size limit of the implementation.
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

namespace tol {
inline constexpr double kNorm = 1e-9;        // state normalization
inline constexpr double kJsonNorm = 1e-6;    // loader renormalization window
inline constexpr double kHermitian = 1e-9;
inline constexpr double kPurity = 1e-9;      // factorization split threshold
inline constexpr double kPurityFlag = 1e-6;  // borderline purity gets flagged
inline constexpr double kOverlapGain = 1e-10;
}  // namespace tol

inline constexpr const char* kToolName = "qsep";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kGateSetId = "I-X-H-T-CNOT-CSWAP/v1";
inline constexpr const char* kEncodingFormatId = "qenc-v1";

// qubit 1 is the most significant bit of a basis index, project-wide.
inline int bit_of(std::uint64_t index, int qubit, int n) {
  return static_cast<int>((index >> (n - qubit)) & 1u);
}

inline std::uint64_t set_bit(std::uint64_t index, int qubit, int n, int value) {
  const std::uint64_t mask = std::uint64_t{1} << (n - qubit);
  return value ? (index | mask) : (index & ~mask);
}

inline std::uint64_t dim_of(int n) { return std::uint64_t{1} << n; }

// Deterministic RNG plumbing. Per-work-item streams are derived from
// (seed, item index) so parallel results do not depend on the thread count.
using Rng = std::mt19937_64;

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  return Rng(mix_seed(seed, index));
}

// Uniform in [0,1) from the top 53 bits; avoids std::uniform_real_distribution
// so that seeded outputs are identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller, same cross-platform rationale.
inline double normal01(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline cplx random_cplx_normal(Rng& rng) {
  const double re = normal01(rng);
  const double im = normal01(rng);
  return {re, im};
}

// Runs fn(i) for i in [0, count). Results must be written to per-index slots by
// the caller; the schedule is a static block split, so output is deterministic
// for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline double log2_safe(double x) { return std::log2(x); }

// η(γ) = −γ log₂ γ, with η(0) = 0.
inline double eta(double gamma) {
  if (gamma <= 0.0) return 0.0;
  return -gamma * std::log2(gamma);
}

}  // namespace qsep
