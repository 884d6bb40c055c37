#include <doctest.h>

#include <cmath>

#include "core/qcircuit.hpp"
#include "core/qstate.hpp"

using namespace qsep;

namespace {

Qustring bell() {
  Vec a(4);
  a << 1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0);
  return Qustring(2, a);
}

Qustring ghz(int n) { return make_ensemble("ghz").generator(n); }

}  // namespace

TEST_CASE("qustring invariants") {
  CHECK_THROWS_AS(Qustring(0, Vec::Ones(1)), ValidationError);
  CHECK_THROWS_AS(Qustring(2, Vec::Ones(3)), ValidationError);
  Vec bad = Vec::Ones(4);  // squared norm 4
  CHECK_THROWS_AS(Qustring(2, bad), ValidationError);
  CHECK(Qustring::basis_state("01").amplitude(1) == cplx{1.0, 0.0});
}

TEST_CASE("tensor product") {
  const Qustring q0 = Qustring::basis_state("0");
  const Qustring q1 = Qustring::basis_state("1");
  const Qustring q01 = tensor_product(q0, q1);
  CHECK(q01.qubits() == 2);
  CHECK(q01.amplitude(0) == cplx{0.0, 0.0});
  CHECK(q01.amplitude(1) == cplx{1.0, 0.0});
  CHECK(q01.amplitude(2) == cplx{0.0, 0.0});
  CHECK(q01.amplitude(3) == cplx{0.0, 0.0});

  // Bell ⊗ Bell is the 4-qubit blockwise state ψ'_4
  const Qustring bb = tensor_product(bell(), bell());
  CHECK(bb.amplitude(0b0000).real() == doctest::Approx(0.5));
  CHECK(bb.amplitude(0b0011).real() == doctest::Approx(0.5));
  CHECK(bb.amplitude(0b1100).real() == doctest::Approx(0.5));
  CHECK(bb.amplitude(0b1111).real() == doctest::Approx(0.5));

  Rng rng = make_rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const Qustring a = random_qustring(2, rng);
    const Qustring b = random_qustring(2, rng);
    CHECK(tensor_product(a, b).amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("apply_permutation") {
  Rng rng = make_rng(7);
  const Qustring phi = random_qustring(3, rng);
  const QubitPermutation id = QubitPermutation::identity(3);
  CHECK((apply_permutation(id, phi).amplitudes() - phi.amplitudes()).norm() == doctest::Approx(0.0));

  // the interleave σ = (1,3,2,4) unwinds ψ_4 into Bell ⊗ Bell
  const Qustring psi4 = make_ensemble("pairwise").generator(2);
  const QubitPermutation sigma(4, {1, 3, 2, 4});
  const Qustring unwound = apply_permutation(sigma, psi4);
  CHECK((unwound.amplitudes() - tensor_product(bell(), bell()).amplitudes()).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(uniform01(rng) * 4);
    const Qustring state = random_qustring(n, rng);
    const QubitPermutation p = QubitPermutation::random(n, rng);
    const Qustring roundtrip = apply_permutation(p.inverse(), apply_permutation(p, state));
    CHECK((roundtrip.amplitudes() - state.amplitudes()).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(apply_permutation(QubitPermutation::identity(2), phi), ValidationError);
  CHECK_THROWS_AS(QubitPermutation(3, {1, 1, 2}), ValidationError);
}

TEST_CASE("partial trace") {
  const Qustring q01 = Qustring::basis_state("01");
  const DensityOperator rho01 = DensityOperator::from_pure(q01);
  const DensityOperator kept = partial_trace(rho01, {1});
  CHECK(kept.qubits() == 1);
  CHECK(kept.matrix()(0, 0).real() == doctest::Approx(1.0));
  CHECK(std::abs(kept.matrix()(1, 1)) == doctest::Approx(0.0));

  const DensityOperator rb = partial_trace(DensityOperator::from_pure(bell()), {1});
  CHECK(rb.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(rb.matrix()(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(rb.matrix()(0, 1)) == doctest::Approx(0.0));

  // keep-all leaves the matrix unchanged
  const DensityOperator same = partial_trace(rho01, {1, 2});
  CHECK((same.matrix() - rho01.matrix()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  CHECK_THROWS_AS(partial_trace(rho01, {}), ValidationError);
  CHECK_THROWS_AS(partial_trace(rho01, {3}), ValidationError);

  // trace and positivity preserved on random inputs
  Rng rng = make_rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = random_density(3, rng);
    const DensityOperator red = partial_trace(rho, {1, 3});
    CHECK(red.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-10));
    Eigen::SelfAdjointEigenSolver<Mat> es(red.matrix(), Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("metrics") {
  Rng rng = make_rng(11);
  const Qustring phi = random_qustring(3, rng);
  const Metrics self = metrics(phi, phi);
  CHECK(self.fidelity == doctest::Approx(1.0));
  CHECK(self.trace_distance == doctest::Approx(0.0));
  CHECK(self.bures == doctest::Approx(0.0));
  CHECK(*self.l2 == doctest::Approx(0.0));

  const Metrics m = metrics(bell(), Qustring::basis_state("00"));
  CHECK(m.fidelity == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(m.trace_distance == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(m.bures == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-9));
  CHECK(*m.l2 == doctest::Approx(std::sqrt(2.0 - std::sqrt(2.0))).epsilon(1e-9));

  // 1 − F² <= T whenever one input is pure; mixed-mixed pairs only
  // guarantee 1 − F <= T, asserted separately below.
  for (int trial = 0; trial < 50; ++trial) {
    const Qustring a = random_qustring(2, rng);
    const Qustring b = random_qustring(2, rng);
    const Metrics pure_pair = metrics(a, b);
    CHECK(1.0 - pure_pair.fidelity * pure_pair.fidelity <= pure_pair.trace_distance + 1e-9);

    const DensityOperator tau = random_density(2, rng);
    const Metrics pure_mixed = metrics(a, tau);
    CHECK(1.0 - pure_mixed.fidelity * pure_mixed.fidelity <= pure_mixed.trace_distance + 1e-9);
    CHECK_FALSE(pure_mixed.l2.has_value());

    const DensityOperator rho = random_density(2, rng);
    const Metrics mixed_pair = metrics(rho, tau);
    CHECK(1.0 - mixed_pair.fidelity <= mixed_pair.trace_distance + 1e-9);
  }

  CHECK_THROWS_AS(metrics(phi, bell()), ValidationError);
}

TEST_CASE("metrics permutation invariance") {
  Rng rng = make_rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const Qustring a = random_qustring(3, rng);
    const Qustring b = random_qustring(3, rng);
    const QubitPermutation sigma = QubitPermutation::random(3, rng);
    const Metrics m1 = metrics(a, b);
    const Metrics m2 = metrics(apply_permutation(sigma, a), apply_permutation(sigma, b));
    CHECK(m1.fidelity == doctest::Approx(m2.fidelity).epsilon(1e-9));
    CHECK(m1.trace_distance == doctest::Approx(m2.trace_distance).epsilon(1e-9));
    CHECK(m1.bures == doctest::Approx(m2.bures).epsilon(1e-9));
    CHECK(*m1.l2 == doctest::Approx(*m2.l2).epsilon(1e-9));
    // pure-state trace distance is √(1−F²)
    CHECK(m1.trace_distance ==
          doctest::Approx(std::sqrt(1.0 - m1.fidelity * m1.fidelity)).epsilon(1e-9));
  }
}

TEST_CASE("partial trace is contractive for trace distance") {
  Rng rng = make_rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = random_density(3, rng);
    const DensityOperator tau = random_density(3, rng);
    const double full = trace_distance(rho, tau);
    const double reduced = trace_distance(partial_trace(rho, {1, 2}), partial_trace(tau, {1, 2}));
    CHECK(reduced <= full + 1e-9);
  }
}

TEST_CASE("von Neumann entropy") {
  CHECK(von_neumann_entropy(DensityOperator::from_pure(Qustring::basis_state("0"))) ==
        doctest::Approx(0.0));
  const DensityOperator mixed = DensityOperator::checked(1, Mat::Identity(2, 2) * 0.5);
  CHECK(von_neumann_entropy(mixed) == doctest::Approx(1.0));
  const DensityOperator half_bell = partial_trace(DensityOperator::from_pure(bell()), {1});
  CHECK(von_neumann_entropy(half_bell) == doctest::Approx(1.0));

  // S = 0 iff pure within tolerance
  Rng rng = make_rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = random_density(2, rng);
    const bool pure = purity(rho) >= 1.0 - 1e-9;
    const bool zero_entropy = von_neumann_entropy(rho) <= 1e-7;
    CHECK(pure == zero_entropy);
    const DensityOperator proj = DensityOperator::from_pure(random_qustring(2, rng));
    CHECK(von_neumann_entropy(proj) <= 1e-9);
    CHECK(purity(proj) >= 1.0 - 1e-9);
  }
}

TEST_CASE("average entropy") {
  CHECK(average_entropy(Qustring::zeros(4)) == doctest::Approx(0.0));
  for (int n = 2; n <= 8; ++n) {
    CHECK(average_entropy(ghz(n)) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // Bell on qubits (1,2) ⊗ |0⟩: prefix reductions give S = 1 then S = 0
  const Qustring b0 = tensor_product(bell(), Qustring::basis_state("0"));
  CHECK(average_entropy(b0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(average_entropy(Qustring::basis_state("0")), ValidationError);

  // prefix cuts are order dependent: permuting can change E
  const QubitPermutation sigma(3, {1, 3, 2});
  const double permuted = average_entropy(apply_permutation(sigma, b0));
  CHECK(permuted == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("isotopy") {
  Rng rng = make_rng(23);
  const Qustring phi = random_qustring(4, rng);
  auto found = is_isotopic(phi, phi);
  REQUIRE(found.has_value());
  CHECK(found->is_identity());

  const Qustring psi4 = make_ensemble("pairwise").generator(2);
  const Qustring bb = tensor_product(bell(), bell());
  auto sigma = is_isotopic(psi4, bb);
  REQUIRE(sigma.has_value());
  CHECK(phase_insensitive_gap(apply_permutation(*sigma, psi4), bb) <= 1e-8);

  const Qustring ghz3 = ghz(3);
  const Qustring zero_bell = tensor_product(Qustring::basis_state("0"), bell());
  CHECK_FALSE(is_isotopic(ghz3, zero_bell).has_value());

  CHECK_THROWS_AS(is_isotopic(phi, random_qustring(3, rng)), ValidationError);
  CHECK_THROWS_AS(is_isotopic(random_qustring(9, rng), random_qustring(9, rng)), CapabilityError);

  // random permutations are recovered (up to equivalent witnesses)
  for (int trial = 0; trial < 10; ++trial) {
    const Qustring state = random_qustring(4, rng);
    const QubitPermutation p = QubitPermutation::random(4, rng);
    auto witness = is_isotopic(state, apply_permutation(p, state));
    REQUIRE(witness.has_value());
    CHECK(phase_insensitive_gap(apply_permutation(*witness, state), apply_permutation(p, state)) <= 1e-8);
  }
}

TEST_CASE("trace distance dual characterization") {
  Rng rng = make_rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityOperator rho = random_density(2, rng);
    const DensityOperator tau = random_density(2, rng);
    CHECK(trace_distance(rho, tau) == doctest::Approx(trace_distance_dual(rho, tau)).epsilon(1e-11));
  }
}
