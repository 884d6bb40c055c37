#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qstate.hpp"

namespace qsep {

enum class GateKind : std::uint8_t { I = 0, X = 1, H = 2, T = 3, CNOT = 4, CSWAP = 5 };

int gate_arity(GateKind kind);
const char* gate_name(GateKind kind);
GateKind gate_from_name(const std::string& name);

struct Gate {
  GateKind kind = GateKind::I;
  // 1-based qubit indices; (target), (control,target) or (control,t1,t2).
  std::vector<int> targets;

  static Gate single(GateKind kind, int q) { return {kind, {q}}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}}; }
  static Gate cswap(int control, int t1, int t2) { return {GateKind::CSWAP, {control, t1, t2}}; }

  bool operator==(const Gate&) const = default;
};

// Fixed-gate-set circuit over inputs + ancillas; ancillas start in |0⟩ and the
// decision bit is read from output_qubit.
struct QuantumCircuit {
  int inputs = 1;
  int ancillas = 0;
  int output_qubit = 1;
  std::vector<Gate> gates;

  int total_qubits() const { return inputs + ancillas; }
  int size() const { return static_cast<int>(gates.size()); }
  void validate() const;

  bool operator==(const QuantumCircuit&) const = default;
};

// Full post-circuit state on inputs+ancillas qubits.
Qustring simulate(const QuantumCircuit& c, const Qustring& input);

// Applies one gate in place to a state vector over n qubits.
void apply_gate(Vec& amp, int n, const Gate& g);

// Prob[measured output bit = 1], exact.
double acceptance_probability(const QuantumCircuit& c, const Qustring& input);
double acceptance_probability(const QuantumCircuit& c, const DensityOperator& input);

// POVM element M on the input space with p(φ) = ⟨φ|M|φ⟩; obtained by exact
// simulation of all basis inputs. PSD and contractive.
Mat acceptance_povm(const QuantumCircuit& c);

// Output after c on |0...0⟩ with the listed qubits kept (ancilla trace-out).
DensityOperator output_density(const QuantumCircuit& c, const std::set<int>& keep);

// --- unary prefix encodings -------------------------------------------------

// 1^{σ,m̄} = 1^σ 0 1^m̄ 0 with 1^σ = 1^{σ(1)}0...1^{σ(n)}0 and
// 1^m̄ = 1^{m₁}0...1^{m_k}0; total length n²/2 + 5n/2 + k + 2.
struct PrefixEncoding {
  int n = 0;
  int k = 0;
  QubitPermutation sigma;
  std::vector<int> sectioning;
  std::string bits;  // ASCII '0'/'1'
};

PrefixEncoding encode_prefix(const QubitPermutation& sigma, const std::vector<int>& sectioning);
PrefixEncoding decode_prefix(const std::string& bits);
std::size_t prefix_length(int n, int k);

// --- constructor library ----------------------------------------------------

struct ConstructorResult {
  QuantumCircuit circuit;
  Qustring target;
};

// name: "ghz" | "pairwise" | "basis" (optional bit string arg) | "phase"
// (integer f-value arg). All ancilla-free with O(n) gates.
ConstructorResult constructor_library(const std::string& name, int n, const std::string& arg = "");

// Gates inverted and order reversed; T becomes T^7.
QuantumCircuit reverse_circuit(const QuantumCircuit& c);

// SWAP network (3 CNOTs per transposition) realizing sigma on the state vector.
QuantumCircuit permutation_network(const QubitPermutation& sigma);

// Collapses runs of consecutive T gates on one qubit mod 8 and drops I gates;
// used for structural circuit comparisons.
std::vector<Gate> canonical_t_runs(const std::vector<Gate>& gates);

// --- canonical self-delimiting serialization ---------------------------------

// Bit-exact format (docs/circuit_encoding.md): Elias-gamma(inputs),
// gamma(ancillas+1), gamma(output_qubit), gamma(#gates+1), then per gate a
// 3-bit tag and fixed-width (q-1) targets. Always >= gate count in bits.
std::string serialize_bits(const QuantumCircuit& c);
std::size_t encoding_length(const QuantumCircuit& c);
QuantumCircuit deserialize_bits(const std::string& bits);

// --- ensembles ----------------------------------------------------------------

struct EnsembleSpec {
  std::string name;
  std::function<int(int)> size_factor;          // strictly increasing n ↦ ℓ(n)
  std::function<Qustring(int)> generator;       // n ↦ state of length ℓ(n)
};

// "ghz" | "pairwise" | "w" | "basis[:bits]" | "phase:v"
EnsembleSpec make_ensemble(const std::string& name);

QuantumCircuit random_circuit(int qubits, int gate_count, Rng& rng, int ancillas = 0);

}  // namespace qsep
