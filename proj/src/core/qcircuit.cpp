#include "qcircuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace qsep {

namespace {
const cplx kTPhase = std::polar(1.0, 0.78539816339744830961566084581988);  // e^{iπ/4}
const double kInvSqrt2 = 0.70710678118654752440084436210485;
}  // namespace

int gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::I:
    case GateKind::X:
    case GateKind::H:
    case GateKind::T:
      return 1;
    case GateKind::CNOT:
      return 2;
    case GateKind::CSWAP:
      return 3;
  }
  throw ValidationError("gate_arity: unknown gate kind");
}

const char* gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::I: return "I";
    case GateKind::X: return "X";
    case GateKind::H: return "H";
    case GateKind::T: return "T";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CSWAP: return "CSWAP";
  }
  throw ValidationError("gate_name: unknown gate kind");
}

GateKind gate_from_name(const std::string& name) {
  if (name == "I") return GateKind::I;
  if (name == "X") return GateKind::X;
  if (name == "H") return GateKind::H;
  if (name == "T") return GateKind::T;
  if (name == "CNOT") return GateKind::CNOT;
  if (name == "CSWAP") return GateKind::CSWAP;
  throw ValidationError("unknown gate name: " + name);
}

void QuantumCircuit::validate() const {
  if (inputs < 1) throw ValidationError("QuantumCircuit: need at least one input qubit");
  if (ancillas < 0) throw ValidationError("QuantumCircuit: negative ancilla count");
  if (output_qubit < 1 || output_qubit > total_qubits()) {
    throw ValidationError("QuantumCircuit: output qubit out of range");
  }
  for (const Gate& g : gates) {
    if (static_cast<int>(g.targets.size()) != gate_arity(g.kind)) {
      throw ValidationError("QuantumCircuit: gate target count does not match arity");
    }
    for (std::size_t i = 0; i < g.targets.size(); ++i) {
      const int q = g.targets[i];
      if (q < 1 || q > total_qubits()) throw ValidationError("QuantumCircuit: gate target out of range");
      for (std::size_t j = i + 1; j < g.targets.size(); ++j) {
        if (g.targets[j] == q) throw ValidationError("QuantumCircuit: gate targets must be distinct");
      }
    }
  }
}

void apply_gate(Vec& amp, int n, const Gate& g) {
  const auto dim = static_cast<std::uint64_t>(amp.size());
  switch (g.kind) {
    case GateKind::I:
      return;
    case GateKind::X: {
      const std::uint64_t m = std::uint64_t{1} << (n - g.targets[0]);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if (!(i & m)) std::swap(amp(static_cast<Eigen::Index>(i)), amp(static_cast<Eigen::Index>(i | m)));
      }
      return;
    }
    case GateKind::H: {
      const std::uint64_t m = std::uint64_t{1} << (n - g.targets[0]);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & m) continue;
        const cplx a0 = amp(static_cast<Eigen::Index>(i));
        const cplx a1 = amp(static_cast<Eigen::Index>(i | m));
        amp(static_cast<Eigen::Index>(i)) = (a0 + a1) * kInvSqrt2;
        amp(static_cast<Eigen::Index>(i | m)) = (a0 - a1) * kInvSqrt2;
      }
      return;
    }
    case GateKind::T: {
      const std::uint64_t m = std::uint64_t{1} << (n - g.targets[0]);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & m) amp(static_cast<Eigen::Index>(i)) *= kTPhase;
      }
      return;
    }
    case GateKind::CNOT: {
      const std::uint64_t mc = std::uint64_t{1} << (n - g.targets[0]);
      const std::uint64_t mt = std::uint64_t{1} << (n - g.targets[1]);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mc) && !(i & mt)) {
          std::swap(amp(static_cast<Eigen::Index>(i)), amp(static_cast<Eigen::Index>(i | mt)));
        }
      }
      return;
    }
    case GateKind::CSWAP: {
      const std::uint64_t mc = std::uint64_t{1} << (n - g.targets[0]);
      const std::uint64_t m1 = std::uint64_t{1} << (n - g.targets[1]);
      const std::uint64_t m2 = std::uint64_t{1} << (n - g.targets[2]);
      for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & mc) && (i & m1) && !(i & m2)) {
          std::swap(amp(static_cast<Eigen::Index>(i)), amp(static_cast<Eigen::Index>((i & ~m1) | m2)));
        }
      }
      return;
    }
  }
}

Qustring simulate(const QuantumCircuit& c, const Qustring& input) {
  c.validate();
  if (input.qubits() != c.inputs) {
    throw ValidationError("simulate: input length " + std::to_string(input.qubits()) +
                          " does not match circuit inputs " + std::to_string(c.inputs));
  }
  const int n = c.total_qubits();
  Vec amp = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  // ancillas are the trailing qubits and start in |0⟩
  for (std::uint64_t x = 0; x < input.dim(); ++x) {
    amp(static_cast<Eigen::Index>(x << c.ancillas)) = input.amplitude(x);
  }
  for (const Gate& g : c.gates) apply_gate(amp, n, g);
  return Qustring(n, std::move(amp));
}

double acceptance_probability(const QuantumCircuit& c, const Qustring& input) {
  const Qustring out = simulate(c, input);
  const int n = c.total_qubits();
  const std::uint64_t m = std::uint64_t{1} << (n - c.output_qubit);
  double p = 0.0;
  for (std::uint64_t i = 0; i < out.dim(); ++i) {
    if (i & m) p += std::norm(out.amplitude(i));
  }
  return p;
}

double acceptance_probability(const QuantumCircuit& c, const DensityOperator& input) {
  Eigen::SelfAdjointEigenSolver<Mat> es(input.matrix());
  double p = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double w = es.eigenvalues()(i);
    if (w < 1e-14) continue;
    Vec v = es.eigenvectors().col(i);
    p += w * acceptance_probability(c, Qustring(input.qubits(), std::move(v)));
  }
  return std::clamp(p, 0.0, 1.0);
}

Mat acceptance_povm(const QuantumCircuit& c) {
  c.validate();
  const auto din = static_cast<Eigen::Index>(dim_of(c.inputs));
  const int n = c.total_qubits();
  const std::uint64_t mask = std::uint64_t{1} << (n - c.output_qubit);
  // columns = accept-projected output states of all basis inputs
  Mat proj(static_cast<Eigen::Index>(dim_of(n)), din);
  for (Eigen::Index j = 0; j < din; ++j) {
    const Qustring out = simulate(c, Qustring::basis_state(c.inputs, static_cast<std::uint64_t>(j)));
    for (std::uint64_t i = 0; i < out.dim(); ++i) {
      proj(static_cast<Eigen::Index>(i), j) = (i & mask) ? out.amplitude(i) : cplx{0.0, 0.0};
    }
  }
  return proj.adjoint() * proj;
}

DensityOperator output_density(const QuantumCircuit& c, const std::set<int>& keep) {
  const Qustring out = simulate(c, Qustring::zeros(c.inputs));
  return reduced_density(out, keep);
}

// --- prefix codec -------------------------------------------------------------

std::size_t prefix_length(int n, int k) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2 +
         2 * static_cast<std::size_t>(n) + static_cast<std::size_t>(k) + 2;
}

PrefixEncoding encode_prefix(const QubitPermutation& sigma, const std::vector<int>& sectioning) {
  const int n = sigma.size();
  int sum = 0;
  for (int m : sectioning) {
    if (m < 1) throw ValidationError("encode_prefix: sectioning entries must be >= 1");
    sum += m;
  }
  if (sum != n) throw ValidationError("encode_prefix: sectioning must sum to n");

  std::string bits;
  bits.reserve(prefix_length(n, static_cast<int>(sectioning.size())));
  for (int j = 1; j <= n; ++j) {
    bits.append(static_cast<std::size_t>(sigma(j)), '1');
    bits.push_back('0');
  }
  bits.push_back('0');
  for (int m : sectioning) {
    bits.append(static_cast<std::size_t>(m), '1');
    bits.push_back('0');
  }
  bits.push_back('0');

  if (bits.size() != prefix_length(n, static_cast<int>(sectioning.size()))) {
    throw ValidationError("encode_prefix: length formula violated (internal)");
  }
  return PrefixEncoding{n, static_cast<int>(sectioning.size()), sigma, sectioning, std::move(bits)};
}

PrefixEncoding decode_prefix(const std::string& bits) {
  std::size_t pos = 0;
  auto read_run = [&bits, &pos]() -> int {
    int run = 0;
    while (pos < bits.size() && bits[pos] == '1') {
      ++run;
      ++pos;
    }
    if (pos >= bits.size() || bits[pos] != '0') throw ValidationError("decode_prefix: missing run terminator");
    ++pos;
    return run;
  };

  std::vector<int> sigma_vals;
  while (true) {
    const int run = read_run();
    if (run == 0) break;  // group separator
    sigma_vals.push_back(run);
  }
  std::vector<int> sectioning;
  while (true) {
    const int run = read_run();
    if (run == 0) break;
    sectioning.push_back(run);
  }
  if (pos != bits.size()) throw ValidationError("decode_prefix: trailing bits");
  if (sigma_vals.empty() || sectioning.empty()) throw ValidationError("decode_prefix: empty groups");

  const int n = static_cast<int>(sigma_vals.size());
  QubitPermutation sigma(n, sigma_vals);
  int sum = 0;
  for (int m : sectioning) sum += m;
  if (sum != n) throw ValidationError("decode_prefix: sectioning does not sum to n");
  return PrefixEncoding{n, static_cast<int>(sectioning.size()), std::move(sigma), std::move(sectioning),
                        bits};
}

// --- constructor library ------------------------------------------------------

namespace {

QuantumCircuit ghz_circuit(int n) {
  QuantumCircuit c;
  c.inputs = n;
  c.gates.push_back(Gate::single(GateKind::H, 1));
  for (int q = 2; q <= n; ++q) c.gates.push_back(Gate::cnot(q - 1, q));
  return c;
}

Qustring ghz_state(int n) {
  Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  a(0) = kInvSqrt2;
  a(static_cast<Eigen::Index>(dim_of(n) - 1)) = kInvSqrt2;
  return Qustring(n, std::move(a));
}

Qustring pairwise_state(int half) {
  const int n = 2 * half;
  Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
  const double amp = std::pow(2.0, -0.5 * half);
  for (std::uint64_t x = 0; x < dim_of(half); ++x) {
    a(static_cast<Eigen::Index>((x << half) | x)) = amp;
  }
  return Qustring(n, std::move(a));
}

// σ with σ(2i−1) = i, σ(2i) = half+i sends ψ_{2·half} to Bell^{⊗half}.
QubitPermutation pairwise_unnesting(int half) {
  std::vector<int> m(static_cast<std::size_t>(2 * half));
  for (int i = 1; i <= half; ++i) {
    m[static_cast<std::size_t>(2 * i - 2)] = i;
    m[static_cast<std::size_t>(2 * i - 1)] = half + i;
  }
  return QubitPermutation(2 * half, std::move(m));
}

}  // namespace

ConstructorResult constructor_library(const std::string& name, int n, const std::string& arg) {
  if (n < 1) throw ValidationError("constructor_library: need n >= 1");
  if (name == "ghz") {
    return {ghz_circuit(n), ghz_state(n)};
  }
  if (name == "pairwise") {
    if (n % 2 != 0) throw ValidationError("constructor_library: pairwise needs even length");
    const int half = n / 2;
    QuantumCircuit c;
    c.inputs = n;
    for (int i = 1; i <= half; ++i) {
      c.gates.push_back(Gate::single(GateKind::H, 2 * i - 1));
      c.gates.push_back(Gate::cnot(2 * i - 1, 2 * i));
    }
    const QuantumCircuit net = permutation_network(pairwise_unnesting(half).inverse());
    c.gates.insert(c.gates.end(), net.gates.begin(), net.gates.end());
    return {std::move(c), pairwise_state(half)};
  }
  if (name == "basis") {
    std::string bits = arg.empty() ? std::string(static_cast<std::size_t>(n), '0') : arg;
    if (static_cast<int>(bits.size()) != n) throw ValidationError("constructor_library: basis bits length != n");
    QuantumCircuit c;
    c.inputs = n;
    for (int q = 1; q <= n; ++q) {
      const char b = bits[static_cast<std::size_t>(q - 1)];
      if (b == '1') {
        c.gates.push_back(Gate::single(GateKind::X, q));
      } else if (b != '0') {
        throw ValidationError("constructor_library: basis bits must be 0/1");
      }
    }
    return {std::move(c), Qustring::basis_state(bits)};
  }
  if (name == "phase") {
    if (n < 2) throw ValidationError("constructor_library: phase needs n >= 2");
    long f = 0;
    if (!arg.empty()) f = std::stol(arg);
    QuantumCircuit c = ghz_circuit(n);
    Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
    a(0) = kInvSqrt2;
    a(static_cast<Eigen::Index>(dim_of(n) - 1)) = (f % 2 != 0) ? -kInvSqrt2 : kInvSqrt2;
    if (f % 2 != 0) {
      // Z on qubit 1, realized as T^4
      for (int i = 0; i < 4; ++i) c.gates.push_back(Gate::single(GateKind::T, 1));
    }
    return {std::move(c), Qustring(n, std::move(a))};
  }
  throw ValidationError("constructor_library: unknown name '" + name + "'");
}

QuantumCircuit reverse_circuit(const QuantumCircuit& c) {
  QuantumCircuit out;
  out.inputs = c.inputs;
  out.ancillas = c.ancillas;
  out.output_qubit = c.output_qubit;
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    if (it->kind == GateKind::T) {
      for (int i = 0; i < 7; ++i) out.gates.push_back(*it);  // T† = T^7
    } else {
      out.gates.push_back(*it);  // H, X, CNOT, CSWAP, I are involutions
    }
  }
  return out;
}

QuantumCircuit permutation_network(const QubitPermutation& sigma) {
  const int n = sigma.size();
  QuantumCircuit c;
  c.inputs = n;
  // wire j must end up carrying input qubit sigma(j)
  std::vector<int> cur(static_cast<std::size_t>(n));
  for (int w = 1; w <= n; ++w) cur[static_cast<std::size_t>(w - 1)] = w;
  for (int j = 1; j <= n; ++j) {
    if (cur[static_cast<std::size_t>(j - 1)] == sigma(j)) continue;
    int w = j + 1;
    while (cur[static_cast<std::size_t>(w - 1)] != sigma(j)) ++w;
    c.gates.push_back(Gate::cnot(j, w));
    c.gates.push_back(Gate::cnot(w, j));
    c.gates.push_back(Gate::cnot(j, w));
    std::swap(cur[static_cast<std::size_t>(j - 1)], cur[static_cast<std::size_t>(w - 1)]);
  }
  return c;
}

std::vector<Gate> canonical_t_runs(const std::vector<Gate>& gates) {
  std::vector<Gate> out;
  for (const Gate& g : gates) {
    if (g.kind == GateKind::I) continue;
    if (g.kind == GateKind::T && !out.empty()) {
      // count the trailing run on the same qubit
      int run = 0;
      while (run < static_cast<int>(out.size())) {
        const Gate& prev = out[out.size() - 1 - static_cast<std::size_t>(run)];
        if (prev.kind == GateKind::T && prev.targets == g.targets) {
          ++run;
        } else {
          break;
        }
      }
      if (run == 7) {  // T^8 = I
        out.resize(out.size() - 7);
        continue;
      }
    }
    out.push_back(g);
  }
  return out;
}

// --- canonical serialization ----------------------------------------------------

namespace {

void append_gamma(std::string& bits, std::uint64_t x) {
  if (x == 0) throw ValidationError("elias gamma is defined for x >= 1");
  const int nbits = std::bit_width(x);
  bits.append(static_cast<std::size_t>(nbits - 1), '0');
  for (int i = nbits - 1; i >= 0; --i) bits.push_back(((x >> i) & 1u) ? '1' : '0');
}

std::uint64_t read_gamma(const std::string& bits, std::size_t& pos) {
  int zeros = 0;
  while (pos < bits.size() && bits[pos] == '0') {
    ++zeros;
    ++pos;
  }
  if (pos >= bits.size()) throw ValidationError("deserialize: truncated gamma code");
  std::uint64_t x = 0;
  for (int i = 0; i <= zeros; ++i) {
    if (pos >= bits.size()) throw ValidationError("deserialize: truncated gamma code");
    x = (x << 1) | static_cast<std::uint64_t>(bits[pos] - '0');
    ++pos;
  }
  return x;
}

int target_width(int total_qubits) {
  if (total_qubits <= 1) return 1;
  return std::bit_width(static_cast<unsigned>(total_qubits - 1));
}

}  // namespace

std::string serialize_bits(const QuantumCircuit& c) {
  c.validate();
  std::string bits;
  append_gamma(bits, static_cast<std::uint64_t>(c.inputs));
  append_gamma(bits, static_cast<std::uint64_t>(c.ancillas) + 1);
  append_gamma(bits, static_cast<std::uint64_t>(c.output_qubit));
  append_gamma(bits, static_cast<std::uint64_t>(c.gates.size()) + 1);
  const int w = target_width(c.total_qubits());
  for (const Gate& g : c.gates) {
    const auto tag = static_cast<unsigned>(g.kind);
    for (int i = 2; i >= 0; --i) bits.push_back(((tag >> i) & 1u) ? '1' : '0');
    for (int q : g.targets) {
      const auto v = static_cast<unsigned>(q - 1);
      for (int i = w - 1; i >= 0; --i) bits.push_back(((v >> i) & 1u) ? '1' : '0');
    }
  }
  return bits;
}

std::size_t encoding_length(const QuantumCircuit& c) { return serialize_bits(c).size(); }

QuantumCircuit deserialize_bits(const std::string& bits) {
  std::size_t pos = 0;
  QuantumCircuit c;
  c.inputs = static_cast<int>(read_gamma(bits, pos));
  c.ancillas = static_cast<int>(read_gamma(bits, pos)) - 1;
  c.output_qubit = static_cast<int>(read_gamma(bits, pos));
  const auto ngates = read_gamma(bits, pos) - 1;
  const int w = target_width(c.inputs + c.ancillas);
  auto read_fixed = [&bits, &pos](int width) -> unsigned {
    unsigned v = 0;
    for (int i = 0; i < width; ++i) {
      if (pos >= bits.size()) throw ValidationError("deserialize: truncated record");
      v = (v << 1) | static_cast<unsigned>(bits[pos] - '0');
      ++pos;
    }
    return v;
  };
  for (std::uint64_t g = 0; g < ngates; ++g) {
    const unsigned tag = read_fixed(3);
    if (tag > 5) throw ValidationError("deserialize: bad gate tag");
    Gate gate;
    gate.kind = static_cast<GateKind>(tag);
    for (int t = 0; t < gate_arity(gate.kind); ++t) {
      gate.targets.push_back(static_cast<int>(read_fixed(w)) + 1);
    }
    c.gates.push_back(std::move(gate));
  }
  if (pos != bits.size()) throw ValidationError("deserialize: trailing bits");
  c.validate();
  return c;
}

// --- ensembles -------------------------------------------------------------------

EnsembleSpec make_ensemble(const std::string& name) {
  std::string base = name;
  std::string arg;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    base = name.substr(0, colon);
    arg = name.substr(colon + 1);
  }
  EnsembleSpec spec;
  spec.name = name;
  if (base == "ghz") {
    spec.size_factor = [](int n) { return n; };
    spec.generator = [](int n) {
      if (n < 2) throw ValidationError("ghz ensemble: need n >= 2");
      return ghz_state(n);
    };
  } else if (base == "pairwise") {
    spec.size_factor = [](int n) { return 2 * n; };
    spec.generator = [](int n) {
      if (n < 1) throw ValidationError("pairwise ensemble: need n >= 1");
      return pairwise_state(n);
    };
  } else if (base == "w") {
    spec.size_factor = [](int n) { return n; };
    spec.generator = [](int n) {
      if (n < 2) throw ValidationError("w ensemble: need n >= 2");
      Vec a = Vec::Zero(static_cast<Eigen::Index>(dim_of(n)));
      const double amp = 1.0 / std::sqrt(static_cast<double>(n));
      for (int q = 1; q <= n; ++q) {
        a(static_cast<Eigen::Index>(std::uint64_t{1} << (n - q))) = amp;
      }
      return Qustring(n, std::move(a));
    };
  } else if (base == "basis") {
    spec.size_factor = [](int n) { return n; };
    spec.generator = [arg](int n) { return constructor_library("basis", n, arg).target; };
  } else if (base == "phase") {
    spec.size_factor = [](int n) { return n; };
    spec.generator = [arg](int n) { return constructor_library("phase", n, arg).target; };
  } else {
    throw ValidationError("make_ensemble: unknown ensemble '" + name + "'");
  }
  return spec;
}

QuantumCircuit random_circuit(int qubits, int gate_count, Rng& rng, int ancillas) {
  QuantumCircuit c;
  c.inputs = qubits;
  c.ancillas = ancillas;
  const int total = c.total_qubits();
  auto pick_qubit = [&rng, total]() { return 1 + static_cast<int>(uniform01(rng) * total) % total; };
  for (int g = 0; g < gate_count; ++g) {
    const int max_kind = total >= 3 ? 5 : (total >= 2 ? 4 : 3);
    const auto kind = static_cast<GateKind>(static_cast<int>(uniform01(rng) * (max_kind + 1)) % (max_kind + 1));
    Gate gate;
    gate.kind = kind;
    while (static_cast<int>(gate.targets.size()) < gate_arity(kind)) {
      const int q = pick_qubit();
      if (std::find(gate.targets.begin(), gate.targets.end(), q) == gate.targets.end()) {
        gate.targets.push_back(q);
      }
    }
    c.gates.push_back(std::move(gate));
  }
  return c;
}

}  // namespace qsep
