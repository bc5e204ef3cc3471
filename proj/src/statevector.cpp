#include "qspec/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace qspec {

namespace {

std::vector<cplx> zero_state(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("statevector: need at least one qubit");
  if (n_qubits > kMaxQubits)
    throw std::length_error("statevector: " + std::to_string(n_qubits) + " qubits exceeds the ceiling of " +
                            std::to_string(kMaxQubits));
  std::vector<cplx> amps(std::size_t{1} << n_qubits, cplx{0.0, 0.0});
  amps[0] = 1.0;
  return amps;
}

// Spread i over the positions not occupied by the two bits lo < hi.
inline std::size_t insert_two_zeros(std::size_t i, int lo, int hi) {
  const std::size_t lo_mask = (std::size_t{1} << lo) - 1;
  i = (i & lo_mask) | ((i & ~lo_mask) << 1);
  const std::size_t hi_mask = (std::size_t{1} << hi) - 1;
  return (i & hi_mask) | ((i & ~hi_mask) << 1);
}

void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw std::out_of_range("gate target " + std::to_string(q) + " out of range");
}

}  // namespace

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits), amps_(zero_state(n_qubits)) {}

Statevector Statevector::basis_state(int n_qubits, std::uint64_t index) {
  Statevector s(n_qubits);
  if (index >= s.dimension()) throw std::out_of_range("basis_state: index out of range");
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

Statevector Statevector::from_amplitudes(int n_qubits, std::vector<cplx> amplitudes) {
  Statevector s(n_qubits);
  if (amplitudes.size() != s.dimension()) throw std::invalid_argument("from_amplitudes: size mismatch");
  s.amps_ = std::move(amplitudes);
  return s;
}

double Statevector::norm() const {
  double acc = 0.0;
  for (const auto& a : amps_) acc += std::norm(a);
  return std::sqrt(acc);
}

void Statevector::normalize() {
  const double n = norm();
  if (n == 0.0) throw std::runtime_error("normalize: zero state");
  for (auto& a : amps_) a /= n;
}

void Statevector::apply_matrix(const Matrix2& u, int q) {
  check_qubit(q, n_qubits_);
  const std::size_t bit = std::size_t{1} << q;
  const std::size_t half = amps_.size() / 2;
  const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i0 = ((k & ~(bit - 1)) << 1) | (k & (bit - 1));
    const std::size_t i1 = i0 | bit;
    const cplx a0 = amps_[i0];
    const cplx a1 = amps_[i1];
    amps_[i0] = u00 * a0 + u01 * a1;
    amps_[i1] = u10 * a0 + u11 * a1;
  }
}

void Statevector::apply_matrix(const Matrix4& u, int q0, int q1) {
  check_qubit(q0, n_qubits_);
  check_qubit(q1, n_qubits_);
  if (q0 == q1) throw std::invalid_argument("two-qubit gate with duplicate targets");
  const std::size_t b0 = std::size_t{1} << q0;
  const std::size_t b1 = std::size_t{1} << q1;
  const int lo = std::min(q0, q1);
  const int hi = std::max(q0, q1);
  const std::size_t quarter = amps_.size() / 4;

  bool block = true;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const bool in_block = (r == c) || (r == 1 && c == 2) || (r == 2 && c == 1);
      if (!in_block && u(r, c) != cplx{0.0, 0.0}) block = false;
    }

  if (block) {
    // number-conserving gates: |00>, |11> phases plus a 2x2 block on {|01>, |10>}
    const cplx d0 = u(0, 0), d3 = u(3, 3);
    const cplx m11 = u(1, 1), m12 = u(1, 2), m21 = u(2, 1), m22 = u(2, 2);
    for (std::size_t k = 0; k < quarter; ++k) {
      const std::size_t i00 = insert_two_zeros(k, lo, hi);
      const std::size_t i01 = i00 | b1;
      const std::size_t i10 = i00 | b0;
      const std::size_t i11 = i00 | b0 | b1;
      amps_[i00] *= d0;
      amps_[i11] *= d3;
      const cplx a1 = amps_[i01];
      const cplx a2 = amps_[i10];
      amps_[i01] = m11 * a1 + m12 * a2;
      amps_[i10] = m21 * a1 + m22 * a2;
    }
    return;
  }

  for (std::size_t k = 0; k < quarter; ++k) {
    const std::size_t i00 = insert_two_zeros(k, lo, hi);
    const std::size_t idx[4] = {i00, i00 | b1, i00 | b0, i00 | b0 | b1};
    cplx in[4];
    for (int r = 0; r < 4; ++r) in[r] = amps_[idx[r]];
    for (int r = 0; r < 4; ++r) {
      amps_[idx[r]] = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
    }
  }
}

void Statevector::apply(const Gate& g) {
  if (g.arity() == 1) {
    apply_matrix(single_qubit_matrix(g), g.qubits[0]);
  } else {
    apply_matrix(two_qubit_matrix(g), g.qubits[0], g.qubits[1]);
  }
}

void Statevector::apply(std::span<const Gate> gates) {
  for (const auto& g : gates) apply(g);
}

Statevector apply_gate(Statevector state, const Gate& g) {
  state.apply(g);
  return state;
}

cplx expectation(const Statevector& state, const PauliString& term) {
  std::size_t flip = 0;
  std::size_t zmask = 0;
  std::size_t ymask = 0;
  for (const auto& [q, p] : term.factors) {
    if (q < 0 || q >= state.n_qubits()) throw std::out_of_range("expectation: Pauli factor out of range");
    if (p != Pauli::Z) flip |= std::size_t{1} << q;
    if (p == Pauli::Z) zmask |= std::size_t{1} << q;
    if (p == Pauli::Y) ymask |= std::size_t{1} << q;
  }
  // Y|b> = i (-1)^b |1-b>, so the phase is i^{#Y} (-1)^{popcount(i & (Z|Y))}
  const int ny = std::popcount(ymask);
  const cplx iy[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const cplx global = iy[ny % 4];
  const std::size_t signmask = zmask | ymask;
  const auto amps = state.amplitudes();
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const cplx v = std::conj(amps[i ^ flip]) * amps[i];
    acc += (std::popcount(i & signmask) & 1) ? -v : v;
  }
  return term.coefficient * global * acc;
}

double expectation(const Statevector& state, const PauliSum& observable, double& imaginary_residue) {
  if (!is_hermitian(observable)) throw std::invalid_argument("expectation: observable is not Hermitian");
  cplx acc{0.0, 0.0};
  for (const auto& t : observable) acc += expectation(state, t);
  imaginary_residue = std::abs(acc.imag());
  return acc.real();
}

double expectation(const Statevector& state, const PauliSum& observable) {
  double residue = 0.0;
  return expectation(state, observable, residue);
}

Statevector apply_observable(const Statevector& state, const PauliSum& observable) {
  Statevector out(state.n_qubits());
  auto dst = out.amplitudes();
  std::fill(dst.begin(), dst.end(), cplx{0.0, 0.0});
  const auto src = state.amplitudes();
  const cplx iy[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& t : observable) {
    std::size_t flip = 0, signmask = 0;
    int ny = 0;
    for (const auto& [q, p] : t.factors) {
      if (p != Pauli::Z) flip |= std::size_t{1} << q;
      if (p != Pauli::X) signmask |= std::size_t{1} << q;
      if (p == Pauli::Y) ++ny;
    }
    const cplx c = t.coefficient * iy[ny % 4];
    for (std::size_t i = 0; i < src.size(); ++i) {
      const cplx v = c * src[i];
      dst[i ^ flip] += (std::popcount(i & signmask) & 1) ? -v : v;
    }
  }
  return out;
}

cplx inner_product(const Statevector& a, const Statevector& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("inner_product: dimension mismatch");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.dimension(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double particle_number(const Statevector& state) {
  double acc = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) acc += std::norm(amps[i]) * std::popcount(i);
  return acc;
}

double particle_number(const Statevector& state, std::span<const int> qubits) {
  std::size_t mask = 0;
  for (int q : qubits) mask |= std::size_t{1} << q;
  double acc = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) acc += std::norm(amps[i]) * std::popcount(i & mask);
  return acc;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffU); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(a), hi(a), lo(b), hi(b)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<ShotRecord> sample(const Statevector& state, std::uint64_t shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> draws(shots);
  for (auto& d : draws) d = uni(rng);
  std::sort(draws.begin(), draws.end());

  const auto amps = state.amplitudes();
  double total = 0.0;
  for (const auto& a : amps) total += std::norm(a);

  std::vector<ShotRecord> out;
  double cumulative = 0.0;
  std::size_t next = 0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < amps.size() && next < draws.size(); ++i) {
    const double p = std::norm(amps[i]) / total;
    if (p == 0.0) continue;
    last_nonzero = i;
    cumulative += p;
    std::uint64_t count = 0;
    while (next < draws.size() && draws[next] < cumulative) {
      ++count;
      ++next;
    }
    if (count) out.push_back({i, count});
  }
  if (next < draws.size()) {
    // rounding leftovers land on the last populated outcome
    const std::uint64_t rest = draws.size() - next;
    if (!out.empty() && out.back().bits == last_nonzero) {
      out.back().count += rest;
    } else {
      out.push_back({last_nonzero, rest});
    }
  }
  return out;
}

std::uint64_t total_shots(std::span<const ShotRecord> records) {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.count;
  return n;
}

PostSelection postselect_particle_number(std::span<const ShotRecord> records, int Ne) {
  PostSelection out;
  std::uint64_t kept = 0;
  for (const auto& r : records) {
    if (std::popcount(r.bits) == Ne) {
      out.records.push_back(r);
      kept += r.count;
    }
  }
  const std::uint64_t total = total_shots(records);
  out.kept_fraction = total ? static_cast<double>(kept) / static_cast<double>(total) : 0.0;
  out.empty = kept == 0;
  return out;
}

void write_binary(std::ostream& os, const Statevector& state) {
  const std::int32_t n = state.n_qubits();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  for (const auto& a : state.amplitudes()) {
    const double re = a.real();
    const double im = a.imag();
    os.write(reinterpret_cast<const char*>(&re), sizeof(re));
    os.write(reinterpret_cast<const char*>(&im), sizeof(im));
  }
}

Statevector read_binary(std::istream& is) {
  std::int32_t n = 0;
  if (!is.read(reinterpret_cast<char*>(&n), sizeof(n))) throw std::runtime_error("read_binary: missing header");
  Statevector s(n);
  for (auto& a : s.amplitudes()) {
    double re = 0.0, im = 0.0;
    is.read(reinterpret_cast<char*>(&re), sizeof(re));
    is.read(reinterpret_cast<char*>(&im), sizeof(im));
    if (!is) throw std::runtime_error("read_binary: truncated body");
    a = cplx{re, im};
  }
  return s;
}

}  // namespace qspec
