#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qspec/gates.hpp"
#include "qspec/lattice.hpp"

namespace qspec {

inline constexpr int kMaxQubits = 28;

// Dense state over n qubits; qubit q is bit q of the basis index.
class Statevector {
 public:
  explicit Statevector(int n_qubits);
  static Statevector basis_state(int n_qubits, std::uint64_t index);
  static Statevector from_amplitudes(int n_qubits, std::vector<cplx> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }
  cplx operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm() const;
  void normalize();
  void apply(const Gate& g);
  void apply(std::span<const Gate> gates);
  void apply_matrix(const Matrix4& u, int q0, int q1);
  void apply_matrix(const Matrix2& u, int q);

 private:
  int n_qubits_;
  std::vector<cplx> amps_;
};

Statevector apply_gate(Statevector state, const Gate& g);

// <psi|P|psi> for a single Pauli string (complex in general).
cplx expectation(const Statevector& state, const PauliString& term);
// Throws std::invalid_argument if the observable is not Hermitian.
double expectation(const Statevector& state, const PauliSum& observable);
// Same as above, reporting the discarded imaginary part.
double expectation(const Statevector& state, const PauliSum& observable, double& imaginary_residue);
Statevector apply_observable(const Statevector& state, const PauliSum& observable);

cplx inner_product(const Statevector& a, const Statevector& b);
double particle_number(const Statevector& state);
// Expected popcount over a subset of qubits.
double particle_number(const Statevector& state, std::span<const int> qubits);

struct ShotRecord {
  std::uint64_t bits = 0;
  std::uint64_t count = 0;
  bool operator==(const ShotRecord&) const = default;
};

// Independent stream seed for (seed, a, b), e.g. (run seed, trajectory, time index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Multinomial draw; records sorted by bitstring.
std::vector<ShotRecord> sample(const Statevector& state, std::uint64_t shots, std::uint64_t seed);
std::uint64_t total_shots(std::span<const ShotRecord> records);

struct PostSelection {
  std::vector<ShotRecord> records;
  double kept_fraction = 0.0;
  bool empty = false;
};

PostSelection postselect_particle_number(std::span<const ShotRecord> records, int Ne);

void write_binary(std::ostream& os, const Statevector& state);
Statevector read_binary(std::istream& is);

}  // namespace qspec
