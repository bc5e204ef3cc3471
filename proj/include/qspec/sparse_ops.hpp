#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "qspec/lattice.hpp"
#include "qspec/statevector.hpp"

namespace qspec {

// Computational basis states of fixed popcount, optionally also fixed popcount
// on a sub-mask (used for fixed N_up).
class SectorBasis {
 public:
  SectorBasis(int n_qubits, int n_particles);
  SectorBasis(int n_qubits, int n_particles, std::uint64_t sub_mask, int n_sub);
  // Direct sum of several fixed-popcount-on-mask blocks with a shared total.
  static SectorBasis from_states(int n_qubits, std::vector<std::uint64_t> states);

  int n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return states_.size(); }
  std::span<const std::uint64_t> states() const { return states_; }
  std::uint64_t state(std::size_t i) const { return states_[i]; }
  // -1 when the bitstring is outside the sector.
  std::int64_t index_of(std::uint64_t bits) const;

 private:
  int n_qubits_ = 0;
  std::vector<std::uint64_t> states_;
  std::unordered_map<std::uint64_t, std::int64_t> lookup_;
  void build_lookup();
};

using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;

// Restriction of a number-conserving Pauli sum to the sector. Contributions that
// leave the sector are dropped, which is exact when the full sum conserves popcount.
SparseMatrix sector_matrix(const PauliSum& terms, const SectorBasis& basis);

Vector restrict_to(const Statevector& state, const SectorBasis& basis);
Statevector embed(const Vector& v, const SectorBasis& basis);

struct EigenPair {
  double energy = 0.0;
  Vector vector;
  double residual = 0.0;
  // E1 - E0 from a deflated second run; +inf for one-dimensional sectors.
  double gap = 0.0;
  bool degenerate = false;
};

// Lowest eigenpair of a Hermitian sparse matrix by Lanczos with full reorthogonalization.
EigenPair lanczos_ground_state(const SparseMatrix& h, double tol = 1e-10, int max_iter = 400,
                               std::uint64_t seed = 7);

// exp(-i h t) v by restarted Krylov steps; tol bounds the per-call error estimate.
Vector krylov_expm(const SparseMatrix& h, const Vector& v, double t, double tol = 1e-11, int krylov_dim = 30);

}  // namespace qspec
