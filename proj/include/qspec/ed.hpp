#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qspec/lattice.hpp"
#include "qspec/sparse_ops.hpp"
#include "qspec/statevector.hpp"

namespace qspec {

// Brute-force Hubbard chain in the fixed total-N sector. Built directly from
// fermionic operators with explicit sign counting, so it shares no code path with
// the Pauli-string encoding. Mode (i, up) is bit i, (i, down) is bit L + i.
class EdOracle {
 public:
  explicit EdOracle(FermiHubbardModel model);

  const FermiHubbardModel& model() const { return model_; }
  const SectorBasis& basis() const { return basis_; }
  const SparseMatrix& hamiltonian() const { return hamiltonian_; }
  // c+_{i,up} c_{i,down} + h.c.; eigenvalues 0, +1, -1 on a single site.
  const SparseMatrix& spin_x(int site) const { return spin_x_.at(static_cast<std::size_t>(site)); }

  // e^{-iHt} v
  Vector evolve(const Vector& v, double t) const;

  Vector from_statevector(const Statevector& state, OrderingKind ordering) const;
  Statevector to_statevector(const Vector& v, OrderingKind ordering) const;

 private:
  FermiHubbardModel model_;
  SectorBasis basis_;
  SparseMatrix hamiltonian_;
  std::vector<SparseMatrix> spin_x_;
};

struct GroundState {
  double energy = 0.0;
  Vector vector;  // in EdOracle::basis()
  double residual = 0.0;
  double gap = 0.0;
  bool degenerate = false;
};

// Lowest state of the (Ne/2, Ne/2) block.
GroundState ground_state(const EdOracle& ed);

// G_jk(t) = -i <psi| [S_k(t), S_j] |psi>, with A(t) = e^{-iHt} A e^{iHt}.
// Both commutator halves are propagated separately.
std::vector<cplx> retarded_spin_gf(const EdOracle& ed, const Vector& psi, int j, int k,
                                   std::span<const double> times);
// 2 Im <psi| S_k(t) S_j |psi>, the one-sided form of the same quantity.
std::vector<double> spin_correlator_im2(const EdOracle& ed, const Vector& psi, int j, int k,
                                        std::span<const double> times);

struct LehmannData {
  double momentum = 0.0;
  double eta = 0.05;
  std::vector<double> excitation;     // E_m - E_0, ascending
  std::vector<double> weight_plus;    // |<m| S_k |psi>|^2, poles at +excitation
  std::vector<double> weight_minus;   // |<m| S_-k |psi>|^2, poles at -excitation
};

// Full spectrum of the total-N sector (dimension limited to a few thousand).
LehmannData lehmann_data(const EdOracle& ed, const Vector& psi, double ground_energy, double momentum,
                         double eta);
// G(k, w) = sum w+ / (w - dE + i eta) - w- / (w + dE + i eta). Throws on eta <= 0.
std::vector<cplx> lehmann_gf(const LehmannData& data, std::span<const double> omegas);

struct SpinReflectionReport {
  bool symmetric = false;
  bool equal_populations = false;
  int parity = 0;                     // +1 or -1 when symmetric
  double reflection_residual = 0.0;   // min ||R psi -+ psi||
  std::vector<double> sz2_residuals;  // ||((S^z_j)^2 - 1) psi|| per site, diagnostic only
  std::vector<int> sz2_failing_sites;
};

SpinReflectionReport verify_spin_reflection_symmetry(const Statevector& state, OrderingKind ordering, int L,
                                                     double tol = 1e-8);

void write_gf_csv(std::ostream& os, std::span<const double> times, std::span<const cplx> values);
void write_lehmann_csv(std::ostream& os, const LehmannData& data);

}  // namespace qspec
