#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspec {

using cplx = std::complex<double>;

enum class Spin { Up, Down };

// 1D open-chain Fermi-Hubbard model with equal spin populations.
struct FermiHubbardModel {
  int L = 2;
  double J = 1.0;
  double U = 0.0;
  int Ne = 2;

  // Throws std::invalid_argument on L < 2, odd Ne, or Ne outside (0, 2L].
  void validate() const;
  int electrons_per_spin() const { return Ne / 2; }
  int n_qubits() const { return 2 * L; }
  double filling() const { return static_cast<double>(Ne) / L; }
  double fermi_momentum() const;
};

enum class OrderingKind { AllUpAllDown, Interleaved };

std::string to_string(OrderingKind kind);
OrderingKind ordering_from_string(const std::string& name);

// Bijection between fermionic modes (site, spin) and qubits.
class QubitOrdering {
 public:
  QubitOrdering(OrderingKind kind, int L);

  OrderingKind kind() const { return kind_; }
  int sites() const { return L_; }
  int n_qubits() const { return 2 * L_; }
  int qubit(int site, Spin spin) const;

 private:
  OrderingKind kind_;
  int L_;
};

enum class Pauli : char { X = 'X', Y = 'Y', Z = 'Z' };

struct PauliString {
  cplx coefficient{1.0, 0.0};
  std::map<int, Pauli> factors;

  int weight() const { return static_cast<int>(factors.size()); }
  // Canonical "coeff * X0 Z1 X2" form; identity strings render as "coeff * I".
  std::string to_string() const;
  bool operator==(const PauliString& other) const = default;
};

using PauliSum = std::vector<PauliString>;

PauliString operator*(const PauliString& a, const PauliString& b);
bool commutes(const PauliString& a, const PauliString& b);
// Merges equal factor sets and drops terms with |coefficient| < tol.
PauliSum simplify(const PauliSum& terms, double tol = 1e-14);
PauliSum multiply(const PauliSum& a, const PauliSum& b);
PauliSum adjoint(const PauliSum& terms);
bool is_hermitian(const PauliSum& terms, double tol = 1e-12);
std::string to_string(const PauliSum& terms);

// 1/2 (X X + Y Y) between the qubits of (site, spin) and (site + 1, spin),
// with Z on every qubit strictly between them.
PauliSum jw_encode_hopping(const FermiHubbardModel& model, const QubitOrdering& ordering, int site,
                           Spin spin);
// 1/4 (I - Z_a - Z_b + Z_a Z_b) on the two qubits of the site.
PauliSum jw_encode_onsite(const FermiHubbardModel& model, const QubitOrdering& ordering, int site);
// 1/2 (X X + Y Y) on the site's qubit pair, Z string included when non-adjacent.
PauliSum spin_x_observable(const QubitOrdering& ordering, int site);
// -J sum hopping + U sum onsite.
PauliSum hubbard_hamiltonian(const FermiHubbardModel& model, const QubitOrdering& ordering);
// sum_q (I - Z_q) / 2
PauliSum number_operator(int n_qubits);

// Dense matrix in the little-endian computational basis; n_qubits <= 12.
Eigen::MatrixXcd to_dense(const PauliSum& terms, int n_qubits);

}  // namespace qspec
