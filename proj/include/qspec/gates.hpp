#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspec {

enum class GateKind {
  X,
  Y,
  Z,
  Hadamard,
  Rx,
  Ry,
  Rz,
  CNot,
  ControlledH,
  Givens,
  NGate,
  Hopping,
  FSwap,
  Onsite,
  Quench,
  BasisXY,
};

std::string gate_name(GateKind kind);
GateKind gate_kind_from_name(const std::string& name);
int gate_arity(GateKind kind);
int gate_param_count(GateKind kind);

// Two-qubit matrices use the local basis |q0 q1> with index 2*bit(q0) + bit(q1),
// where q0 is the first target. CNot and ControlledH take the control as q0.
struct Gate {
  GateKind kind = GateKind::X;
  std::array<int, 2> qubits{-1, -1};
  std::array<double, 3> params{0.0, 0.0, 0.0};

  int arity() const { return gate_arity(kind); }

  static Gate single(GateKind kind, int q, double angle = 0.0);
  static Gate pair(GateKind kind, int q0, int q1, double a = 0.0, double b = 0.0, double c = 0.0);
};

using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;

Matrix2 single_qubit_matrix(const Gate& g);
Matrix4 two_qubit_matrix(const Gate& g);

// Closed forms.
// Givens(theta): [[c, -s], [s, c]] on {|01>, |10>} with c = cos(theta/2), s = sin(theta/2);
// identity on |00> and |11>. Equals exp(i theta/4 (XY - YX)).
Matrix4 givens_matrix(double theta);
// exp(i (alpha XX + beta YY + gamma ZZ))
Matrix4 ngate_matrix(double alpha, double beta, double gamma);
// exp(-i theta/2 (XX + YY))
Matrix4 hopping_matrix(double theta);
Matrix4 fswap_matrix();
// diag(1, 1, 1, exp(-i phi))
Matrix4 onsite_matrix(double phi);
// exp(i theta/2 (XX + YY)) = hopping(-theta)
Matrix4 quench_matrix(double theta);
// Maps |01> -> (|01> + |10>)/sqrt2 and |10> -> (|01> - |10>)/sqrt2; Hermitian, involutory.
Matrix4 basis_xy_matrix();

// Decompositions into {CNot, ControlledH, single-qubit rotations} on the gate's targets.
std::vector<Gate> decompose(const Gate& g);
// Product of a gate sequence acting on two qubits (q0, q1) as a 4x4 matrix.
Matrix4 circuit_matrix(const std::vector<Gate>& gates, int q0, int q1);

bool is_two_qubit(GateKind kind);
bool conserves_particle_number(GateKind kind);

}  // namespace qspec
