#include "qspec/gates.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qspec {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct KindInfo {
  GateKind kind;
  const char* name;
  int arity;
  int params;
};

constexpr KindInfo kKinds[] = {
    {GateKind::X, "x", 1, 0},
    {GateKind::Y, "y", 1, 0},
    {GateKind::Z, "z", 1, 0},
    {GateKind::Hadamard, "h", 1, 0},
    {GateKind::Rx, "rx", 1, 1},
    {GateKind::Ry, "ry", 1, 1},
    {GateKind::Rz, "rz", 1, 1},
    {GateKind::CNot, "cnot", 2, 0},
    {GateKind::ControlledH, "ch", 2, 0},
    {GateKind::Givens, "givens", 2, 1},
    {GateKind::NGate, "ngate", 2, 3},
    {GateKind::Hopping, "hopping", 2, 1},
    {GateKind::FSwap, "fswap", 2, 0},
    {GateKind::Onsite, "onsite", 2, 1},
    {GateKind::Quench, "quench", 2, 1},
    {GateKind::BasisXY, "bxy", 2, 0},
};

const KindInfo& info(GateKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k;
  throw std::logic_error("unknown gate kind");
}

Matrix4 kron(const Matrix2& a, const Matrix2& b) {
  Matrix4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

Matrix2 pauli_x() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}
Matrix2 pauli_y() {
  Matrix2 m;
  m << 0, cd(0, -1), cd(0, 1), 0;
  return m;
}
Matrix2 pauli_z() {
  Matrix2 m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix2 rotation(const Matrix2& generator, double angle) {
  return std::cos(angle / 2) * Matrix2::Identity() - cd(0, 1) * std::sin(angle / 2) * generator;
}

Matrix4 cnot_matrix() {
  Matrix4 m = Matrix4::Zero();
  m(0, 0) = m(1, 1) = 1;
  m(2, 3) = m(3, 2) = 1;
  return m;
}

Matrix4 controlled_h_matrix() {
  Matrix4 m = Matrix4::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  m(0, 0) = m(1, 1) = 1;
  m(2, 2) = r;
  m(2, 3) = r;
  m(3, 2) = r;
  m(3, 3) = -r;
  return m;
}

void append_ngate(std::vector<Gate>& out, int q0, int q1, double alpha, double gamma) {
  out.push_back(Gate::pair(GateKind::CNot, q0, q1));
  out.push_back(Gate::single(GateKind::Rx, q0, -2 * alpha));
  out.push_back(Gate::single(GateKind::Rz, q1, -2 * gamma));
  out.push_back(Gate::pair(GateKind::CNot, q0, q1));
}

void append_hopping(std::vector<Gate>& out, int q0, int q1, double theta) {
  out.push_back(Gate::single(GateKind::Rx, q0, kPi / 2));
  out.push_back(Gate::single(GateKind::Rx, q1, kPi / 2));
  append_ngate(out, q0, q1, -theta / 2, -theta / 2);
  out.push_back(Gate::single(GateKind::Rx, q0, -kPi / 2));
  out.push_back(Gate::single(GateKind::Rx, q1, -kPi / 2));
}

}  // namespace

std::string gate_name(GateKind kind) { return info(kind).name; }

GateKind gate_kind_from_name(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  throw std::invalid_argument("unknown gate name '" + name + "'");
}

int gate_arity(GateKind kind) { return info(kind).arity; }
int gate_param_count(GateKind kind) { return info(kind).params; }

bool is_two_qubit(GateKind kind) { return gate_arity(kind) == 2; }

bool conserves_particle_number(GateKind kind) {
  switch (kind) {
    case GateKind::Z:
    case GateKind::Rz:
    case GateKind::Givens:
    case GateKind::Hopping:
    case GateKind::FSwap:
    case GateKind::Onsite:
    case GateKind::Quench:
    case GateKind::BasisXY:
      return true;
    default:
      return false;
  }
}

Gate Gate::single(GateKind kind, int q, double angle) {
  if (gate_arity(kind) != 1) throw std::invalid_argument("Gate::single: " + gate_name(kind) + " is not single-qubit");
  Gate g;
  g.kind = kind;
  g.qubits = {q, -1};
  g.params[0] = angle;
  return g;
}

Gate Gate::pair(GateKind kind, int q0, int q1, double a, double b, double c) {
  if (gate_arity(kind) != 2) throw std::invalid_argument("Gate::pair: " + gate_name(kind) + " is not two-qubit");
  Gate g;
  g.kind = kind;
  g.qubits = {q0, q1};
  g.params = {a, b, c};
  return g;
}

Matrix2 single_qubit_matrix(const Gate& g) {
  const double t = g.params[0];
  switch (g.kind) {
    case GateKind::X:
      return pauli_x();
    case GateKind::Y:
      return pauli_y();
    case GateKind::Z:
      return pauli_z();
    case GateKind::Hadamard: {
      Matrix2 h;
      h << 1, 1, 1, -1;
      return h / std::sqrt(2.0);
    }
    case GateKind::Rx:
      return rotation(pauli_x(), t);
    case GateKind::Ry:
      return rotation(pauli_y(), t);
    case GateKind::Rz:
      return rotation(pauli_z(), t);
    default:
      throw std::invalid_argument("single_qubit_matrix: " + gate_name(g.kind) + " is two-qubit");
  }
}

Matrix4 givens_matrix(double theta) {
  Matrix4 m = Matrix4::Identity();
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  m(1, 1) = c;
  m(1, 2) = -s;
  m(2, 1) = s;
  m(2, 2) = c;
  return m;
}

Matrix4 ngate_matrix(double alpha, double beta, double gamma) {
  // XX, YY and ZZ commute and are diagonal in the Bell basis; act on the two
  // parity blocks {|00>,|11>} and {|01>,|10>} directly.
  Matrix4 m = Matrix4::Zero();
  const cd i(0, 1);
  // even block: XX and YY swap |00>,|11> with signs (+1, -1); ZZ = +1
  {
    const double a = alpha - beta;
    const cd phase = std::exp(i * gamma);
    m(0, 0) = m(3, 3) = phase * std::cos(a);
    m(0, 3) = m(3, 0) = phase * i * std::sin(a);
  }
  // odd block: XX and YY both swap |01>,|10> with sign +1; ZZ = -1
  {
    const double a = alpha + beta;
    const cd phase = std::exp(-i * gamma);
    m(1, 1) = m(2, 2) = phase * std::cos(a);
    m(1, 2) = m(2, 1) = phase * i * std::sin(a);
  }
  return m;
}

Matrix4 hopping_matrix(double theta) { return ngate_matrix(-theta / 2, -theta / 2, 0.0); }

Matrix4 quench_matrix(double theta) { return hopping_matrix(-theta); }

Matrix4 fswap_matrix() {
  Matrix4 m = Matrix4::Zero();
  m(0, 0) = 1;
  m(1, 2) = 1;
  m(2, 1) = 1;
  m(3, 3) = -1;
  return m;
}

Matrix4 onsite_matrix(double phi) {
  Matrix4 m = Matrix4::Identity();
  m(3, 3) = std::exp(cd(0, -phi));
  return m;
}

Matrix4 basis_xy_matrix() {
  Matrix4 m = Matrix4::Zero();
  const double r = 1.0 / std::sqrt(2.0);
  m(0, 0) = 1;
  m(3, 3) = 1;
  m(1, 1) = r;
  m(1, 2) = r;
  m(2, 1) = r;
  m(2, 2) = -r;
  return m;
}

Matrix4 two_qubit_matrix(const Gate& g) {
  switch (g.kind) {
    case GateKind::CNot:
      return cnot_matrix();
    case GateKind::ControlledH:
      return controlled_h_matrix();
    case GateKind::Givens:
      return givens_matrix(g.params[0]);
    case GateKind::NGate:
      return ngate_matrix(g.params[0], g.params[1], g.params[2]);
    case GateKind::Hopping:
      return hopping_matrix(g.params[0]);
    case GateKind::FSwap:
      return fswap_matrix();
    case GateKind::Onsite:
      return onsite_matrix(g.params[0]);
    case GateKind::Quench:
      return quench_matrix(g.params[0]);
    case GateKind::BasisXY:
      return basis_xy_matrix();
    default:
      throw std::invalid_argument("two_qubit_matrix: " + gate_name(g.kind) + " is single-qubit");
  }
}

std::vector<Gate> decompose(const Gate& g) {
  const int a = g.qubits[0];
  const int b = g.qubits[1];
  std::vector<Gate> out;
  switch (g.kind) {
    case GateKind::Givens: {
      // L^dag N(theta/4, 0, theta/4) L with L = Rx(pi/2) (x) Ry(pi/2) Rx(pi/2)
      const double t = g.params[0];
      out.push_back(Gate::single(GateKind::Rx, a, kPi / 2));
      out.push_back(Gate::single(GateKind::Rx, b, kPi / 2));
      out.push_back(Gate::single(GateKind::Ry, b, kPi / 2));
      append_ngate(out, a, b, t / 4, t / 4);
      out.push_back(Gate::single(GateKind::Rx, a, -kPi / 2));
      out.push_back(Gate::single(GateKind::Ry, b, -kPi / 2));
      out.push_back(Gate::single(GateKind::Rx, b, -kPi / 2));
      break;
    }
    case GateKind::NGate: {
      const double alpha = g.params[0];
      const double beta = g.params[1];
      const double gamma = g.params[2];
      append_ngate(out, a, b, alpha, gamma);
      if (beta != 0.0) {
        // YY = (S (x) S) XX (S^dag (x) S^dag), with S = Rz(pi/2) up to phase
        out.push_back(Gate::single(GateKind::Rz, a, -kPi / 2));
        out.push_back(Gate::single(GateKind::Rz, b, -kPi / 2));
        append_ngate(out, a, b, beta, 0.0);
        out.push_back(Gate::single(GateKind::Rz, a, kPi / 2));
        out.push_back(Gate::single(GateKind::Rz, b, kPi / 2));
      }
      break;
    }
    case GateKind::Hopping:
      append_hopping(out, a, b, g.params[0]);
      break;
    case GateKind::Quench:
      append_hopping(out, a, b, -g.params[0]);
      break;
    case GateKind::FSwap:
      out.push_back(Gate::single(GateKind::Hadamard, a));
      out.push_back(Gate::pair(GateKind::CNot, a, b));
      out.push_back(Gate::pair(GateKind::CNot, b, a));
      out.push_back(Gate::single(GateKind::Hadamard, b));
      break;
    case GateKind::Onsite: {
      const double phi = g.params[0];
      out.push_back(Gate::single(GateKind::Rz, a, -phi / 2));
      out.push_back(Gate::pair(GateKind::CNot, a, b));
      out.push_back(Gate::single(GateKind::Rz, b, phi / 2));
      out.push_back(Gate::pair(GateKind::CNot, a, b));
      out.push_back(Gate::single(GateKind::Rz, b, -phi / 2));
      break;
    }
    case GateKind::BasisXY:
      out.push_back(Gate::pair(GateKind::CNot, a, b));
      out.push_back(Gate::pair(GateKind::ControlledH, b, a));
      out.push_back(Gate::pair(GateKind::CNot, a, b));
      break;
    default:
      out.push_back(g);
  }
  return out;
}

Matrix4 circuit_matrix(const std::vector<Gate>& gates, int q0, int q1) {
  // local index 2*bit(q0) + bit(q1)
  auto local_bit = [&](int q) {
    if (q == q0) return 1;
    if (q == q1) return 0;
    throw std::invalid_argument("circuit_matrix: gate outside the two-qubit register");
  };
  Matrix4 total = Matrix4::Identity();
  for (const auto& g : gates) {
    Matrix4 full = Matrix4::Zero();
    if (g.arity() == 1) {
      const Matrix2 u = single_qubit_matrix(g);
      full = local_bit(g.qubits[0]) == 1 ? kron(u, Matrix2::Identity()) : kron(Matrix2::Identity(), u);
    } else {
      const Matrix4 u = two_qubit_matrix(g);
      const bool swapped = local_bit(g.qubits[0]) == 0;
      if (!swapped) {
        full = u;
      } else {
        const int perm[4] = {0, 2, 1, 3};
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 4; ++c) full(perm[r], perm[c]) = u(r, c);
      }
    }
    total = full * total;
  }
  return total;
}

}  // namespace qspec
