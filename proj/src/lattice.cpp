#include "qspec/lattice.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qspec {

void FermiHubbardModel::validate() const {
  if (L < 2) throw std::invalid_argument("model: L must be >= 2");
  if (Ne <= 0 || Ne > 2 * L) throw std::invalid_argument("model: Ne must lie in (0, 2L]");
  if (Ne % 2 != 0) throw std::invalid_argument("model: Ne must be even");
  if (!std::isfinite(J) || !std::isfinite(U)) throw std::invalid_argument("model: J and U must be finite");
}

double FermiHubbardModel::fermi_momentum() const { return std::numbers::pi * filling() / 2.0; }

std::string to_string(OrderingKind kind) {
  return kind == OrderingKind::Interleaved ? "interleaved" : "all_up_all_down";
}

OrderingKind ordering_from_string(const std::string& name) {
  if (name == "interleaved") return OrderingKind::Interleaved;
  if (name == "all_up_all_down") return OrderingKind::AllUpAllDown;
  throw std::invalid_argument("unknown ordering '" + name + "'");
}

QubitOrdering::QubitOrdering(OrderingKind kind, int L) : kind_(kind), L_(L) {
  if (L < 1) throw std::invalid_argument("ordering: L must be positive");
}

int QubitOrdering::qubit(int site, Spin spin) const {
  if (site < 0 || site >= L_) throw std::out_of_range("ordering: site out of range");
  const int s = spin == Spin::Up ? 0 : 1;
  return kind_ == OrderingKind::Interleaved ? 2 * site + s : site + s * L_;
}

namespace {

// Single-qubit product a*b = phase * letter; letter 0 means identity.
std::pair<cplx, char> multiply_letters(char a, char b) {
  const cplx i{0.0, 1.0};
  if (a == b) return {1.0, 0};
  if (a == 'X' && b == 'Y') return {i, 'Z'};
  if (a == 'Y' && b == 'X') return {-i, 'Z'};
  if (a == 'Y' && b == 'Z') return {i, 'X'};
  if (a == 'Z' && b == 'Y') return {-i, 'X'};
  if (a == 'Z' && b == 'X') return {i, 'Y'};
  return {-i, 'Y'};  // X Z
}

std::string format_coefficient(cplx c) {
  std::ostringstream os;
  os.precision(12);
  if (std::abs(c.imag()) < 1e-15) {
    os << c.real();
  } else if (std::abs(c.real()) < 1e-15) {
    os << c.imag() << "i";
  } else {
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
  }
  return os.str();
}

PauliString two_qubit_term(double coeff, int a, Pauli pa, int b, Pauli pb) {
  PauliString s;
  s.coefficient = coeff;
  s.factors[a] = pa;
  s.factors[b] = pb;
  return s;
}

PauliSum flip_flop(int qa, int qb) {
  const int lo = std::min(qa, qb);
  const int hi = std::max(qa, qb);
  PauliSum out;
  for (Pauli p : {Pauli::X, Pauli::Y}) {
    PauliString s = two_qubit_term(0.5, lo, p, hi, p);
    for (int q = lo + 1; q < hi; ++q) s.factors[q] = Pauli::Z;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::string PauliString::to_string() const {
  std::ostringstream os;
  os << format_coefficient(coefficient) << " *";
  if (factors.empty()) os << " I";
  for (const auto& [q, p] : factors) os << ' ' << static_cast<char>(p) << q;
  return os.str();
}

PauliString operator*(const PauliString& a, const PauliString& b) {
  PauliString out;
  out.coefficient = a.coefficient * b.coefficient;
  out.factors = a.factors;
  for (const auto& [q, p] : b.factors) {
    auto it = out.factors.find(q);
    if (it == out.factors.end()) {
      out.factors[q] = p;
      continue;
    }
    auto [phase, letter] = multiply_letters(static_cast<char>(it->second), static_cast<char>(p));
    out.coefficient *= phase;
    if (letter == 0) {
      out.factors.erase(it);
    } else {
      it->second = static_cast<Pauli>(letter);
    }
  }
  return out;
}

bool commutes(const PauliString& a, const PauliString& b) {
  int anti = 0;
  for (const auto& [q, p] : a.factors) {
    auto it = b.factors.find(q);
    if (it != b.factors.end() && it->second != p) ++anti;
  }
  return anti % 2 == 0;
}

PauliSum simplify(const PauliSum& terms, double tol) {
  std::map<std::map<int, Pauli>, cplx> merged;
  for (const auto& t : terms) merged[t.factors] += t.coefficient;
  PauliSum out;
  for (const auto& [factors, c] : merged) {
    if (std::abs(c) < tol) continue;
    out.push_back(PauliString{c, factors});
  }
  return out;
}

PauliSum multiply(const PauliSum& a, const PauliSum& b) {
  PauliSum out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return simplify(out);
}

PauliSum adjoint(const PauliSum& terms) {
  PauliSum out = terms;
  for (auto& t : out) t.coefficient = std::conj(t.coefficient);
  return out;
}

bool is_hermitian(const PauliSum& terms, double tol) {
  for (const auto& t : simplify(terms, 0.0))
    if (std::abs(t.coefficient.imag()) > tol) return false;
  return true;
}

std::string to_string(const PauliSum& terms) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out += " + ";
    out += terms[i].to_string();
  }
  return out;
}

PauliSum jw_encode_hopping(const FermiHubbardModel& model, const QubitOrdering& ordering, int site,
                           Spin spin) {
  if (site < 0 || site >= model.L - 1) throw std::out_of_range("jw_encode_hopping: site out of range");
  return flip_flop(ordering.qubit(site, spin), ordering.qubit(site + 1, spin));
}

PauliSum jw_encode_onsite(const FermiHubbardModel& model, const QubitOrdering& ordering, int site) {
  if (site < 0 || site >= model.L) throw std::out_of_range("jw_encode_onsite: site out of range");
  const int a = ordering.qubit(site, Spin::Up);
  const int b = ordering.qubit(site, Spin::Down);
  PauliSum out;
  out.push_back(PauliString{0.25, {}});
  out.push_back(PauliString{-0.25, {{a, Pauli::Z}}});
  out.push_back(PauliString{-0.25, {{b, Pauli::Z}}});
  out.push_back(two_qubit_term(0.25, a, Pauli::Z, b, Pauli::Z));
  return out;
}

PauliSum spin_x_observable(const QubitOrdering& ordering, int site) {
  return flip_flop(ordering.qubit(site, Spin::Up), ordering.qubit(site, Spin::Down));
}

PauliSum hubbard_hamiltonian(const FermiHubbardModel& model, const QubitOrdering& ordering) {
  PauliSum h;
  for (int i = 0; i + 1 < model.L; ++i) {
    for (Spin s : {Spin::Up, Spin::Down}) {
      for (auto t : jw_encode_hopping(model, ordering, i, s)) {
        t.coefficient *= -model.J;
        h.push_back(std::move(t));
      }
    }
  }
  if (model.U != 0.0) {
    for (int i = 0; i < model.L; ++i) {
      for (auto t : jw_encode_onsite(model, ordering, i)) {
        t.coefficient *= model.U;
        h.push_back(std::move(t));
      }
    }
  }
  return simplify(h);
}

PauliSum number_operator(int n_qubits) {
  PauliSum n;
  n.push_back(PauliString{0.5 * n_qubits, {}});
  for (int q = 0; q < n_qubits; ++q) n.push_back(PauliString{-0.5, {{q, Pauli::Z}}});
  return n;
}

Eigen::MatrixXcd to_dense(const PauliSum& terms, int n_qubits) {
  if (n_qubits > 12) throw std::invalid_argument("to_dense: at most 12 qubits");
  const std::size_t dim = std::size_t{1} << n_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  const cplx i{0.0, 1.0};
  for (const auto& t : terms) {
    std::size_t flip = 0;
    for (const auto& [q, p] : t.factors)
      if (p != Pauli::Z) flip |= std::size_t{1} << q;
    for (std::size_t col = 0; col < dim; ++col) {
      cplx amp = t.coefficient;
      for (const auto& [q, p] : t.factors) {
        const bool bit = (col >> q) & 1U;
        if (p == Pauli::Z && bit) amp = -amp;
        if (p == Pauli::Y) amp *= bit ? -i : i;
      }
      m(col ^ flip, col) += amp;
    }
  }
  return m;
}

}  // namespace qspec
