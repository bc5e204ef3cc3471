#include "qspec/ed.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace qspec {

namespace {

inline int parity_below(std::uint64_t s, int mode) {
  return std::popcount(s & ((std::uint64_t{1} << mode) - 1)) & 1;
}

// c+_a c_b |s>; returns false when the result vanishes.
bool hop(std::uint64_t s, int a, int b, std::uint64_t& out, double& sign) {
  const std::uint64_t ba = std::uint64_t{1} << a;
  const std::uint64_t bb = std::uint64_t{1} << b;
  if (!(s & bb)) return false;
  const std::uint64_t s1 = s ^ bb;
  if (s1 & ba) return false;
  sign = (parity_below(s, b) ^ parity_below(s1, a)) ? -1.0 : 1.0;
  out = s1 | ba;
  return true;
}

struct HopTerm {
  int a;
  int b;
  double coeff;  // coeff * (c+_a c_b + c+_b c_a)
};

SparseMatrix fermion_matrix(const SectorBasis& basis, const std::vector<HopTerm>& hops,
                            const std::vector<double>& diagonal) {
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t col = 0; col < basis.dimension(); ++col) {
    const std::uint64_t s = basis.state(col);
    if (!diagonal.empty() && diagonal[col] != 0.0)
      trips.emplace_back(static_cast<int>(col), static_cast<int>(col), diagonal[col]);
    for (const auto& h : hops) {
      for (auto [a, b] : {std::pair{h.a, h.b}, std::pair{h.b, h.a}}) {
        std::uint64_t t = 0;
        double sign = 0.0;
        if (!hop(s, a, b, t, sign)) continue;
        const auto row = basis.index_of(t);
        if (row < 0) throw std::logic_error("fermion_matrix: hop left the sector");
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col), h.coeff * sign);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

std::vector<HopTerm> hubbard_hops(const FermiHubbardModel& model) {
  std::vector<HopTerm> hops;
  for (int i = 0; i + 1 < model.L; ++i) {
    hops.push_back({i + 1, i, -model.J});
    hops.push_back({model.L + i + 1, model.L + i, -model.J});
  }
  return hops;
}

std::vector<double> hubbard_diagonal(const FermiHubbardModel& model, const SectorBasis& basis) {
  std::vector<double> d(basis.dimension(), 0.0);
  const std::uint64_t up_mask = (std::uint64_t{1} << model.L) - 1;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const std::uint64_t s = basis.state(i);
    d[i] = model.U * std::popcount((s & up_mask) & (s >> model.L));
  }
  return d;
}

// Sign of reordering the ascending mode product into ascending qubit order.
double reorder_sign(std::uint64_t modes, const QubitOrdering& ord, int L, std::uint64_t& qubit_bits) {
  int qs[64];
  int n = 0;
  qubit_bits = 0;
  for (int m = 0; m < 2 * L; ++m) {
    if (!((modes >> m) & 1U)) continue;
    const int q = m < L ? ord.qubit(m, Spin::Up) : ord.qubit(m - L, Spin::Down);
    qs[n++] = q;
    qubit_bits |= std::uint64_t{1} << q;
  }
  int inversions = 0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (qs[a] > qs[b]) ++inversions;
  return (inversions & 1) ? -1.0 : 1.0;
}

FermiHubbardModel checked(const FermiHubbardModel& model) {
  model.validate();
  if (model.L > 8) throw std::invalid_argument("EdOracle: L > 8 exceeds the exact-diagonalization budget");
  return model;
}

}  // namespace

EdOracle::EdOracle(FermiHubbardModel model) : model_(checked(model)), basis_(2 * model.L, model.Ne) {
  hamiltonian_ = fermion_matrix(basis_, hubbard_hops(model_), hubbard_diagonal(model_, basis_));
  for (int j = 0; j < model_.L; ++j)
    spin_x_.push_back(fermion_matrix(basis_, {{j, model_.L + j, 1.0}}, {}));
}

Vector EdOracle::evolve(const Vector& v, double t) const {
  if (t == 0.0) return v;
  return krylov_expm(hamiltonian_, v, t, 1e-12);
}

Vector EdOracle::from_statevector(const Statevector& state, OrderingKind ordering) const {
  const QubitOrdering ord(ordering, model_.L);
  if (state.n_qubits() != 2 * model_.L) throw std::invalid_argument("from_statevector: register mismatch");
  Vector v(static_cast<Eigen::Index>(basis_.dimension()));
  for (std::size_t i = 0; i < basis_.dimension(); ++i) {
    std::uint64_t bits = 0;
    const double sign = reorder_sign(basis_.state(i), ord, model_.L, bits);
    v(static_cast<Eigen::Index>(i)) = sign * state[bits];
  }
  return v;
}

Statevector EdOracle::to_statevector(const Vector& v, OrderingKind ordering) const {
  const QubitOrdering ord(ordering, model_.L);
  Statevector s(2 * model_.L);
  s[0] = 0.0;
  for (std::size_t i = 0; i < basis_.dimension(); ++i) {
    std::uint64_t bits = 0;
    const double sign = reorder_sign(basis_.state(i), ord, model_.L, bits);
    s[bits] = sign * v(static_cast<Eigen::Index>(i));
  }
  return s;
}

GroundState ground_state(const EdOracle& ed) {
  const auto& model = ed.model();
  const int eta = model.electrons_per_spin();
  const std::uint64_t up_mask = (std::uint64_t{1} << model.L) - 1;
  const SectorBasis block(2 * model.L, model.Ne, up_mask, eta);
  const SparseMatrix h = fermion_matrix(block, hubbard_hops(model), hubbard_diagonal(model, block));
  const EigenPair pair = lanczos_ground_state(h);

  GroundState out;
  out.energy = pair.energy;
  out.gap = pair.gap;
  out.degenerate = pair.degenerate;
  out.vector = Vector::Zero(static_cast<Eigen::Index>(ed.basis().dimension()));
  for (std::size_t i = 0; i < block.dimension(); ++i)
    out.vector(ed.basis().index_of(block.state(i))) = pair.vector(static_cast<Eigen::Index>(i));
  out.residual = (ed.hamiltonian() * out.vector - out.energy * out.vector).norm();
  return out;
}

std::vector<cplx> retarded_spin_gf(const EdOracle& ed, const Vector& psi, int j, int k,
                                   std::span<const double> times) {
  const SparseMatrix& sj = ed.spin_x(j);
  const SparseMatrix& sk = ed.spin_x(k);
  const Vector sj_psi = sj * psi;
  std::vector<cplx> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t < 0.0) throw std::invalid_argument("retarded_spin_gf: negative time");
    // <psi| e^{-iHt} S_k e^{iHt} S_j |psi> and <psi| S_j e^{-iHt} S_k e^{iHt} |psi>
    const Vector a = ed.evolve(sj_psi, -t);
    const Vector b = ed.evolve(psi, -t);
    const cplx first = b.dot(sk * a);
    const cplx second = a.dot(sk * b);
    out.push_back(cplx{0.0, -1.0} * (first - second));
  }
  return out;
}

std::vector<double> spin_correlator_im2(const EdOracle& ed, const Vector& psi, int j, int k,
                                        std::span<const double> times) {
  const Vector sj_psi = ed.spin_x(j) * psi;
  std::vector<double> out;
  for (double t : times) {
    const Vector a = ed.evolve(sj_psi, -t);
    const Vector b = ed.evolve(psi, -t);
    out.push_back(2.0 * b.dot(ed.spin_x(k) * a).imag());
  }
  return out;
}

LehmannData lehmann_data(const EdOracle& ed, const Vector& psi, double ground_energy, double momentum,
                         double eta) {
  if (eta <= 0.0) throw std::invalid_argument("lehmann: eta must be positive");
  const auto dim = static_cast<Eigen::Index>(ed.basis().dimension());
  if (dim > 5000) throw std::invalid_argument("lehmann: sector too large for full diagonalization");
  const Eigen::MatrixXd h = Eigen::MatrixXcd(ed.hamiltonian()).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);

  const int L = ed.model().L;
  Vector plus = Vector::Zero(dim);
  Vector minus = Vector::Zero(dim);
  for (int j = 0; j < L; ++j) {
    const Vector sj = ed.spin_x(j) * psi;
    plus += std::exp(cplx{0.0, momentum * j}) * sj;
    minus += std::exp(cplx{0.0, -momentum * j}) * sj;
  }
  plus /= std::sqrt(static_cast<double>(L));
  minus /= std::sqrt(static_cast<double>(L));
  const Eigen::VectorXcd amp_plus = es.eigenvectors().transpose().cast<cplx>() * plus;
  const Eigen::VectorXcd amp_minus = es.eigenvectors().transpose().cast<cplx>() * minus;

  LehmannData out;
  out.momentum = momentum;
  out.eta = eta;
  for (Eigen::Index m = 0; m < dim; ++m) {
    out.excitation.push_back(es.eigenvalues()(m) - ground_energy);
    out.weight_plus.push_back(std::norm(amp_plus(m)));
    out.weight_minus.push_back(std::norm(amp_minus(m)));
  }
  return out;
}

std::vector<cplx> lehmann_gf(const LehmannData& data, std::span<const double> omegas) {
  if (data.eta <= 0.0) throw std::invalid_argument("lehmann: eta must be positive");
  std::vector<cplx> out;
  out.reserve(omegas.size());
  const cplx ieta{0.0, data.eta};
  for (double w : omegas) {
    cplx g{0.0, 0.0};
    for (std::size_t m = 0; m < data.excitation.size(); ++m) {
      const double de = data.excitation[m];
      g += data.weight_plus[m] / (w - de + ieta) - data.weight_minus[m] / (w + de + ieta);
    }
    out.push_back(g);
  }
  return out;
}

SpinReflectionReport verify_spin_reflection_symmetry(const Statevector& state, OrderingKind ordering, int L,
                                                     double tol) {
  if (state.n_qubits() != 2 * L) throw std::invalid_argument("spin reflection: register mismatch");
  const QubitOrdering ord(ordering, L);
  // qubit -> mode
  std::vector<int> mode_of(2 * L);
  for (int i = 0; i < L; ++i) {
    mode_of[ord.qubit(i, Spin::Up)] = i;
    mode_of[ord.qubit(i, Spin::Down)] = L + i;
  }
  const std::uint64_t up_mask = (std::uint64_t{1} << L) - 1;

  std::unordered_map<std::uint64_t, cplx> amps;
  SpinReflectionReport rep;
  rep.equal_populations = true;
  rep.sz2_residuals.assign(L, 0.0);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const cplx a = state[i];
    if (std::norm(a) < 1e-28) continue;
    std::uint64_t modes = 0;
    for (int q = 0; q < 2 * L; ++q)
      if ((i >> q) & 1U) modes |= std::uint64_t{1} << mode_of[q];
    std::uint64_t check = 0;
    const double sign = reorder_sign(modes, ord, L, check);
    amps[modes] = sign * a;
    const int n_up = std::popcount(modes & up_mask);
    const int n_dn = std::popcount(modes >> L);
    if (n_up != n_dn && std::norm(a) > tol * tol) rep.equal_populations = false;
    for (int j = 0; j < L; ++j) {
      const bool u = (modes >> j) & 1U;
      const bool d = (modes >> (L + j)) & 1U;
      if (u == d) rep.sz2_residuals[j] += std::norm(a);
    }
  }
  for (int j = 0; j < L; ++j) {
    rep.sz2_residuals[j] = std::sqrt(rep.sz2_residuals[j]);
    if (rep.sz2_residuals[j] > tol) rep.sz2_failing_sites.push_back(j);
  }

  double plus = 0.0, minus = 0.0;
  auto reflected = [&](std::uint64_t s, cplx a) {
    const std::uint64_t A = s & up_mask;
    const std::uint64_t B = s >> L;
    const int sign = ((std::popcount(A) * std::popcount(B)) & 1) ? -1 : 1;
    return std::pair{B | (A << L), static_cast<double>(sign) * a};
  };
  std::unordered_map<std::uint64_t, cplx> r_amps;
  for (const auto& [s, a] : amps) {
    auto [t, b] = reflected(s, a);
    r_amps[t] = b;
  }
  for (const auto& [s, b] : r_amps) {
    auto it = amps.find(s);
    const cplx a = it == amps.end() ? cplx{0.0, 0.0} : it->second;
    plus += std::norm(b - a);
    minus += std::norm(b + a);
  }
  for (const auto& [s, a] : amps)
    if (!r_amps.contains(s)) {
      plus += std::norm(a);
      minus += std::norm(a);
    }
  plus = std::sqrt(plus);
  minus = std::sqrt(minus);
  rep.reflection_residual = std::min(plus, minus);
  rep.parity = plus <= minus ? 1 : -1;
  rep.symmetric = rep.equal_populations && rep.reflection_residual < tol;
  if (!rep.symmetric) rep.parity = 0;
  return rep;
}

void write_gf_csv(std::ostream& os, std::span<const double> times, std::span<const cplx> values) {
  os.precision(17);
  os << "t,re,im\n";
  for (std::size_t i = 0; i < times.size(); ++i) os << times[i] << ',' << values[i].real() << ',' << values[i].imag() << '\n';
}

void write_lehmann_csv(std::ostream& os, const LehmannData& data) {
  os.precision(17);
  os << "# k=" << data.momentum << " eta=" << data.eta << "\n";
  os << "excitation,weight_plus,weight_minus\n";
  for (std::size_t m = 0; m < data.excitation.size(); ++m)
    os << data.excitation[m] << ',' << data.weight_plus[m] << ',' << data.weight_minus[m] << '\n';
}

}  // namespace qspec
