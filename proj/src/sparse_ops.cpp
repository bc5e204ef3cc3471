#include "qspec/sparse_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace qspec {

namespace {

// Gosper's hack over all n-bit words with popcount k.
std::vector<std::uint64_t> combinations(int n, int k) {
  std::vector<std::uint64_t> out;
  if (k < 0 || k > n) return out;
  if (k == 0) return {0};
  std::uint64_t x = (std::uint64_t{1} << k) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (x < limit) {
    out.push_back(x);
    const std::uint64_t c = x & (~x + 1);
    const std::uint64_t r = x + c;
    x = (((r ^ x) >> 2) / c) | r;
  }
  return out;
}

}  // namespace

SectorBasis::SectorBasis(int n_qubits, int n_particles) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > 62) throw std::invalid_argument("SectorBasis: bad qubit count");
  states_ = combinations(n_qubits, n_particles);
  if (states_.empty()) throw std::invalid_argument("SectorBasis: empty sector");
  build_lookup();
}

SectorBasis::SectorBasis(int n_qubits, int n_particles, std::uint64_t sub_mask, int n_sub)
    : n_qubits_(n_qubits) {
  for (auto s : combinations(n_qubits, n_particles))
    if (std::popcount(s & sub_mask) == n_sub) states_.push_back(s);
  if (states_.empty()) throw std::invalid_argument("SectorBasis: empty sector");
  build_lookup();
}

SectorBasis SectorBasis::from_states(int n_qubits, std::vector<std::uint64_t> states) {
  SectorBasis b(n_qubits, 0);
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  b.states_ = std::move(states);
  b.build_lookup();
  return b;
}

void SectorBasis::build_lookup() {
  lookup_.clear();
  lookup_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) lookup_.emplace(states_[i], static_cast<std::int64_t>(i));
}

std::int64_t SectorBasis::index_of(std::uint64_t bits) const {
  auto it = lookup_.find(bits);
  return it == lookup_.end() ? -1 : it->second;
}

SparseMatrix sector_matrix(const PauliSum& terms, const SectorBasis& basis) {
  const cplx iy[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<Eigen::Triplet<cplx>> trips;
  for (const auto& t : terms) {
    std::uint64_t flip = 0, signmask = 0;
    int ny = 0;
    for (const auto& [q, p] : t.factors) {
      if (q >= basis.n_qubits()) throw std::out_of_range("sector_matrix: term outside register");
      if (p != Pauli::Z) flip |= std::uint64_t{1} << q;
      if (p != Pauli::X) signmask |= std::uint64_t{1} << q;
      if (p == Pauli::Y) ++ny;
    }
    const cplx c = t.coefficient * iy[ny % 4];
    for (std::size_t col = 0; col < basis.dimension(); ++col) {
      const std::uint64_t s = basis.state(col);
      const std::int64_t row = basis.index_of(s ^ flip);
      if (row < 0) continue;
      const cplx v = (std::popcount(s & signmask) & 1) ? -c : c;
      trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  SparseMatrix m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(cplx{0.0, 0.0}, 1e-15);
  return m;
}

Vector restrict_to(const Statevector& state, const SectorBasis& basis) {
  if (state.n_qubits() != basis.n_qubits()) throw std::invalid_argument("restrict_to: register mismatch");
  Vector v(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t i = 0; i < basis.dimension(); ++i) v(static_cast<Eigen::Index>(i)) = state[basis.state(i)];
  return v;
}

Statevector embed(const Vector& v, const SectorBasis& basis) {
  Statevector s(basis.n_qubits());
  s[0] = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) s[basis.state(i)] = v(static_cast<Eigen::Index>(i));
  return s;
}

namespace {

struct LanczosRun {
  double energy = 0.0;
  Vector vector;
  double residual = 0.0;
};

void orthogonalize(Vector& w, const std::vector<Vector>& against) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& u : against) w -= u.dot(w) * u;
}

LanczosRun lanczos_lowest(const SparseMatrix& h, Vector start, const std::vector<Vector>& deflate, double tol,
                          int max_iter) {
  const Eigen::Index dim = h.rows();
  LanczosRun best;
  for (int restart = 0; restart < 20; ++restart) {
    orthogonalize(start, deflate);
    start.normalize();
    std::vector<Vector> basis{start};
    std::vector<double> alpha, beta;
    Eigen::VectorXd ritz_vec;
    const int cap = static_cast<int>(std::min<Eigen::Index>(max_iter, dim - static_cast<Eigen::Index>(deflate.size())));
    for (int k = 0; k < cap; ++k) {
      Vector w = h * basis.back();
      alpha.push_back(basis.back().dot(w).real());
      orthogonalize(w, basis);
      orthogonalize(w, deflate);
      const double b = w.norm();
      const int m = static_cast<int>(alpha.size());
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) t(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
      ritz_vec = es.eigenvectors().col(0);
      const double est = b * std::abs(ritz_vec(m - 1));
      if (est < tol * 0.1 || b < 1e-14 || k + 1 == cap) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    Vector psi = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < ritz_vec.size(); ++i) psi += ritz_vec(i) * basis[static_cast<std::size_t>(i)];
    orthogonalize(psi, deflate);
    psi.normalize();
    const double e = psi.dot(h * psi).real();
    const double res = (h * psi - e * psi).norm();
    best = {e, psi, res};
    if (res < tol) break;
    start = psi;
  }
  return best;
}

}  // namespace

EigenPair lanczos_ground_state(const SparseMatrix& h, double tol, int max_iter, std::uint64_t seed) {
  const Eigen::Index dim = h.rows();
  if (dim == 0) throw std::invalid_argument("lanczos_ground_state: empty matrix");
  EigenPair out;
  if (dim <= 600) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{Eigen::MatrixXcd(h)};
    out.energy = es.eigenvalues()(0);
    out.vector = es.eigenvectors().col(0);
    out.residual = (h * out.vector - out.energy * out.vector).norm();
    out.gap = dim > 1 ? es.eigenvalues()(1) - es.eigenvalues()(0) : std::numeric_limits<double>::infinity();
  } else {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vector start(dim);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = cplx{nd(rng), 0.0};
    auto ground = lanczos_lowest(h, start, {}, tol, max_iter);
    for (Eigen::Index i = 0; i < dim; ++i) start(i) = cplx{nd(rng), 0.0};
    auto excited = lanczos_lowest(h, start, {ground.vector}, tol, max_iter);
    out.energy = ground.energy;
    out.vector = ground.vector;
    out.residual = ground.residual;
    out.gap = excited.energy - ground.energy;
  }
  out.degenerate = out.gap < 1e-10;
  // fix the global phase: largest component real positive
  Eigen::Index imax = 0;
  out.vector.cwiseAbs().maxCoeff(&imax);
  out.vector *= std::conj(out.vector(imax)) / std::abs(out.vector(imax));
  return out;
}

Vector krylov_expm(const SparseMatrix& h, const Vector& v, double t, double tol, int krylov_dim) {
  Vector w = v;
  double remaining = t;
  const Eigen::Index dim = h.rows();
  int guard = 0;
  while (remaining != 0.0) {
    if (++guard > 100000) throw std::runtime_error("krylov_expm: step size collapsed");
    const double beta0 = w.norm();
    if (beta0 == 0.0) return w;
    std::vector<Vector> basis{w / beta0};
    std::vector<double> alpha, beta;
    bool exact = false;
    double last_beta = 0.0;
    const int m_cap = static_cast<int>(std::min<Eigen::Index>(krylov_dim, dim));
    for (int k = 0; k < m_cap; ++k) {
      Vector z = h * basis.back();
      alpha.push_back(basis.back().dot(z).real());
      orthogonalize(z, basis);
      const double b = z.norm();
      if (b < 1e-13) {
        exact = true;
        break;
      }
      if (k + 1 == m_cap) {
        last_beta = b;
        break;
      }
      beta.push_back(b);
      basis.push_back(z / b);
    }
    const int m = static_cast<int>(alpha.size());
    if (m == static_cast<int>(dim)) exact = true;
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) tri(i, i) = alpha[i];
    for (int i = 0; i + 1 < m; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Eigen::MatrixXd& q = es.eigenvectors();
    auto coeffs = [&](double tau) {
      Eigen::VectorXcd c(m);
      for (int i = 0; i < m; ++i) c(i) = std::exp(cplx{0.0, -es.eigenvalues()(i) * tau}) * q(0, i);
      return Eigen::VectorXcd(q.cast<cplx>() * c);
    };
    double tau = remaining;
    Eigen::VectorXcd c = coeffs(tau);
    while (!exact && last_beta * std::abs(c(m - 1)) > tol) {
      tau *= 0.5;
      c = coeffs(tau);
    }
    Vector next = Vector::Zero(dim);
    for (int i = 0; i < m; ++i) next += c(i) * basis[static_cast<std::size_t>(i)];
    w = beta0 * next;
    remaining -= tau;
    if (std::abs(remaining) < 1e-15 * std::max(1.0, std::abs(t))) remaining = 0.0;
  }
  return w;
}

}  // namespace qspec
