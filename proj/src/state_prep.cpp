#include "qspec/state_prep.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace qspec {

Eigen::MatrixXd hopping_matrix(int L, double J) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(L, L);
  for (int i = 0; i + 1 < L; ++i) h(i, i + 1) = h(i + 1, i) = -J;
  return h;
}

OrbitalMatrix free_fermion_orbitals(const FermiHubbardModel& model) {
  model.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hopping_matrix(model.L, model.J));
  OrbitalMatrix out;
  out.energies = es.eigenvalues();
  out.rows = es.eigenvectors().transpose();
  // deterministic sign: first significant entry positive
  for (int r = 0; r < out.rows.rows(); ++r) {
    for (int c = 0; c < out.rows.cols(); ++c) {
      if (std::abs(out.rows(r, c)) > 1e-9) {
        if (out.rows(r, c) < 0) out.rows.row(r) *= -1.0;
        break;
      }
    }
  }
  const int eta = model.electrons_per_spin();
  if (eta > 0 && eta < model.L && std::abs(out.energies(eta) - out.energies(eta - 1)) < 1e-10) {
    std::ostringstream os;
    os << "free-fermion ground state is degenerate: orbitals " << eta - 1 << " and " << eta
       << " share energy " << out.energies(eta);
    throw std::runtime_error(os.str());
  }
  return out;
}

std::size_t GivensNetwork::rotation_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.size();
  return n;
}

namespace {

// Right-multiply columns (p, p+1) by [[c, -s], [s, c]], the single-particle action
// of the Givens gate on modes (p, p+1).
void rotate_columns(Eigen::MatrixXd& m, int p, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Eigen::VectorXd a = m.col(p);
  const Eigen::VectorXd b = m.col(p + 1);
  m.col(p) = c * a + s * b;
  m.col(p + 1) = -s * a + c * b;
}

void rotate_columns_derivative(Eigen::MatrixXd& m, int p, double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  const Eigen::VectorXd a = m.col(p);
  const Eigen::VectorXd b = m.col(p + 1);
  m.setZero();
  m.col(p) = 0.5 * (-s * a + c * b);
  m.col(p + 1) = 0.5 * (-c * a - s * b);
}

}  // namespace

GivensNetwork givens_compile(const OrbitalMatrix& orbitals, int n) {
  const int L = orbitals.sites();
  if (n < 0 || n > L) throw std::invalid_argument("givens_compile: bad occupation");
  Eigen::MatrixXd phi = orbitals.occupied(n);

  // Row rotations (absorbed into the irrelevant occupied-space basis change)
  // clear the upper-right corner so each row r lives on columns r .. r + L - n.
  for (int c = L - 1; c > L - n; --c) {
    const int k = c - (L - n);
    for (int r = 0; r < k; ++r) {
      const double a = phi(r + 1, c), b = phi(r, c);
      const double h = std::hypot(a, b);
      if (h < 1e-300) continue;
      const double cs = a / h, sn = b / h;
      const Eigen::RowVectorXd top = phi.row(r);
      const Eigen::RowVectorXd bottom = phi.row(r + 1);
      phi.row(r) = cs * top - sn * bottom;
      phi.row(r + 1) = sn * top + cs * bottom;
    }
  }

  // Column rotations, row by row from the right; row r's k-th rotation lands in layer r + k.
  const int width = L - n;
  std::vector<std::vector<ModeRotation>> elim(static_cast<std::size_t>(std::max(0, n + width - 1)));
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < width; ++k) {
      const int c = width + r - k;
      const double a = phi(r, c - 1), b = phi(r, c);
      const double theta = 2.0 * std::atan2(b, a);
      rotate_columns(phi, c - 1, theta);
      elim[static_cast<std::size_t>(r + k)].push_back({c - 1, theta});
    }
  }

  GivensNetwork net;
  net.L = L;
  for (int m = 0; m < n; ++m) net.occupied_modes.push_back(m);
  for (auto it = elim.rbegin(); it != elim.rend(); ++it) {
    std::vector<ModeRotation> layer;
    for (auto jt = it->rbegin(); jt != it->rend(); ++jt) layer.push_back({jt->mode, -jt->theta});
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::string to_string(DgaObjective objective) { return objective == DgaObjective::Energy ? "energy" : "fidelity"; }

DgaObjective dga_objective_from_string(const std::string& name) {
  if (name == "energy") return DgaObjective::Energy;
  if (name == "fidelity") return DgaObjective::Fidelity;
  throw std::invalid_argument("unknown DGA objective '" + name + "'");
}

DgaObjective default_objective(int L) { return L <= 13 ? DgaObjective::Fidelity : DgaObjective::Energy; }

std::vector<int> dga_pattern(int L, int n_layers) {
  std::vector<int> out;
  for (int l = 0; l < n_layers; ++l) {
    for (int p = 0; p + 1 < L; p += 2) out.push_back(p);
    for (int p = 1; p + 1 < L; p += 2) out.push_back(p);
  }
  return out;
}

GivensNetwork DgaAnsatz::sector_network(Spin spin) const {
  GivensNetwork net;
  net.L = L;
  net.occupied_modes = occupied_modes;
  const std::size_t per_sector = static_cast<std::size_t>(L - 1) * n_layers;
  if (angles.size() != 2 * per_sector) throw std::invalid_argument("DgaAnsatz: angle count mismatch");
  const std::size_t offset = spin == Spin::Up ? 0 : per_sector;
  std::size_t idx = 0;
  for (int l = 0; l < n_layers; ++l) {
    for (int parity = 0; parity < 2; ++parity) {
      std::vector<ModeRotation> layer;
      for (int p = parity; p + 1 < L; p += 2) layer.push_back({p, angles[offset + idx++]});
      net.layers.push_back(std::move(layer));
    }
  }
  return net;
}

Eigen::MatrixXd reference_orbitals(int L, const std::vector<int>& occupied) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(occupied.size()), L);
  for (std::size_t a = 0; a < occupied.size(); ++a) m(static_cast<Eigen::Index>(a), occupied[a]) = 1.0;
  return m;
}

Eigen::MatrixXd apply_network(const Eigen::MatrixXd& orbitals, const GivensNetwork& network) {
  Eigen::MatrixXd m = orbitals;
  for (const auto& layer : network.layers)
    for (const auto& rot : layer) rotate_columns(m, rot.mode, rot.theta);
  return m;
}

double sector_overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("sector_overlap: shape mismatch");
  if (a.rows() == 0) return 1.0;
  return (a * b.transpose()).determinant();
}

double sector_energy(const Eigen::MatrixXd& orbitals, const Eigen::MatrixXd& hopping) {
  return (orbitals * hopping * orbitals.transpose()).trace();
}

std::vector<int> initial_occupation(int L, int Ne) {
  if (Ne % 2 != 0) throw std::invalid_argument("initial_occupation: Ne must be even");
  const int eta = Ne / 2;
  if (eta > L) throw std::invalid_argument("initial_occupation: sector overfilled");
  std::vector<int> out;
  for (int m = 0; m < eta; ++m) {
    int q = static_cast<int>(std::lround(static_cast<double>(m) * L / eta));
    if (!out.empty() && q <= out.back()) q = out.back() + 1;
    out.push_back(std::min(q, L - 1));
  }
  // clamping from the top can only collide when eta == L; the stride rule then gives 0..L-1 anyway
  return out;
}

double fidelity(const Statevector& a, const Statevector& b) {
  if (a.n_qubits() != b.n_qubits()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(inner_product(a, b));
}

namespace {

Eigen::MatrixXd adjugate(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1.0;
    return adj;
  }
  Eigen::MatrixXd minor(n - 1, n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      adj(j, i) = (((i + j) & 1) ? -1.0 : 1.0) * minor.determinant();
    }
  }
  return adj;
}

struct SectorProblem {
  int L;
  std::vector<int> pattern;
  Eigen::MatrixXd reference;
  Eigen::MatrixXd target;   // free-fermion occupied orbitals
  Eigen::MatrixXd hopping;
  DgaObjective objective;

  Eigen::MatrixXd forward(const double* x) const {
    Eigen::MatrixXd m = reference;
    for (std::size_t i = 0; i < pattern.size(); ++i) rotate_columns(m, pattern[i], x[i]);
    return m;
  }

  // Objective to minimize and its gradient.
  double evaluate(const double* x, double* grad) const {
    const std::size_t n = pattern.size();
    // prefix[i] = reference R_0 .. R_{i-1}
    std::vector<Eigen::MatrixXd> prefix(n + 1);
    prefix[0] = reference;
    for (std::size_t i = 0; i < n; ++i) {
      prefix[i + 1] = prefix[i];
      rotate_columns(prefix[i + 1], pattern[i], x[i]);
    }
    const Eigen::MatrixXd& phi = prefix[n];
    // suffix acts on the right: W_i = R_{i+1} .. R_{n-1} M, built backwards as row rotations
    Eigen::MatrixXd right = objective == DgaObjective::Fidelity ? Eigen::MatrixXd(target.transpose())
                                                                : Eigen::MatrixXd(hopping * phi.transpose());
    double value = 0.0;
    Eigen::MatrixXd adj;
    double det = 0.0;
    if (objective == DgaObjective::Fidelity) {
      const Eigen::MatrixXd o = phi * target.transpose();
      det = o.determinant();
      adj = adjugate(o);
      value = -det * det;
    } else {
      value = (phi * hopping * phi.transpose()).trace();
    }
    if (!grad) return value;
    for (std::size_t ii = n; ii-- > 0;) {
      // d phi / d x_i = prefix[i] R_i' (R_{i+1} .. R_{n-1}); `right` holds (R_{i+1} ..) M
      Eigen::MatrixXd d = prefix[ii];
      rotate_columns_derivative(d, pattern[ii], x[ii]);
      const Eigen::MatrixXd dm = d * right;
      if (objective == DgaObjective::Fidelity) {
        grad[ii] = -2.0 * det * (adj * dm).trace();
      } else {
        grad[ii] = 2.0 * dm.trace();
      }
      // right <- R_i right: rows (p, p+1) transform as the transpose action
      const int p = pattern[ii];
      const double c = std::cos(x[ii] / 2), s = std::sin(x[ii] / 2);
      const Eigen::RowVectorXd a = right.row(p);
      const Eigen::RowVectorXd b = right.row(p + 1);
      right.row(p) = c * a - s * b;
      right.row(p + 1) = s * a + c * b;
    }
    return value;
  }
};

double gsl_f(const gsl_vector* v, void* params) {
  return static_cast<const SectorProblem*>(params)->evaluate(v->data, nullptr);
}
void gsl_df(const gsl_vector* v, void* params, gsl_vector* g) {
  static_cast<const SectorProblem*>(params)->evaluate(v->data, g->data);
}
void gsl_fdf(const gsl_vector* v, void* params, double* f, gsl_vector* g) {
  *f = static_cast<const SectorProblem*>(params)->evaluate(v->data, g->data);
}

struct LocalResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

LocalResult minimize(const SectorProblem& problem, std::vector<double> x0, const OptimizerConfig& cfg) {
  const std::size_t n = x0.size();
  LocalResult out;
  if (n == 0) {
    out.value = problem.evaluate(nullptr, nullptr);
    out.converged = true;
    return out;
  }
  gsl_set_error_handler_off();
  gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, n, const_cast<SectorProblem*>(&problem)};
  gsl_vector* x = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_multimin_fdfminimizer* s = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
  gsl_multimin_fdfminimizer_set(s, &fdf, x, 0.05, 0.1);

  std::vector<double> history;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const int status = gsl_multimin_fdfminimizer_iterate(s);
    history.push_back(s->f);
    if (status != GSL_SUCCESS) {  // no further progress possible along the line search
      out.converged = true;
      break;
    }
    if (gsl_multimin_test_gradient(s->gradient, 1e-10) == GSL_SUCCESS) {
      out.converged = true;
      break;
    }
    const auto w = static_cast<std::size_t>(cfg.window);
    if (history.size() > w && history[history.size() - 1 - w] - s->f < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.value = s->f;
  out.x.assign(s->x->data, s->x->data + n);
  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  return out;
}

}  // namespace

DgaAnsatz dga_optimize(const FermiHubbardModel& model, int n_layers, DgaObjective objective,
                       const OptimizerConfig& config) {
  model.validate();
  if (n_layers < 1) throw std::invalid_argument("dga_optimize: n_layers must be >= 1");
  const int L = model.L;
  const int eta = model.electrons_per_spin();
  const OrbitalMatrix orb = free_fermion_orbitals(model);

  SectorProblem problem{L,
                        dga_pattern(L, n_layers),
                        reference_orbitals(L, initial_occupation(L, model.Ne)),
                        orb.occupied(eta),
                        hopping_matrix(L, model.J),
                        objective};
  const std::size_t n = problem.pattern.size();

  LocalResult best;
  bool any_converged = false;
  int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    std::vector<double> x0(n, 0.0);
    if (r == 0 && !config.warm_start.empty()) {
      if (config.warm_start.size() > n) throw std::invalid_argument("dga_optimize: warm start too long");
      std::copy(config.warm_start.begin(), config.warm_start.end(), x0.begin());
    } else if (r > 0) {
      std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(r));
      std::uniform_real_distribution<double> uni(-std::numbers::pi, std::numbers::pi);
      for (auto& v : x0) v = uni(rng);
    }
    LocalResult res = minimize(problem, x0, config);
    any_converged = any_converged || res.converged;
    // ties resolved by restart index, which keeps the merge deterministic
    if (res.value < best.value - 1e-15) best = std::move(res);
  }

  DgaAnsatz out;
  out.L = L;
  out.Ne = model.Ne;
  out.n_layers = n_layers;
  out.objective = objective;
  out.occupied_modes = initial_occupation(L, model.Ne);
  out.angles = best.x;
  out.angles.insert(out.angles.end(), best.x.begin(), best.x.end());
  out.converged = best.converged;
  out.restarts = restarts;
  const Eigen::MatrixXd phi = problem.forward(best.x.data());
  const double ov = sector_overlap(phi, problem.target);
  out.sector_fidelity = ov * ov;
  out.fidelity = out.sector_fidelity * out.sector_fidelity;
  out.energy = 2.0 * sector_energy(phi, problem.hopping);
  return out;
}

std::vector<Gate> network_gates(const GivensNetwork& up, const GivensNetwork& down) {
  if (up.L != down.L) throw std::invalid_argument("network_gates: sector size mismatch");
  const int L = up.L;
  std::vector<Gate> gates;
  for (int m : up.occupied_modes) gates.push_back(Gate::single(GateKind::X, m));
  for (int m : down.occupied_modes) gates.push_back(Gate::single(GateKind::X, L + m));
  const std::size_t depth = std::max(up.layers.size(), down.layers.size());
  for (std::size_t l = 0; l < depth; ++l) {
    if (l < up.layers.size())
      for (const auto& r : up.layers[l]) gates.push_back(Gate::pair(GateKind::Givens, r.mode, r.mode + 1, r.theta));
    if (l < down.layers.size())
      for (const auto& r : down.layers[l])
        gates.push_back(Gate::pair(GateKind::Givens, L + r.mode, L + r.mode + 1, r.theta));
  }
  return gates;
}

Statevector prepare_state(const GivensNetwork& up, const GivensNetwork& down) {
  Statevector s(2 * up.L);
  s.apply(network_gates(up, down));
  return s;
}

Statevector slater_state(const Eigen::MatrixXd& up, const Eigen::MatrixXd& down) {
  const int L = static_cast<int>(up.cols());
  const int nu = static_cast<int>(up.rows());
  const int nd = static_cast<int>(down.rows());
  Statevector s(2 * L);
  s[0] = 0.0;
  const std::uint64_t mask = (std::uint64_t{1} << L) - 1;
  std::vector<std::uint64_t> ups, dns;
  for (std::uint64_t b = 0; b <= mask; ++b) {
    if (std::popcount(b) == nu) ups.push_back(b);
    if (std::popcount(b) == nd) dns.push_back(b);
  }
  auto minor_det = [L](const Eigen::MatrixXd& phi, std::uint64_t cols) {
    Eigen::MatrixXd sub(phi.rows(), phi.rows());
    int c = 0;
    for (int q = 0; q < L; ++q)
      if ((cols >> q) & 1U) sub.col(c++) = phi.col(q);
    return phi.rows() == 0 ? 1.0 : sub.determinant();
  };
  std::vector<double> du, dd;
  for (auto b : ups) du.push_back(minor_det(up, b));
  for (auto b : dns) dd.push_back(minor_det(down, b));
  for (std::size_t i = 0; i < ups.size(); ++i)
    for (std::size_t j = 0; j < dns.size(); ++j) s[ups[i] | (dns[j] << L)] = du[i] * dd[j];
  return s;
}

void write_ansatz(std::ostream& os, const DgaAnsatz& a) {
  os.precision(17);
  os << "L " << a.L << "\n";
  os << "Ne " << a.Ne << "\n";
  os << "n_layers " << a.n_layers << "\n";
  os << "objective " << to_string(a.objective) << "\n";
  os << "F_DGA " << a.sector_fidelity << "\n";
  os << "F_state " << a.fidelity << "\n";
  os << "energy " << a.energy << "\n";
  os << "angles " << a.angles.size() << "\n";
  for (double t : a.angles) os << t << "\n";
}

DgaAnsatz read_ansatz(std::istream& is) {
  DgaAnsatz a;
  std::string key;
  std::size_t count = 0;
  auto expect = [&](const char* name) {
    if (!(is >> key) || key != name) throw std::runtime_error(std::string("read_ansatz: expected ") + name);
  };
  std::string objective;
  expect("L");
  is >> a.L;
  expect("Ne");
  is >> a.Ne;
  expect("n_layers");
  is >> a.n_layers;
  expect("objective");
  is >> objective;
  a.objective = dga_objective_from_string(objective);
  expect("F_DGA");
  is >> a.sector_fidelity;
  expect("F_state");
  is >> a.fidelity;
  expect("energy");
  is >> a.energy;
  expect("angles");
  is >> count;
  a.angles.resize(count);
  for (auto& t : a.angles)
    if (!(is >> t)) throw std::runtime_error("read_ansatz: truncated angle list");
  if (count != static_cast<std::size_t>(2 * (a.L - 1) * a.n_layers))
    throw std::runtime_error("read_ansatz: angle count does not match L and n_layers");
  a.occupied_modes = initial_occupation(a.L, a.Ne);
  return a;
}

}  // namespace qspec
