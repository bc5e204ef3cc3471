#include "qspec/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qspec/sparse_ops.hpp"

namespace qspec {

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::InitialState: return "initial_state";
    case SegmentKind::ReorderFswaps: return "reorder_fswaps";
    case SegmentKind::Quench: return "quench";
    case SegmentKind::TrotterStep: return "trotter_step";
    case SegmentKind::MeasureBasis: return "measure_basis";
  }
  return "?";
}

std::string to_string(TrotterOrder order) { return order == TrotterOrder::First ? "first" : "second"; }

TrotterOrder trotter_order_from_string(const std::string& name) {
  if (name == "first") return TrotterOrder::First;
  if (name == "second") return TrotterOrder::Second;
  throw std::invalid_argument("unknown Trotter order '" + name + "'");
}

std::string to_string(ExecutionMode mode) {
  switch (mode) {
    case ExecutionMode::Exact: return "exact";
    case ExecutionMode::Sampled: return "shots";
    case ExecutionMode::ExactPropagator: return "propagator";
  }
  return "?";
}

ExecutionMode execution_mode_from_string(const std::string& name) {
  if (name == "exact") return ExecutionMode::Exact;
  if (name == "shots") return ExecutionMode::Sampled;
  if (name == "propagator") return ExecutionMode::ExactPropagator;
  throw std::invalid_argument("unknown execution mode '" + name + "'");
}

Preparation exact_preparation(const FermiHubbardModel& model) {
  const OrbitalMatrix orb = free_fermion_orbitals(model);
  GivensNetwork net = givens_compile(orb, model.electrons_per_spin());
  return {net, net, "exact_ff"};
}

Preparation dga_preparation(const DgaAnsatz& ansatz) {
  return {ansatz.sector_network(Spin::Up), ansatz.sector_network(Spin::Down), "dga"};
}

std::vector<Gate> ProtocolCircuit::gates() const {
  std::vector<Gate> out;
  for (const auto& s : segments) out.insert(out.end(), s.gates.begin(), s.gates.end());
  return out;
}

std::vector<OrderingKind> ProtocolCircuit::ordering_timeline() const {
  std::vector<OrderingKind> out;
  for (const auto& s : segments) out.push_back(s.ordering_after);
  return out;
}

OrderingKind ProtocolCircuit::final_ordering() const {
  if (segments.empty()) throw std::logic_error("empty protocol circuit");
  return segments.back().ordering_after;
}

namespace {

// Tracks which fermionic mode (2 * site + spin) sits on each qubit while FSWAPs move them.
struct ModeLayout {
  std::vector<int> mode_at;

  static ModeLayout interleaved(int L) {
    ModeLayout l;
    for (int q = 0; q < 2 * L; ++q) l.mode_at.push_back(q);
    return l;
  }
  static ModeLayout all_up_all_down(int L) {
    ModeLayout l;
    for (int i = 0; i < L; ++i) l.mode_at.push_back(2 * i);
    for (int i = 0; i < L; ++i) l.mode_at.push_back(2 * i + 1);
    return l;
  }
  void fswap(std::vector<Gate>& out, int q) {
    out.push_back(Gate::pair(GateKind::FSwap, q, q + 1));
    std::swap(mode_at[static_cast<std::size_t>(q)], mode_at[static_cast<std::size_t>(q + 1)]);
  }
  // Hopping on every adjacent same-spin pair forming a bond whose left site has the given parity.
  void hop_bonds(std::vector<Gate>& out, int parity, double angle) const {
    for (std::size_t q = 0; q + 1 < mode_at.size(); ++q) {
      const int a = mode_at[q], b = mode_at[q + 1];
      if ((a & 1) != (b & 1)) continue;
      const int sa = a / 2, sb = b / 2;
      if (std::abs(sa - sb) != 1 || std::min(sa, sb) % 2 != parity) continue;
      out.push_back(Gate::pair(GateKind::Hopping, static_cast<int>(q), static_cast<int>(q + 1), angle));
    }
  }
};

void check_interleaved(const ModeLayout& l) {
  for (std::size_t q = 0; q < l.mode_at.size(); ++q)
    if (l.mode_at[q] != static_cast<int>(q)) throw std::logic_error("FSWAP network left modes out of place");
}

std::vector<Gate> interleaved_step(const FermiHubbardModel& model, double dt, TrotterOrder order) {
  const int L = model.L;
  ModeLayout lay = ModeLayout::interleaved(L);
  std::vector<Gate> g;
  auto layer_a = [&] {
    for (int i = 0; i + 1 < L; i += 2) lay.fswap(g, 2 * i + 1);
  };
  auto layer_b = [&] {
    for (int i = 0; i + 1 < L; ++i) lay.fswap(g, 2 * i + 1);
  };
  auto layer_c = [&] {
    for (int i = 1; i + 1 < L; i += 2) lay.fswap(g, 2 * i + 1);
  };
  auto onsite = [&] {
    for (int i = 0; i < L; ++i) g.push_back(Gate::pair(GateKind::Onsite, 2 * i, 2 * i + 1, model.U * dt));
  };
  const double full = -model.J * dt;
  if (order == TrotterOrder::First) {
    layer_a();
    lay.hop_bonds(g, 0, full);
    layer_b();
    lay.hop_bonds(g, 1, full);
    layer_c();
    check_interleaved(lay);
    onsite();
  } else {
    const double half = 0.5 * full;
    layer_a();
    lay.hop_bonds(g, 0, half);
    layer_b();
    lay.hop_bonds(g, 1, half);
    layer_c();
    check_interleaved(lay);
    onsite();
    layer_c();
    lay.hop_bonds(g, 1, half);
    layer_b();
    lay.hop_bonds(g, 0, half);
    layer_a();
    check_interleaved(lay);
  }
  return g;
}

std::vector<Gate> all_up_all_down_step(const FermiHubbardModel& model, double dt, TrotterOrder order) {
  const int L = model.L;
  std::vector<Gate> g;
  auto hops = [&](int parity, double angle) {
    for (int i = parity; i + 1 < L; i += 2) {
      g.push_back(Gate::pair(GateKind::Hopping, i, i + 1, angle));
      g.push_back(Gate::pair(GateKind::Hopping, L + i, L + i + 1, angle));
    }
  };
  auto onsite = [&] {
    for (int i = 0; i < L; ++i) g.push_back(Gate::pair(GateKind::Onsite, i, L + i, model.U * dt));
  };
  const double full = -model.J * dt;
  if (order == TrotterOrder::First) {
    hops(0, full);
    hops(1, full);
    onsite();
  } else {
    hops(0, 0.5 * full);
    hops(1, 0.5 * full);
    onsite();
    hops(1, 0.5 * full);
    hops(0, 0.5 * full);
  }
  return g;
}

}  // namespace

std::vector<Gate> build_reorder_network(int L) {
  ModeLayout lay = ModeLayout::all_up_all_down(L);
  std::vector<Gate> g;
  for (int k = 1; k < L; ++k)
    for (int j = 0; j < k; ++j) lay.fswap(g, L - k + 2 * j);
  check_interleaved(lay);
  return g;
}

Gate build_quench(int L, double theta) {
  const int j = L / 2;
  return Gate::pair(GateKind::Quench, 2 * j, 2 * j + 1, theta);
}

std::vector<Gate> build_quench_all_up_all_down(int L, double theta) {
  const int j = L / 2;
  std::vector<Gate> g;
  for (int q = L + j - 1; q >= j + 1; --q) g.push_back(Gate::pair(GateKind::FSwap, q, q + 1));
  g.push_back(Gate::pair(GateKind::Quench, j, j + 1, theta));
  for (int q = j + 1; q <= L + j - 1; ++q) g.push_back(Gate::pair(GateKind::FSwap, q, q + 1));
  return g;
}

std::vector<Gate> build_trotter_step(const FermiHubbardModel& model, double dt, OrderingKind ordering,
                                     const TrotterConfig& config) {
  model.validate();
  return ordering == OrderingKind::Interleaved ? interleaved_step(model, dt, config.order)
                                               : all_up_all_down_step(model, dt, config.order);
}

std::vector<Gate> build_measurement_basis(int L) {
  std::vector<Gate> g;
  for (int i = 0; i < L; ++i) g.push_back(Gate::pair(GateKind::BasisXY, 2 * i, 2 * i + 1));
  return g;
}

ProtocolCircuit build_full_circuit(const FermiHubbardModel& model, const Preparation& prep,
                                   const TrotterConfig& config, double T, const CircuitLayout& layout,
                                   double theta) {
  model.validate();
  if (prep.up.L != model.L || prep.down.L != model.L)
    throw std::invalid_argument("build_full_circuit: preparation built for a different L");
  if (config.n_trotter < 1) throw std::invalid_argument("build_full_circuit: n_trotter must be >= 1");
  if (T < 0) throw std::invalid_argument("build_full_circuit: T must be non-negative");
  const int L = model.L;
  ProtocolCircuit c;
  c.meta.model = model;
  c.meta.T = T;
  c.meta.trotter = config;
  c.meta.dt = T / config.n_trotter;
  c.meta.theta = theta;
  c.meta.quench_site = L / 2;
  c.meta.layout = layout;

  const auto AU = OrderingKind::AllUpAllDown;
  const auto IL = OrderingKind::Interleaved;
  c.segments.push_back({SegmentKind::InitialState, network_gates(prep.up, prep.down), AU});
  if (layout.ordering == IL) {
    c.segments.push_back({SegmentKind::ReorderFswaps, build_reorder_network(L), IL});
    c.segments.push_back({SegmentKind::Quench, {build_quench(L, theta)}, IL});
    for (int s = 0; s < config.n_trotter; ++s)
      c.segments.push_back({SegmentKind::TrotterStep, build_trotter_step(model, c.meta.dt, IL, config), IL});
    c.segments.push_back({SegmentKind::MeasureBasis, build_measurement_basis(L), IL});
  } else {
    c.segments.push_back({SegmentKind::Quench, build_quench_all_up_all_down(L, theta), AU});
    for (int s = 0; s < config.n_trotter; ++s)
      c.segments.push_back({SegmentKind::TrotterStep, build_trotter_step(model, c.meta.dt, AU, config), AU});
    if (layout.final_fswap) {
      c.segments.push_back({SegmentKind::ReorderFswaps, build_reorder_network(L), IL});
      c.segments.push_back({SegmentKind::MeasureBasis, build_measurement_basis(L), IL});
    } else {
      // high-weight Pauli strings measured directly; no particle-number post-selection possible
      c.segments.push_back({SegmentKind::MeasureBasis, {}, AU});
      c.meta.pair_measurement = false;
    }
  }
  return c;
}

QuenchedState quench_state(const FermiHubbardModel& model, Statevector initial, const CircuitLayout& layout,
                           double theta) {
  if (initial.n_qubits() != 2 * model.L) throw std::invalid_argument("quench_state: register mismatch");
  if (layout.ordering == OrderingKind::Interleaved) {
    initial.apply(build_reorder_network(model.L));
    initial.apply(build_quench(model.L, theta));
  } else {
    initial.apply(build_quench_all_up_all_down(model.L, theta));
  }
  return {std::move(initial), layout.ordering, layout.final_fswap};
}

QuenchedState prepare_quenched_state(const FermiHubbardModel& model, const Preparation& prep,
                                     const CircuitLayout& layout, double theta) {
  return quench_state(model, prepare_state(prep.up, prep.down), layout, theta);
}

std::vector<Gate> evolution_gates(const FermiHubbardModel& model, double t, double T, OrderingKind ordering,
                                  const TrotterConfig& config) {
  if (config.n_trotter < 1) throw std::invalid_argument("evolution_gates: n_trotter must be >= 1");
  int steps = config.n_trotter;
  double dt = t / config.n_trotter;
  if (config.fixed_step) {
    dt = T / config.n_trotter;
    steps = static_cast<int>(std::lround(t / dt));
  }
  std::vector<Gate> out;
  if (steps == 0) return out;
  const auto step = build_trotter_step(model, dt, ordering, config);
  out.reserve(step.size() * static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) out.insert(out.end(), step.begin(), step.end());
  return out;
}

std::vector<double> measure_spin_x(const Statevector& state, OrderingKind ordering, int L, double* imag_residue) {
  const QubitOrdering ord(ordering, L);
  std::vector<double> out;
  double worst = 0.0;
  for (int i = 0; i < L; ++i) {
    double res = 0.0;
    out.push_back(expectation(state, spin_x_observable(ord, i), res));
    worst = std::max(worst, res);
  }
  if (imag_residue) *imag_residue = worst;
  return out;
}

std::vector<double> estimate_spin_x(std::span<const ShotRecord> records, int L) {
  std::vector<double> out(static_cast<std::size_t>(L), 0.0);
  const std::uint64_t total = total_shots(records);
  if (total == 0) return out;
  for (const auto& r : records) {
    for (int i = 0; i < L; ++i) {
      const bool b0 = (r.bits >> (2 * i)) & 1U;
      const bool b1 = (r.bits >> (2 * i + 1)) & 1U;
      if (!b0 && b1) out[static_cast<std::size_t>(i)] += static_cast<double>(r.count);
      if (b0 && !b1) out[static_cast<std::size_t>(i)] -= static_cast<double>(r.count);
    }
  }
  for (auto& v : out) v /= static_cast<double>(total);
  return out;
}

namespace {

void check_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("run_protocol: empty time grid");
  for (std::size_t m = 0; m < times.size(); ++m) {
    if (times[m] < 0) throw std::invalid_argument("run_protocol: negative time");
    if (m && times[m] < times[m - 1]) throw std::invalid_argument("run_protocol: times must be ascending");
  }
}

}  // namespace

ProtocolRun run_protocol(const FermiHubbardModel& model, const QuenchedState& start, const TrotterConfig& config,
                         double T, std::span<const double> times, const ExecutionConfig& exec) {
  model.validate();
  check_times(times);
  const int L = model.L;
  const auto M = static_cast<Eigen::Index>(times.size());
  ProtocolRun run;
  run.series.times.assign(times.begin(), times.end());
  run.series.values.resize(L, M);
  run.series.provenance = "protocol/" + to_string(exec.mode) + "/" + to_string(start.ordering);

  if (exec.mode == ExecutionMode::ExactPropagator) {
    const SectorBasis basis(2 * L, model.Ne);
    const QubitOrdering ord(start.ordering, L);
    const SparseMatrix h = sector_matrix(hubbard_hamiltonian(model, ord), basis);
    std::vector<SparseMatrix> sx;
    for (int i = 0; i < L; ++i) sx.push_back(sector_matrix(spin_x_observable(ord, i), basis));
    Vector v = restrict_to(start.state, basis);
    double t_prev = 0.0;
    for (Eigen::Index m = 0; m < M; ++m) {
      const double t = times[static_cast<std::size_t>(m)];
      if (t > t_prev) v = krylov_expm(h, v, t - t_prev, 1e-12);
      t_prev = t;
      double worst = 0.0;
      for (int i = 0; i < L; ++i) {
        const cplx e = v.dot(sx[static_cast<std::size_t>(i)] * v);
        run.series.values(i, m) = e.real();
        worst = std::max(worst, std::abs(e.imag()));
      }
      run.max_imag_residue.push_back(worst);
      run.particle_number.push_back(static_cast<double>(model.Ne) * v.squaredNorm());
    }
    return run;
  }

  if (exec.mode == ExecutionMode::Sampled && start.ordering == OrderingKind::AllUpAllDown && !start.final_fswap)
    throw std::invalid_argument("sampled mode needs the final FSWAP network for pair measurements");

  for (Eigen::Index m = 0; m < M; ++m) {
    const double t = times[static_cast<std::size_t>(m)];
    Statevector s = start.state;
    s.apply(evolution_gates(model, t, T, start.ordering, config));
    if (exec.mode == ExecutionMode::Exact) {
      double res = 0.0;
      const auto sx = measure_spin_x(s, start.ordering, L, &res);
      for (int i = 0; i < L; ++i) run.series.values(i, m) = sx[static_cast<std::size_t>(i)];
      run.max_imag_residue.push_back(res);
      run.particle_number.push_back(particle_number(s));
      continue;
    }
    if (start.ordering == OrderingKind::AllUpAllDown) s.apply(build_reorder_network(L));
    s.apply(build_measurement_basis(L));
    auto records = sample(s, exec.shots, derive_seed(exec.seed, 0, static_cast<std::uint64_t>(m)));
    std::vector<double> sx;
    if (exec.postselect) {
      const PostSelection ps = postselect_particle_number(records, model.Ne);
      run.kept_fraction.push_back(ps.kept_fraction);
      if (ps.empty) run.empty_postselection = true;
      sx = estimate_spin_x(ps.records, L);  // zeros when nothing survives
      run.records.push_back(ps.records);
    } else {
      run.kept_fraction.push_back(1.0);
      sx = estimate_spin_x(records, L);
      run.records.push_back(std::move(records));
    }
    for (int i = 0; i < L; ++i) run.series.values(i, m) = sx[static_cast<std::size_t>(i)];
  }
  return run;
}

ProtocolRun run_protocol(const FermiHubbardModel& model, const Preparation& prep, const TrotterConfig& config,
                         double T, std::span<const double> times, const ExecutionConfig& exec,
                         const CircuitLayout& layout) {
  return run_protocol(model, prepare_quenched_state(model, prep, layout), config, T, times, exec);
}

void write_circuit(std::ostream& os, const ProtocolCircuit& circuit) {
  const auto& m = circuit.meta;
  os.precision(17);
  os << "# L=" << m.model.L << " Ne=" << m.model.Ne << " J=" << m.model.J << " U=" << m.model.U << " T=" << m.T
     << " n_trotter=" << m.trotter.n_trotter << " order=" << to_string(m.trotter.order) << " dt=" << m.dt
     << " theta=" << m.theta << " quench_site=" << m.quench_site << " ordering=" << to_string(m.layout.ordering)
     << "\n";
  for (const auto& seg : circuit.segments) {
    os << "# segment " << to_string(seg.kind) << " ordering=" << to_string(seg.ordering_after) << "\n";
    for (const auto& g : seg.gates) {
      os << gate_name(g.kind) << ' ' << g.qubits[0];
      if (g.arity() == 2) os << ' ' << g.qubits[1];
      for (int p = 0; p < gate_param_count(g.kind); ++p) os << ' ' << g.params[static_cast<std::size_t>(p)];
      os << "\n";
    }
  }
}

std::vector<Gate> read_circuit_gates(std::istream& is) {
  std::vector<Gate> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    Gate g;
    g.kind = gate_kind_from_name(name);
    ss >> g.qubits[0];
    if (g.arity() == 2) ss >> g.qubits[1];
    for (int p = 0; p < gate_param_count(g.kind); ++p) ss >> g.params[static_cast<std::size_t>(p)];
    if (!ss) throw std::runtime_error("read_circuit_gates: malformed line '" + line + "'");
    out.push_back(g);
  }
  return out;
}

}  // namespace qspec
