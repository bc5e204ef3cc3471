#include "qspec/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

#include "qspec/parallel.hpp"

namespace qspec {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1/2]");
}

}  // namespace

void NoiseModel::validate(int n_qubits) const {
  if (!bit_flip.empty() && static_cast<int>(bit_flip.size()) != n_qubits)
    throw std::invalid_argument("noise.bit_flip needs one entry per qubit");
  for (double e : bit_flip) check_probability(e, "noise.bit_flip");
  check_probability(two_qubit_depolarizing, "noise.two_qubit_depolarizing");
  check_probability(readout_flip, "noise.readout_flip");
  if (trajectories < 1) throw std::invalid_argument("noise.trajectories must be >= 1");
  double total = 0.0;
  for (double e : bit_flip) total += e;
  if (exact_channel && total > 1.0) throw std::invalid_argument("noise.bit_flip: channel weights exceed one");
}

bool NoiseModel::has_bit_flips() const {
  return std::any_of(bit_flip.begin(), bit_flip.end(), [](double e) { return e > 0.0; });
}

std::vector<double> site_bit_flips(int L, double eps_site) {
  return std::vector<double>(static_cast<std::size_t>(2 * L), 0.5 * eps_site);
}

double bit_flip_channel_expectation(const Statevector& state, const PauliSum& observable,
                                    std::span<const double> eps) {
  if (static_cast<int>(eps.size()) != state.n_qubits())
    throw std::invalid_argument("bit_flip_channel_expectation: one probability per qubit");
  double total = 0.0;
  for (double e : eps) total += e;
  double value = (1.0 - total) * expectation(state, observable);
  for (std::size_t q = 0; q < eps.size(); ++q) {
    if (eps[q] == 0.0) continue;
    value += eps[q] * expectation(apply_gate(state, Gate::single(GateKind::X, static_cast<int>(q))), observable);
  }
  return value;
}

void apply_bit_flip_trajectory(Statevector& state, std::span<const double> eps, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t q = 0; q < eps.size(); ++q)
    if (uni(rng) < eps[q]) state.apply(Gate::single(GateKind::X, static_cast<int>(q)));
}

std::vector<ShotRecord> merge_records(std::vector<ShotRecord> records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.bits < b.bits; });
  std::vector<ShotRecord> out;
  for (const auto& r : records) {
    if (r.count == 0) continue;
    if (!out.empty() && out.back().bits == r.bits)
      out.back().count += r.count;
    else
      out.push_back(r);
  }
  return out;
}

namespace {

template <class FlipProb>
std::vector<ShotRecord> flip_shots(std::span<const ShotRecord> records, int n_qubits, std::uint64_t seed,
                                   FlipProb prob) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<ShotRecord> out;
  for (const auto& r : records) {
    for (std::uint64_t s = 0; s < r.count; ++s) {
      std::uint64_t bits = r.bits;
      for (int q = 0; q < n_qubits; ++q)
        if (uni(rng) < prob(q)) bits ^= std::uint64_t{1} << q;
      out.push_back({bits, 1});
    }
  }
  return merge_records(std::move(out));
}

}  // namespace

std::vector<ShotRecord> apply_bit_flip_channel(std::span<const ShotRecord> records, std::span<const double> eps,
                                               std::uint64_t seed) {
  if (std::all_of(eps.begin(), eps.end(), [](double e) { return e == 0.0; }))
    return std::vector<ShotRecord>(records.begin(), records.end());
  return flip_shots(records, static_cast<int>(eps.size()), seed,
                    [&](int q) { return eps[static_cast<std::size_t>(q)]; });
}

std::vector<ShotRecord> apply_readout_error(std::span<const ShotRecord> records, double r, int n_qubits,
                                            std::uint64_t seed) {
  check_probability(r, "readout flip");
  if (r == 0.0) return std::vector<ShotRecord>(records.begin(), records.end());
  return flip_shots(records, n_qubits, seed, [r](int) { return r; });
}

std::vector<std::uint64_t> particle_number_histogram(std::span<const ShotRecord> records, int n_qubits) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n_qubits + 1), 0);
  for (const auto& r : records) counts[static_cast<std::size_t>(std::popcount(r.bits))] += r.count;
  return counts;
}

namespace {

Matrix2 pauli_matrix(int letter) {
  Matrix2 m;
  switch (letter) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cplx{0, -1}, cplx{0, 1}, 0; break;
    default: m << 1, 0, 0, -1; break;
  }
  return m;
}

Matrix4 pauli_pair_matrix(const PauliPair& p) {
  // local index 2 * bit(q0) + bit(q1): q0 is the high factor
  const Matrix2 a = pauli_matrix(p[0]), b = pauli_matrix(p[1]);
  Matrix4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}

constexpr std::array<GateKind, 4> kPauliGate{GateKind::X, GateKind::X, GateKind::Y, GateKind::Z};

void push_pauli(std::vector<Gate>& out, const PauliPair& p, const Gate& g) {
  for (int s = 0; s < 2; ++s)
    if (p[static_cast<std::size_t>(s)] != 0)
      out.push_back(Gate::single(kPauliGate[static_cast<std::size_t>(p[static_cast<std::size_t>(s)])],
                                 g.qubits[static_cast<std::size_t>(s)]));
}

const std::vector<TwirlFrame>& cached_frames(const Gate& g) {
  using Key = std::tuple<int, double, double, double>;
  thread_local std::map<Key, std::vector<TwirlFrame>> cache;
  const Key key{static_cast<int>(g.kind), g.params[0], g.params[1], g.params[2]};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, twirl_frames(g)).first;
  return it->second;
}

}  // namespace

std::vector<TwirlFrame> twirl_frames(const Gate& gate) {
  if (gate.arity() != 2) throw std::invalid_argument("twirl_frames: single-qubit gate");
  const Matrix4 u = two_qubit_matrix(gate);
  std::vector<TwirlFrame> frames;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const PauliPair before{a, b};
      const Matrix4 conj = u * pauli_pair_matrix(before) * u.adjoint();
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          const PauliPair after{c, d};
          const cplx overlap = (pauli_pair_matrix(after).adjoint() * conj).trace() / 4.0;
          if (std::abs(std::abs(overlap) - 1.0) < 1e-9) frames.push_back({before, after});
        }
    }
  if (frames.size() < 2)
    throw std::invalid_argument("gate " + gate_name(gate.kind) + " has no non-trivial Pauli twirl frame");
  return frames;
}

std::vector<Gate> twirl_gates(std::span<const Gate> gates, std::mt19937_64& rng) {
  std::vector<Gate> out;
  out.reserve(gates.size() * 3);
  for (const auto& g : gates) {
    if (g.arity() != 2) {
      out.push_back(g);
      continue;
    }
    const auto& frames = cached_frames(g);
    std::uniform_int_distribution<std::size_t> pick(0, frames.size() - 1);
    const TwirlFrame& f = frames[pick(rng)];
    push_pauli(out, f.before, g);
    out.push_back(g);
    push_pauli(out, f.after, g);
  }
  return out;
}

void apply_noisy(Statevector& state, std::span<const Gate> gates, const NoiseModel& noise, std::mt19937_64& rng) {
  if (!noise.has_gate_noise()) {
    state.apply(gates);
    return;
  }
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> kick(1, 15);
  for (const auto& g : gates) {
    if (g.arity() != 2) {
      state.apply(g);
      continue;
    }
    const TwirlFrame* frame = nullptr;
    if (noise.twirling) {
      const auto& frames = cached_frames(g);
      std::uniform_int_distribution<std::size_t> pick(0, frames.size() - 1);
      frame = &frames[pick(rng)];
      for (int s = 0; s < 2; ++s)
        if (frame->before[static_cast<std::size_t>(s)])
          state.apply(Gate::single(kPauliGate[static_cast<std::size_t>(frame->before[static_cast<std::size_t>(s)])],
                                   g.qubits[static_cast<std::size_t>(s)]));
    }
    state.apply(g);
    if (noise.coherent_rx != 0.0) {
      state.apply(Gate::single(GateKind::Rx, g.qubits[0], noise.coherent_rx));
      state.apply(Gate::single(GateKind::Rx, g.qubits[1], noise.coherent_rx));
    }
    if (noise.two_qubit_depolarizing > 0 && uni(rng) < noise.two_qubit_depolarizing) {
      const int p = kick(rng);
      for (int s = 0; s < 2; ++s) {
        const int letter = s == 0 ? p / 4 : p % 4;
        if (letter) state.apply(Gate::single(kPauliGate[static_cast<std::size_t>(letter)], g.qubits[static_cast<std::size_t>(s)]));
      }
    }
    if (frame)
      for (int s = 0; s < 2; ++s)
        if (frame->after[static_cast<std::size_t>(s)])
          state.apply(Gate::single(kPauliGate[static_cast<std::size_t>(frame->after[static_cast<std::size_t>(s)])],
                                   g.qubits[static_cast<std::size_t>(s)]));
  }
}

ProtocolRun run_noisy_protocol(const FermiHubbardModel& model, const QuenchedState& start,
                               const TrotterConfig& config, double T, std::span<const double> times,
                               const ExecutionConfig& exec, const NoiseModel& noise, int threads) {
  model.validate();
  noise.validate(model.n_qubits());
  if (exec.mode == ExecutionMode::ExactPropagator) {
    if (!noise.is_noiseless()) throw std::invalid_argument("the exact propagator does not take a noise model");
    return run_protocol(model, start, config, T, times, exec);
  }
  if (exec.mode == ExecutionMode::Sampled && start.ordering == OrderingKind::AllUpAllDown && !start.final_fswap)
    throw std::invalid_argument("sampled mode needs the final FSWAP network for pair measurements");
  if (times.empty()) throw std::invalid_argument("run_protocol: empty time grid");
  for (std::size_t m = 0; m < times.size(); ++m)
    if (times[m] < 0 || (m && times[m] < times[m - 1]))
      throw std::invalid_argument("run_protocol: times must be non-negative and ascending");

  const int L = model.L;
  const std::size_t M = times.size();
  const bool stochastic_flips = noise.has_bit_flips() && !(exec.mode == ExecutionMode::Exact && noise.exact_channel);
  const int n_traj = (noise.has_gate_noise() || stochastic_flips) ? noise.trajectories : 1;
  const QubitOrdering ord(start.ordering, L);

  ProtocolRun run;
  run.series.times.assign(times.begin(), times.end());
  run.series.values = Eigen::MatrixXd::Zero(L, static_cast<Eigen::Index>(M));
  run.series.provenance = "protocol/" + to_string(exec.mode) + "/" + to_string(start.ordering) +
                          (noise.is_noiseless() ? "" : "/noisy");
  std::vector<double> kept(M, 0.0), residue(M, 0.0), number(M, 0.0);
  std::vector<char> empty(M, 0);
  std::vector<std::vector<ShotRecord>> kept_records(M);

  parallel_for(M, threads, [&](std::size_t m) {
    const auto gates = evolution_gates(model, times[m], T, start.ordering, config);
    std::vector<ShotRecord> records;
    for (int t = 0; t < n_traj; ++t) {
      std::mt19937_64 rng(derive_seed(noise.rng_seed, static_cast<std::uint64_t>(t), m));
      Statevector s = start.state;
      apply_noisy(s, gates, noise, rng);
      if (exec.mode == ExecutionMode::Exact) {
        if (stochastic_flips) apply_bit_flip_trajectory(s, noise.bit_flip, rng);
        for (int i = 0; i < L; ++i) {
          const PauliSum sx = spin_x_observable(ord, i);
          double v = 0.0, res = 0.0;
          if (noise.has_bit_flips() && noise.exact_channel)
            v = bit_flip_channel_expectation(s, sx, noise.bit_flip);
          else
            v = expectation(s, sx, res);
          run.series.values(i, static_cast<Eigen::Index>(m)) += v / n_traj;
          residue[m] = std::max(residue[m], res);
        }
        number[m] += particle_number(s) / n_traj;
        continue;
      }
      if (noise.has_bit_flips()) apply_bit_flip_trajectory(s, noise.bit_flip, rng);
      if (start.ordering == OrderingKind::AllUpAllDown) s.apply(build_reorder_network(L));
      s.apply(build_measurement_basis(L));
      const std::uint64_t share =
          exec.shots / n_traj + (static_cast<std::uint64_t>(t) < exec.shots % n_traj ? 1 : 0);
      auto shot = sample(s, share, derive_seed(exec.seed, static_cast<std::uint64_t>(t), m));
      if (noise.readout_flip > 0)
        shot = apply_readout_error(shot, noise.readout_flip, model.n_qubits(),
                                   derive_seed(noise.rng_seed ^ 0x5eedf11bULL, static_cast<std::uint64_t>(t), m));
      records.insert(records.end(), shot.begin(), shot.end());
    }
    if (exec.mode == ExecutionMode::Exact) {
      // symmetric readout flips scale the pair estimator by (1 - r)^2 - r^2
      if (noise.readout_flip > 0) run.series.values.col(static_cast<Eigen::Index>(m)) *= 1.0 - 2.0 * noise.readout_flip;
      return;
    }
    if (n_traj > 1) records = merge_records(std::move(records));
    std::vector<double> sx;
    if (exec.postselect) {
      const PostSelection ps = postselect_particle_number(records, model.Ne);
      kept[m] = ps.kept_fraction;
      empty[m] = ps.empty;
      sx = estimate_spin_x(ps.records, L);
      kept_records[m] = ps.records;
    } else {
      kept[m] = 1.0;
      sx = estimate_spin_x(records, L);
      kept_records[m] = std::move(records);
    }
    for (int i = 0; i < L; ++i) run.series.values(i, static_cast<Eigen::Index>(m)) = sx[static_cast<std::size_t>(i)];
  });

  if (exec.mode == ExecutionMode::Exact) {
    run.max_imag_residue = residue;
    run.particle_number = number;
  } else {
    run.kept_fraction = kept;
    run.records = std::move(kept_records);
    run.empty_postselection = std::any_of(empty.begin(), empty.end(), [](char c) { return c != 0; });
  }
  return run;
}

}  // namespace qspec
