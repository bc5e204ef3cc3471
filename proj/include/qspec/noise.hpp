#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qspec/gates.hpp"
#include "qspec/lattice.hpp"
#include "qspec/protocol.hpp"
#include "qspec/statevector.hpp"

namespace qspec {

struct NoiseModel {
  std::vector<double> bit_flip;        // per qubit, just before measurement; empty means none
  double two_qubit_depolarizing = 0.0;  // after every two-qubit gate
  double readout_flip = 0.0;            // symmetric, after the basis change
  double coherent_rx = 0.0;             // Rx over-rotation on both targets of every two-qubit gate
  bool twirling = false;
  bool exact_channel = true;            // bit flips by explicit channel sum in exact mode
  int trajectories = 64;
  std::uint64_t rng_seed = 1;

  void validate(int n_qubits) const;
  bool has_gate_noise() const { return two_qubit_depolarizing > 0 || coherent_rx != 0.0 || twirling; }
  bool has_bit_flips() const;
  bool is_noiseless() const { return !has_gate_noise() && !has_bit_flips() && readout_flip == 0.0; }
};

// Same flip probability on the two qubits of every site: eps_site / 2 each, so the
// pair estimator is damped by 1 - eps_site.
std::vector<double> site_bit_flips(int L, double eps_site);

// Tr(O Omega(rho)) with Omega(rho) = (1 - sum eps) rho + sum eps_i X_i rho X_i, rho = |psi><psi|.
double bit_flip_channel_expectation(const Statevector& state, const PauliSum& observable,
                                    std::span<const double> eps);

// Draws an independent flip for every qubit and applies X where it fires.
void apply_bit_flip_trajectory(Statevector& state, std::span<const double> eps, std::mt19937_64& rng);

// Every shot flips each bit independently with probability eps_i.
std::vector<ShotRecord> apply_bit_flip_channel(std::span<const ShotRecord> records, std::span<const double> eps,
                                               std::uint64_t seed);
std::vector<ShotRecord> apply_readout_error(std::span<const ShotRecord> records, double r, int n_qubits,
                                            std::uint64_t seed);

// Combines duplicates; sorted by bitstring.
std::vector<ShotRecord> merge_records(std::vector<ShotRecord> records);
// counts[n] = shots with n set bits
std::vector<std::uint64_t> particle_number_histogram(std::span<const ShotRecord> records, int n_qubits);

// Pauli letters 0..3 = I, X, Y, Z on (q0, q1).
using PauliPair = std::array<int, 2>;

struct TwirlFrame {
  PauliPair before;
  PauliPair after;  // after * U * before equals U up to a global phase
};

// All frames leaving this gate instance invariant. Throws for two-qubit gates with
// only the identity frame.
std::vector<TwirlFrame> twirl_frames(const Gate& gate);
std::vector<Gate> twirl_gates(std::span<const Gate> gates, std::mt19937_64& rng);

// Gate sequence with noise: optional twirl frames, coherent over-rotation and
// depolarizing kicks after each two-qubit gate.
void apply_noisy(Statevector& state, std::span<const Gate> gates, const NoiseModel& noise, std::mt19937_64& rng);

// Protocol execution with a noise model. threads > 1 spreads time points over workers.
ProtocolRun run_noisy_protocol(const FermiHubbardModel& model, const QuenchedState& start,
                               const TrotterConfig& config, double T, std::span<const double> times,
                               const ExecutionConfig& exec, const NoiseModel& noise, int threads = 1);

}  // namespace qspec
