#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qspec/gates.hpp"
#include "qspec/lattice.hpp"
#include "qspec/spectroscopy.hpp"
#include "qspec/state_prep.hpp"
#include "qspec/statevector.hpp"

namespace qspec {

enum class SegmentKind { InitialState, ReorderFswaps, Quench, TrotterStep, MeasureBasis };
std::string to_string(SegmentKind kind);

struct Segment {
  SegmentKind kind = SegmentKind::InitialState;
  std::vector<Gate> gates;
  OrderingKind ordering_after = OrderingKind::AllUpAllDown;
};

enum class TrotterOrder { First, Second };
std::string to_string(TrotterOrder order);
TrotterOrder trotter_order_from_string(const std::string& name);

struct TrotterConfig {
  TrotterOrder order = TrotterOrder::First;
  int n_trotter = 5;
  // Fixed step length T / n_trotter at every time instead of a fixed step count.
  bool fixed_step = false;
};

struct CircuitLayout {
  OrderingKind ordering = OrderingKind::Interleaved;
  // (all up)(all down) only: reorder to interleaved before the basis change.
  bool final_fswap = true;
};

// Initial-state networks on the (all up)(all down) register, one per spin sector.
struct Preparation {
  GivensNetwork up;
  GivensNetwork down;
  std::string label;
};

Preparation exact_preparation(const FermiHubbardModel& model);
Preparation dga_preparation(const DgaAnsatz& ansatz);

struct ProtocolMetadata {
  FermiHubbardModel model;
  double T = 0.0;
  TrotterConfig trotter;
  double dt = 0.0;
  double theta = 0.0;
  int quench_site = 0;
  CircuitLayout layout;
  // measurement is interleaved-local (B_XY on adjacent pairs)
  bool pair_measurement = true;
};

struct ProtocolCircuit {
  std::vector<Segment> segments;
  ProtocolMetadata meta;

  std::vector<Gate> gates() const;
  std::vector<OrderingKind> ordering_timeline() const;
  OrderingKind final_ordering() const;
};

inline constexpr double kQuenchAngle = 0.7853981633974483;  // pi / 4

std::vector<Gate> build_reorder_network(int L);
// Quench(theta) on the qubit pair of site floor(L/2) in the interleaved ordering.
Gate build_quench(int L, double theta = kQuenchAngle);
// In (all up)(all down): FSWAP chain bringing the down mode next to the up mode, quench, chain back.
std::vector<Gate> build_quench_all_up_all_down(int L, double theta = kQuenchAngle);
// Single first- or second-order step of length dt in the given ordering.
std::vector<Gate> build_trotter_step(const FermiHubbardModel& model, double dt, OrderingKind ordering,
                                     const TrotterConfig& config);
std::vector<Gate> build_measurement_basis(int L);

ProtocolCircuit build_full_circuit(const FermiHubbardModel& model, const Preparation& prep,
                                   const TrotterConfig& config, double T, const CircuitLayout& layout = {},
                                   double theta = kQuenchAngle);

enum class ExecutionMode { Exact, Sampled, ExactPropagator };
std::string to_string(ExecutionMode mode);
ExecutionMode execution_mode_from_string(const std::string& name);

struct ExecutionConfig {
  ExecutionMode mode = ExecutionMode::Exact;
  std::uint64_t shots = 4096;
  std::uint64_t seed = 1;
  bool postselect = true;
};

struct ProtocolRun {
  TimeSeriesGrid series;
  std::vector<double> kept_fraction;   // per time point, sampled mode
  std::vector<double> max_imag_residue;  // per time point, exact mode
  std::vector<double> particle_number;   // <N> after evolution, exact modes
  std::vector<std::vector<ShotRecord>> records;  // kept shots per time point, sampled mode
  bool empty_postselection = false;
};

// State right after the quench (and its ordering), shared by every time point.
struct QuenchedState {
  Statevector state;
  OrderingKind ordering;
  bool final_fswap = true;
};

QuenchedState prepare_quenched_state(const FermiHubbardModel& model, const Preparation& prep,
                                     const CircuitLayout& layout, double theta = kQuenchAngle);
// Same, starting from an arbitrary state given on the (all up)(all down) register.
QuenchedState quench_state(const FermiHubbardModel& model, Statevector initial, const CircuitLayout& layout,
                           double theta = kQuenchAngle);

// Trotter gates evolving to time t under the configured step policy (fixed count by default).
std::vector<Gate> evolution_gates(const FermiHubbardModel& model, double t, double T, OrderingKind ordering,
                                  const TrotterConfig& config);

// Per-site <S^x_i> in the given ordering; imag_residue receives the max discarded imaginary part.
std::vector<double> measure_spin_x(const Statevector& state, OrderingKind ordering, int L,
                                   double* imag_residue = nullptr);
// Pair estimator (count01 - count10) / kept after B_XY on interleaved pairs.
std::vector<double> estimate_spin_x(std::span<const ShotRecord> records, int L);

ProtocolRun run_protocol(const FermiHubbardModel& model, const QuenchedState& start, const TrotterConfig& config,
                         double T, std::span<const double> times, const ExecutionConfig& exec = {});
ProtocolRun run_protocol(const FermiHubbardModel& model, const Preparation& prep, const TrotterConfig& config,
                         double T, std::span<const double> times, const ExecutionConfig& exec = {},
                         const CircuitLayout& layout = {});

void write_circuit(std::ostream& os, const ProtocolCircuit& circuit);
// Gate lines only; segment comments are skipped.
std::vector<Gate> read_circuit_gates(std::istream& is);

}  // namespace qspec
