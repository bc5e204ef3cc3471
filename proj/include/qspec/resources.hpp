#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qspec/gates.hpp"
#include "qspec/protocol.hpp"

namespace qspec {

// Two-qubit cost of a named gate in CNOT units; single-qubit gates cost nothing.
struct GateCost {
  int depth = 0;
  int count = 0;
};
GateCost two_qubit_cost(GateKind kind);

struct SegmentCost {
  std::string name;  // prep, reorder, quench, trotter, final_reorder, measure
  int depth = 0;
  int gates = 0;
  bool operator==(const SegmentCost&) const = default;
};

struct ResourceReport {
  int two_qubit_depth = 0;
  int two_qubit_gates = 0;
  std::vector<SegmentCost> breakdown;
  bool post_selection_available = true;
};

// Closed forms for the interleaved layout with a DGA preparation.
ResourceReport estimate_interleaved(int L, int n_trotter, int n_layers);
// (all up)(all down) layout. Ne only enters the gate count of the exact preparation.
ResourceReport estimate_all_up_all_down(int L, int n_trotter, int n_layers, bool final_fswap, bool exact_prep,
                                        int Ne);

// Greedy ASAP layering of the built circuit; segments are separated by barriers and
// consecutive Trotter steps are merged into one "trotter" entry.
ResourceReport walk_circuit(const ProtocolCircuit& circuit);
ResourceReport walk_gates(const std::vector<Gate>& gates, int n_qubits);

struct ResourceMismatch {
  std::string segment;
  SegmentCost formula;
  SegmentCost walked;
};
// First segment where the two reports disagree, if any.
std::optional<ResourceMismatch> compare_reports(const ResourceReport& formula, const ResourceReport& walked);

struct TableRow {
  int L = 0;
  int n_trotter = 0;
  int n_layers = 0;
  int Ne = 0;
  double T = 0.0;
};
// The four hardware configurations.
std::vector<TableRow> hardware_rows();

void write_resource_table(std::ostream& os, const std::vector<TableRow>& rows, bool csv);

}  // namespace qspec
