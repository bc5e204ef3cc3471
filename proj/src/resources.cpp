#include "qspec/resources.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace qspec {

GateCost two_qubit_cost(GateKind kind) {
  switch (kind) {
    case GateKind::CNot:
    case GateKind::ControlledH: return {1, 1};
    // one CNOT-equivalent layer pair but counted as a single two-qubit gate
    case GateKind::Givens: return {2, 1};
    case GateKind::NGate:
    case GateKind::Hopping:
    case GateKind::FSwap:
    case GateKind::Onsite:
    case GateKind::Quench: return {2, 2};
    case GateKind::BasisXY: return {3, 3};
    default: return {0, 0};
  }
}

namespace {

void require_positive(int L, int n_trotter, int n_layers) {
  if (L < 2 || n_trotter < 1 || n_layers < 1)
    throw std::invalid_argument("resource estimate needs L >= 2 and positive step / layer counts");
}

ResourceReport from_breakdown(std::vector<SegmentCost> segs) {
  ResourceReport r;
  for (const auto& s : segs) {
    r.two_qubit_depth += s.depth;
    r.two_qubit_gates += s.gates;
  }
  r.breakdown = std::move(segs);
  return r;
}

}  // namespace

ResourceReport estimate_interleaved(int L, int n_trotter, int n_layers) {
  require_positive(L, n_trotter, n_layers);
  const int N = n_trotter, n = n_layers;
  ResourceReport r = from_breakdown({{"prep", 4 * n, 2 * (L - 1) * n},
                                     {"reorder", 2 * (L - 1), L * L - L},
                                     {"quench", 2, 2},
                                     {"trotter", 12 * N, N * (10 * L - 8)},
                                     {"measure", 3, 3 * L}});
  const int depth = 2 * L + 12 * N + 4 * n + 3;
  const int gates = L * L + L * (10 * N + 2 * n + 2) + 2 - 8 * N - 2 * n;
  if (depth != r.two_qubit_depth || gates != r.two_qubit_gates)
    throw std::logic_error("interleaved breakdown disagrees with closed form");
  return r;
}

ResourceReport estimate_all_up_all_down(int L, int n_trotter, int n_layers, bool final_fswap, bool exact_prep,
                                        int Ne) {
  require_positive(L, n_trotter, n_layers);
  if (exact_prep && (Ne <= 0 || Ne > 2 * L || Ne % 2))
    throw std::invalid_argument("exact-preparation gate count needs a valid even Ne");
  const int N = n_trotter, n = n_layers, eta = Ne / 2;
  std::vector<SegmentCost> segs;
  if (exact_prep)
    segs.push_back({"prep", 2 * (L - 1), 2 * eta * (L - eta)});
  else
    segs.push_back({"prep", 4 * n, 2 * (L - 1) * n});
  segs.push_back({"quench", 4 * L - 2, 4 * (L - 1) + 2});
  segs.push_back({"trotter", 6 * N, N * (6 * L - 4)});
  if (final_fswap) {
    segs.push_back({"final_reorder", 2 * (L - 1), L * L - L});
    segs.push_back({"measure", 3, 3 * L});
  }
  ResourceReport r = from_breakdown(std::move(segs));
  r.post_selection_available = final_fswap;
  int depth = 0;
  if (exact_prep)
    depth = final_fswap ? 8 * L + 6 * N - 3 : 6 * L + 6 * N - 4;
  else
    depth = final_fswap ? 4 * n + 6 * L + 6 * N - 1 : 4 * n + 4 * L + 6 * N - 2;
  if (depth != r.two_qubit_depth) throw std::logic_error("(all up)(all down) breakdown disagrees with closed form");
  return r;
}

namespace {

// Per-qubit finishing times; barriers align every qubit to the current front.
struct Scheduler {
  std::vector<int> busy;
  int front = 0;

  explicit Scheduler(int n) : busy(static_cast<std::size_t>(n), 0) {}

  SegmentCost run(const std::vector<Gate>& gates) {
    SegmentCost c;
    for (const auto& g : gates) {
      if (g.arity() != 2) continue;
      const GateCost cost = two_qubit_cost(g.kind);
      auto& a = busy.at(static_cast<std::size_t>(g.qubits[0]));
      auto& b = busy.at(static_cast<std::size_t>(g.qubits[1]));
      a = b = std::max(a, b) + cost.depth;
      c.gates += cost.count;
    }
    const int end = *std::max_element(busy.begin(), busy.end());
    c.depth = end - front;
    front = end;
    std::fill(busy.begin(), busy.end(), front);
    return c;
  }
};

}  // namespace

ResourceReport walk_gates(const std::vector<Gate>& gates, int n_qubits) {
  if (gates.empty()) return {};
  Scheduler s(n_qubits);
  SegmentCost c = s.run(gates);
  c.name = "all";
  return from_breakdown({c});
}

ResourceReport walk_circuit(const ProtocolCircuit& circuit) {
  Scheduler sched(circuit.meta.model.n_qubits());
  std::vector<SegmentCost> segs;
  bool quenched = false;
  for (const auto& seg : circuit.segments) {
    if (seg.gates.empty()) continue;
    SegmentCost c = sched.run(seg.gates);
    switch (seg.kind) {
      case SegmentKind::InitialState: c.name = "prep"; break;
      case SegmentKind::ReorderFswaps: c.name = quenched ? "final_reorder" : "reorder"; break;
      case SegmentKind::Quench: c.name = "quench"; quenched = true; break;
      case SegmentKind::TrotterStep: c.name = "trotter"; break;
      case SegmentKind::MeasureBasis: c.name = "measure"; break;
    }
    if (!segs.empty() && segs.back().name == c.name) {
      segs.back().depth += c.depth;
      segs.back().gates += c.gates;
    } else {
      segs.push_back(c);
    }
  }
  ResourceReport r = from_breakdown(std::move(segs));
  r.post_selection_available = circuit.meta.pair_measurement;
  return r;
}

std::optional<ResourceMismatch> compare_reports(const ResourceReport& formula, const ResourceReport& walked) {
  const std::size_t n = std::max(formula.breakdown.size(), walked.breakdown.size());
  for (std::size_t i = 0; i < n; ++i) {
    const SegmentCost f = i < formula.breakdown.size() ? formula.breakdown[i] : SegmentCost{"<missing>"};
    const SegmentCost w = i < walked.breakdown.size() ? walked.breakdown[i] : SegmentCost{"<missing>"};
    if (!(f == w)) return ResourceMismatch{f.name == "<missing>" ? w.name : f.name, f, w};
  }
  if (formula.two_qubit_depth != walked.two_qubit_depth || formula.two_qubit_gates != walked.two_qubit_gates)
    return ResourceMismatch{"total",
                            {"total", formula.two_qubit_depth, formula.two_qubit_gates},
                            {"total", walked.two_qubit_depth, walked.two_qubit_gates}};
  return std::nullopt;
}

std::vector<TableRow> hardware_rows() {
  return {{9, 5, 2, 6, 3.0}, {11, 6, 2, 6, 3.0}, {13, 6, 2, 6, 3.5}, {15, 6, 3, 10, 3.0}};
}

namespace {

// Circuit shape only: DGA angles do not affect the layering.
ProtocolCircuit shape_circuit(const TableRow& row, OrderingKind ordering) {
  DgaAnsatz shape;
  shape.L = row.L;
  shape.Ne = row.Ne;
  shape.n_layers = row.n_layers;
  shape.angles.assign(static_cast<std::size_t>(2 * (row.L - 1) * row.n_layers), 0.0);
  shape.occupied_modes = initial_occupation(row.L, row.Ne);
  const FermiHubbardModel model{row.L, 1.0, 3.0, row.Ne};
  return build_full_circuit(model, dga_preparation(shape), {TrotterOrder::First, row.n_trotter}, row.T,
                            {ordering, true});
}

}  // namespace

void write_resource_table(std::ostream& os, const std::vector<TableRow>& rows, bool csv) {
  const char* header = csv ? "L,n_trotter,n_layers,depth,gates,walked_depth,walked_gates,auad_dga_depth,"
                             "auad_dga_depth_no_final,auad_exact_depth\n"
                           : "   L  N_T  n_l  depth  gates  walked_depth  walked_gates  auad_dga  "
                             "auad_dga_nofinal  auad_exact\n";
  os << header;
  for (const auto& row : rows) {
    const auto f = estimate_interleaved(row.L, row.n_trotter, row.n_layers);
    const auto w = walk_circuit(shape_circuit(row, OrderingKind::Interleaved));
    const auto a = estimate_all_up_all_down(row.L, row.n_trotter, row.n_layers, true, false, row.Ne);
    const auto b = estimate_all_up_all_down(row.L, row.n_trotter, row.n_layers, false, false, row.Ne);
    const auto e = estimate_all_up_all_down(row.L, row.n_trotter, row.n_layers, true, true, row.Ne);
    if (csv)
      os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", row.L, row.n_trotter, row.n_layers, f.two_qubit_depth,
                        f.two_qubit_gates, w.two_qubit_depth, w.two_qubit_gates, a.two_qubit_depth,
                        b.two_qubit_depth, e.two_qubit_depth);
    else
      os << fmt::format("{:4d} {:4d} {:4d} {:6d} {:6d} {:13d} {:13d} {:9d} {:17d} {:11d}\n", row.L, row.n_trotter,
                        row.n_layers, f.two_qubit_depth, f.two_qubit_gates, w.two_qubit_depth, w.two_qubit_gates,
                        a.two_qubit_depth, b.two_qubit_depth, e.two_qubit_depth);
  }
}

}  // namespace qspec
