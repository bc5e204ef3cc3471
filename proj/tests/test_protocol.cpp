#include <gtest/gtest.h>

#include <sstream>

#include "oracle_values.hpp"
#include "qspec/ed.hpp"
#include "qspec/protocol.hpp"

using namespace qspec;

namespace {
Statevector ff_state(const FermiHubbardModel& m) {
  const auto orb = free_fermion_orbitals(m);
  return slater_state(orb.occupied(m.electrons_per_spin()), orb.occupied(m.electrons_per_spin()));
}

std::vector<double> site_values(const ProtocolRun& r, int m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < r.series.values.rows(); ++i) v.push_back(r.series.values(i, m));
  return v;
}
}  // namespace

TEST(Reorder, MapsAllUpAllDownToInterleaved) {
  for (int L = 2; L <= 5; ++L) {
    const FermiHubbardModel m{L, 1.0, 0.0, 2};
    const EdOracle ed(m);
    Statevector s = ff_state(m);
    const Vector before = ed.from_statevector(s, OrderingKind::AllUpAllDown);
    s.apply(build_reorder_network(L));
    EXPECT_LT((ed.from_statevector(s, OrderingKind::Interleaved) - before).norm(), 1e-12) << L;
  }
}

TEST(Reorder, GateCountIsTriangular) {
  for (int L = 2; L <= 9; ++L) EXPECT_EQ(build_reorder_network(L).size(), static_cast<std::size_t>(L * (L - 1) / 2));
}

TEST(Trotter, MatchesIndependentProductFormula) {
  const FermiHubbardModel m3{3, 1.0, 2.0, 2};
  const QuenchedState q3 = quench_state(m3, ff_state(m3), {OrderingKind::Interleaved, true});
  const std::vector<double> t{1.0};
  const auto r3 = run_protocol(m3, q3, {TrotterOrder::First, 2, false}, 1.0, t);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(r3.series.values(i, 0), oracle::kTrotterL3U2T1N2[i], 1e-10);

  const FermiHubbardModel m4{4, 1.0, 3.0, 4};
  for (auto ordering : {OrderingKind::Interleaved, OrderingKind::AllUpAllDown}) {
    const QuenchedState q4 = quench_state(m4, ff_state(m4), {ordering, true});
    const auto r4 = run_protocol(m4, q4, {TrotterOrder::First, 3, false}, 1.0, t);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r4.series.values(i, 0), oracle::kTrotterL4U3T1N3[i], 1e-10);
  }
}

TEST(Propagator, MatchesIndependentQuenchSeries) {
  const FermiHubbardModel m{3, 1.0, 2.0, 2};
  const QuenchedState q = quench_state(m, ff_state(m), {OrderingKind::Interleaved, true});
  const auto times = uniform_times(2.0, 4);
  ExecutionConfig exec;
  exec.mode = ExecutionMode::ExactPropagator;
  const auto r = run_protocol(m, q, {TrotterOrder::First, 1, false}, 2.0, times, exec);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.series.values(i, k), oracle::kQuenchSeriesL3U2[i * 4 + k], 1e-9);
}

TEST(Trotter, FirstOrderErrorHalvesWithStep) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  const EdOracle ed(m);
  const QuenchedState q = quench_state(m, ff_state(m), {OrderingKind::Interleaved, true});
  const Vector exact = ed.evolve(ed.from_statevector(q.state, OrderingKind::Interleaved), 1.0);
  auto err = [&](int n, TrotterOrder o) {
    Statevector s = q.state;
    s.apply(evolution_gates(m, 1.0, 1.0, OrderingKind::Interleaved, {o, n, false}));
    return (ed.from_statevector(s, OrderingKind::Interleaved) - exact).norm();
  };
  EXPECT_NEAR(err(16, TrotterOrder::First) / err(32, TrotterOrder::First), 2.0, 0.2);
  EXPECT_NEAR(err(8, TrotterOrder::Second) / err(16, TrotterOrder::Second), 4.0, 0.4);
}

TEST(Trotter, OrderingsAgreeAndConserveNumber) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  const auto times = uniform_times(2.0, 6);
  for (auto order : {TrotterOrder::First, TrotterOrder::Second}) {
    const TrotterConfig tc{order, 3, false};
    const auto a = run_protocol(m, quench_state(m, ff_state(m), {OrderingKind::Interleaved, true}), tc, 2.0, times);
    const auto b = run_protocol(m, quench_state(m, ff_state(m), {OrderingKind::AllUpAllDown, false}), tc, 2.0, times);
    EXPECT_LT((a.series.values - b.series.values).cwiseAbs().maxCoeff(), 1e-10);
    for (double n : a.particle_number) EXPECT_NEAR(n, 4.0, 1e-10);
    for (double r : a.max_imag_residue) EXPECT_LT(r, 1e-12);
  }
}

TEST(Protocol, SignalVanishesAtTimeZeroAndIsMirrorSymmetric) {
  const FermiHubbardModel m{5, 1.0, 3.0, 4};
  // the brick-wall Trotter order breaks reflection, so use the exact propagator
  ExecutionConfig exec;
  exec.mode = ExecutionMode::ExactPropagator;
  const auto r = run_protocol(m, quench_state(m, ff_state(m), {}), {TrotterOrder::First, 3, false}, 2.0,
                              uniform_times(2.0, 5), exec);
  EXPECT_LT(r.series.values.col(0).cwiseAbs().maxCoeff(), 1e-12);
  for (int m2 = 0; m2 < 5; ++m2)
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.series.values(i, m2), r.series.values(4 - i, m2), 1e-10);
}

TEST(Protocol, SampledEstimatorConverges) {
  const FermiHubbardModel m{3, 1.0, 2.0, 2};
  const QuenchedState q = quench_state(m, ff_state(m), {});
  const std::vector<double> t{0.8};
  const TrotterConfig tc{TrotterOrder::First, 2, false};
  const auto exact = run_protocol(m, q, tc, 0.8, t);
  ExecutionConfig exec;
  exec.mode = ExecutionMode::Sampled;
  exec.shots = 200000;
  exec.seed = 3;
  const auto sampled = run_protocol(m, q, tc, 0.8, t, exec);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sampled.series.values(i, 0), exact.series.values(i, 0), 0.01);
  EXPECT_NEAR(sampled.kept_fraction[0], 1.0, 1e-15);  // noiseless: number is conserved
  const auto again = run_protocol(m, q, tc, 0.8, t, exec);
  EXPECT_EQ(site_values(sampled, 0), site_values(again, 0));
}

TEST(Protocol, SampledModeNeedsPairMeasurement) {
  const FermiHubbardModel m{3, 1.0, 2.0, 2};
  ExecutionConfig exec;
  exec.mode = ExecutionMode::Sampled;
  const std::vector<double> t{0.5};
  EXPECT_THROW(run_protocol(m, exact_preparation(m), {}, 0.5, t, exec, {OrderingKind::AllUpAllDown, false}),
               std::invalid_argument);
}

TEST(Circuit, SegmentsAndRoundTrip) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  const auto c = build_full_circuit(m, exact_preparation(m), {TrotterOrder::First, 2, false}, 1.0);
  ASSERT_EQ(c.segments.size(), 6u);
  EXPECT_EQ(c.segments[1].kind, SegmentKind::ReorderFswaps);
  EXPECT_EQ(c.final_ordering(), OrderingKind::Interleaved);
  std::stringstream ss;
  write_circuit(ss, c);
  const auto gates = read_circuit_gates(ss);
  const auto orig = c.gates();
  ASSERT_EQ(gates.size(), orig.size());
  for (std::size_t i = 0; i < gates.size(); ++i) {
    EXPECT_EQ(gates[i].kind, orig[i].kind);
    EXPECT_EQ(gates[i].qubits, orig[i].qubits);
    EXPECT_EQ(gates[i].params, orig[i].params);
  }
}

TEST(Circuit, FixedStepPolicy) {
  const FermiHubbardModel m{3, 1.0, 1.0, 2};
  const TrotterConfig tc{TrotterOrder::First, 4, true};
  const auto one = evolution_gates(m, 0.5, 2.0, OrderingKind::Interleaved, tc);
  const auto two = evolution_gates(m, 1.0, 2.0, OrderingKind::Interleaved, tc);
  EXPECT_EQ(two.size(), 2 * one.size());
}

TEST(Measurement, PairEstimator) {
  // site 0 pair: only the second qubit set -> +1, only the first -> -1
  const std::vector<ShotRecord> rec{{0b10, 30}, {0b01, 10}};
  const auto v = estimate_spin_x(rec, 1);
  EXPECT_NEAR(v[0], 0.5, 1e-15);
}
