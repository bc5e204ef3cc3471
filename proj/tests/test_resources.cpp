#include <gtest/gtest.h>

#include <sstream>

#include "qspec/resources.hpp"

using namespace qspec;

namespace {
Preparation dga_shape(int L, int Ne, int layers) {
  DgaAnsatz a;
  a.L = L;
  a.Ne = Ne;
  a.n_layers = layers;
  a.angles.assign(2 * dga_pattern(L, layers).size(), 0.2);
  a.occupied_modes = initial_occupation(L, Ne);
  return dga_preparation(a);
}
}  // namespace

TEST(Resources, TableOne) {
  const int expect[4][3] = {{9, 89, 543}, {11, 105, 797}, {13, 109, 977}, {15, 117, 1193}};
  const auto rows = hardware_rows();
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rows[i].L, expect[i][0]);
    const auto r = estimate_interleaved(rows[i].L, rows[i].n_trotter, rows[i].n_layers);
    EXPECT_EQ(r.two_qubit_depth, expect[i][1]);
    EXPECT_EQ(r.two_qubit_gates, expect[i][2]);
  }
}

TEST(Resources, ClosedForms) {
  for (int L = 4; L <= 16; ++L)
    for (int N = 1; N <= 6; ++N)
      for (int n = 1; n <= 3; ++n) {
        const auto r = estimate_interleaved(L, N, n);
        EXPECT_EQ(r.two_qubit_depth, 4 * n + 2 * (L - 1) + 2 + 12 * N + 3);
        EXPECT_EQ(r.two_qubit_gates, 2 * (L - 1) * n + L * L - L + 2 + N * (10 * L - 8) + 3 * L);
        const auto a = estimate_all_up_all_down(L, N, n, true, false, 4);
        EXPECT_EQ(a.two_qubit_depth, 4 * n + 6 * L + 6 * N - 1);
        const auto b = estimate_all_up_all_down(L, N, n, false, false, 4);
        EXPECT_EQ(b.two_qubit_depth, 4 * n + 4 * L + 6 * N - 2);
        EXPECT_FALSE(b.post_selection_available);
      }
}

class WalkAgreement : public ::testing::TestWithParam<int> {};

TEST_P(WalkAgreement, FormulaMatchesBuiltCircuit) {
  const int L = GetParam();
  for (int N = 1; N <= 5; ++N)
    for (int n = 1; n <= 3; ++n) {
      const FermiHubbardModel m{L, 1.0, 3.0, 2};
      const auto prep = dga_shape(L, 2, n);
      const TrotterConfig tc{TrotterOrder::First, N, false};
      auto check = [&](const ResourceReport& formula, const CircuitLayout& layout) {
        const auto walked = walk_circuit(build_full_circuit(m, prep, tc, 3.0, layout));
        const auto mm = compare_reports(formula, walked);
        EXPECT_FALSE(mm.has_value()) << "L=" << L << " N=" << N << " n=" << n << " " << (mm ? mm->segment : "");
      };
      check(estimate_interleaved(L, N, n), {OrderingKind::Interleaved, true});
      check(estimate_all_up_all_down(L, N, n, true, false, 2), {OrderingKind::AllUpAllDown, true});
      check(estimate_all_up_all_down(L, N, n, false, false, 2), {OrderingKind::AllUpAllDown, false});
    }
}
INSTANTIATE_TEST_SUITE_P(Sizes, WalkAgreement, ::testing::Values(3, 4, 5, 8, 9, 12, 15));

TEST(Resources, ExactPreparationWalk) {
  for (int L : {4, 6, 9})
    for (int Ne : {2, 4}) {
      const FermiHubbardModel m{L, 1.0, 3.0, Ne};
      const auto formula = estimate_all_up_all_down(L, 3, 1, true, true, Ne);
      const auto walked = walk_circuit(
          build_full_circuit(m, exact_preparation(m), {TrotterOrder::First, 3, false}, 3.0, {OrderingKind::AllUpAllDown, true}));
      EXPECT_EQ(walked.breakdown.front().gates, formula.breakdown.front().gates) << L << " " << Ne;
      EXPECT_LE(walked.breakdown.front().depth, formula.breakdown.front().depth) << L << " " << Ne;
    }
}

TEST(Resources, Monotonicity) {
  const auto base = estimate_interleaved(9, 5, 2);
  for (const auto& r : {estimate_interleaved(10, 5, 2), estimate_interleaved(9, 6, 2), estimate_interleaved(9, 5, 3)}) {
    EXPECT_GT(r.two_qubit_depth, base.two_qubit_depth);
    EXPECT_GT(r.two_qubit_gates, base.two_qubit_gates);
  }
}

TEST(Resources, InterleavedBeatsAllUpAllDownOnHardwareRows) {
  for (const auto& row : hardware_rows())
    EXPECT_LT(estimate_interleaved(row.L, row.n_trotter, row.n_layers).two_qubit_depth,
              estimate_all_up_all_down(row.L, row.n_trotter, row.n_layers, true, false, row.Ne).two_qubit_depth);
}

TEST(Resources, NamedGateCosts) {
  EXPECT_EQ(two_qubit_cost(GateKind::Givens).depth, 2);
  EXPECT_EQ(two_qubit_cost(GateKind::BasisXY).count, 3);
  EXPECT_EQ(two_qubit_cost(GateKind::FSwap).count, 2);
  EXPECT_EQ(two_qubit_cost(GateKind::Rz).count, 0);
}

TEST(Resources, TableOutput) {
  std::stringstream text, csv;
  write_resource_table(text, hardware_rows(), false);
  write_resource_table(csv, hardware_rows(), true);
  EXPECT_NE(text.str().find("1193"), std::string::npos);
  std::string header;
  std::getline(csv, header);
  EXPECT_NE(header.find(','), std::string::npos);
}
