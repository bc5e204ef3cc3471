#include <gtest/gtest.h>

#include <numbers>

#include "oracle_values.hpp"
#include "qspec/lattice.hpp"
#include "qspec/sparse_ops.hpp"

using namespace qspec;

TEST(Model, ValidationRejectsBadFillings) {
  EXPECT_THROW((FermiHubbardModel{1, 1, 0, 2}.validate()), std::invalid_argument);
  EXPECT_THROW((FermiHubbardModel{4, 1, 0, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((FermiHubbardModel{4, 1, 0, 10}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((FermiHubbardModel{4, 1, 0, 8}.validate()));
}

TEST(Model, FermiMomentum) {
  EXPECT_NEAR((FermiHubbardModel{9, 1, 3, 6}.fermi_momentum()), std::numbers::pi / 3, 1e-15);
}

TEST(Ordering, QubitMaps) {
  const QubitOrdering a(OrderingKind::AllUpAllDown, 5), b(OrderingKind::Interleaved, 5);
  EXPECT_EQ(a.qubit(2, Spin::Up), 2);
  EXPECT_EQ(a.qubit(2, Spin::Down), 7);
  EXPECT_EQ(b.qubit(2, Spin::Up), 4);
  EXPECT_EQ(b.qubit(2, Spin::Down), 5);
}

TEST(Ordering, StringRoundTrip) {
  for (auto k : {OrderingKind::AllUpAllDown, OrderingKind::Interleaved})
    EXPECT_EQ(ordering_from_string(to_string(k)), k);
  EXPECT_THROW(ordering_from_string("zigzag"), std::invalid_argument);
}

TEST(Pauli, ProductAndCommutation) {
  PauliString x{1.0, {{0, Pauli::X}}}, y{1.0, {{0, Pauli::Y}}};
  const PauliString xy = x * y;
  EXPECT_EQ(xy.factors.at(0), Pauli::Z);
  EXPECT_NEAR(std::abs(xy.coefficient - cplx{0, 1}), 0.0, 1e-15);
  EXPECT_FALSE(commutes(x, y));
  PauliString xx{1.0, {{0, Pauli::X}, {1, Pauli::X}}}, yy{1.0, {{0, Pauli::Y}, {1, Pauli::Y}}};
  EXPECT_TRUE(commutes(xx, yy));
}

TEST(Encoding, HoppingStringWeightDependsOnOrdering) {
  const FermiHubbardModel m{4, 1, 0, 4};
  const auto auad = jw_encode_hopping(m, QubitOrdering(OrderingKind::AllUpAllDown, 4), 1, Spin::Up);
  const auto inter = jw_encode_hopping(m, QubitOrdering(OrderingKind::Interleaved, 4), 1, Spin::Up);
  EXPECT_EQ(auad.front().weight(), 2);
  EXPECT_EQ(inter.front().weight(), 3);  // Z on the down qubit in between
}

TEST(Encoding, HamiltonianIsHermitian) {
  for (auto k : {OrderingKind::AllUpAllDown, OrderingKind::Interleaved})
    for (int L = 2; L <= 5; ++L) EXPECT_TRUE(is_hermitian(hubbard_hamiltonian({L, 1.0, 2.5, 2}, QubitOrdering(k, L))));
}

TEST(Encoding, SpectraAgreeAcrossOrderings) {
  const FermiHubbardModel m{3, 1.0, 4.0, 2};
  const auto a = to_dense(hubbard_hamiltonian(m, QubitOrdering(OrderingKind::AllUpAllDown, 3)), 6);
  const auto b = to_dense(hubbard_hamiltonian(m, QubitOrdering(OrderingKind::Interleaved, 3)), 6);
  const Eigen::VectorXd ea = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(a).eigenvalues();
  const Eigen::VectorXd eb = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(b).eigenvalues();
  EXPECT_LT((ea - eb).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Encoding, GroundEnergyMatchesIndependentOracle) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  const QubitOrdering ord(OrderingKind::Interleaved, 4);
  // fixed N_up = N_down = 2: up qubits are the even bits
  const SectorBasis basis(8, 4, 0x55, 2);
  const auto pair = lanczos_ground_state(sector_matrix(hubbard_hamiltonian(m, ord), basis));
  EXPECT_NEAR(pair.energy, oracle::kGroundL4U3Ne4, 1e-9);
}

TEST(Encoding, OnsiteTermIsProjector) {
  const FermiHubbardModel m{2, 1, 1, 2};
  const auto d = to_dense(jw_encode_onsite(m, QubitOrdering(OrderingKind::Interleaved, 2), 0), 4);
  EXPECT_LT((d * d - d).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(d.trace().real(), 4.0, 1e-14);  // |11> on site 0, times 4 states of site 1
}

TEST(Encoding, NumberOperatorCounts) {
  const auto n = to_dense(number_operator(3), 3);
  for (int s = 0; s < 8; ++s) EXPECT_NEAR(n(s, s).real(), __builtin_popcount(s), 1e-14);
}
