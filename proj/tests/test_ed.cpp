#include <gtest/gtest.h>

#include <numbers>
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
}  // namespace

TEST(Ed, GroundEnergiesMatchOracle) {
  const GroundState g4 = ground_state(EdOracle({4, 1.0, 3.0, 4}));
  EXPECT_NEAR(g4.energy, oracle::kGroundL4U3Ne4, 1e-9);
  EXPECT_NEAR(g4.gap, oracle::kGapL4U3Ne4, 1e-7);
  EXPECT_NEAR(ground_state(EdOracle({3, 1.0, 2.0, 2})).energy, oracle::kGroundL3U2Ne2, 1e-9);
}

TEST(Ed, FreeFermionEnergyAtZeroU) {
  const FermiHubbardModel m{6, 1.0, 0.0, 4};
  const auto orb = free_fermion_orbitals(m);
  EXPECT_NEAR(ground_state(EdOracle(m)).energy, 2.0 * (orb.energies(0) + orb.energies(1)), 1e-9);
}

TEST(Ed, RetardedGfMatchesOracle) {
  const EdOracle ed({3, 1.0, 2.0, 2});
  const auto g = ground_state(ed);
  const std::vector<double> t{0.5, 1.3};
  for (int k = 0; k < 3; ++k) {
    const auto gf = retarded_spin_gf(ed, g.vector, 1, k, t);
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(gf[i].real(), oracle::kGfL3U2Re[2 * k + i], 1e-9);
      EXPECT_NEAR(gf[i].imag(), 0.0, 1e-9);
    }
  }
}

TEST(Ed, OneSidedFormEqualsCommutator) {
  const EdOracle ed({4, 1.0, 3.0, 4});
  const Vector psi = ed.from_statevector(ff_state(ed.model()), OrderingKind::AllUpAllDown);
  const std::vector<double> t{0.2, 0.9, 2.5};
  for (int k = 0; k < 4; ++k) {
    const auto g = retarded_spin_gf(ed, psi, 2, k, t);
    const auto h = spin_correlator_im2(ed, psi, 2, k, t);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(g[i].real(), h[i], 1e-10);
  }
}

TEST(Ed, StatevectorRoundTripBothOrderings) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  const EdOracle ed(m);
  const Statevector s = ff_state(m);
  const Vector v = ed.from_statevector(s, OrderingKind::AllUpAllDown);
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  const Statevector back = ed.to_statevector(v, OrderingKind::AllUpAllDown);
  EXPECT_NEAR(std::abs(inner_product(back, s)), 1.0, 1e-12);
  Statevector moved = s;
  moved.apply(build_reorder_network(4));
  EXPECT_LT((ed.from_statevector(moved, OrderingKind::Interleaved) - v).norm(), 1e-12);
}

TEST(Ed, HamiltonianMatchesPauliEncoding) {
  const FermiHubbardModel m{3, 1.0, 2.5, 2};
  const EdOracle ed(m);
  const Eigen::MatrixXcd dense = to_dense(hubbard_hamiltonian(m, QubitOrdering(OrderingKind::AllUpAllDown, 3)), 6);
  const auto states = ed.basis().states();
  const Eigen::MatrixXcd h = Eigen::MatrixXcd(ed.hamiltonian());
  for (std::size_t a = 0; a < states.size(); ++a)
    for (std::size_t b = 0; b < states.size(); ++b)
      EXPECT_NEAR(std::abs(h(a, b) - dense(states[a], states[b])), 0.0, 1e-12);
}

TEST(Ed, SpinOperatorSpectrumOnOneSite) {
  const EdOracle ed({2, 1.0, 0.0, 2});
  const Eigen::MatrixXcd sx = Eigen::MatrixXcd(ed.spin_x(0));
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(sx).eigenvalues();
  EXPECT_NEAR(ev.minCoeff(), -1.0, 1e-12);
  EXPECT_NEAR(ev.maxCoeff(), 1.0, 1e-12);
}

TEST(QuenchIdentity, LinearizedQuenchIsExact) {
  for (double U : {0.0, 3.0}) {
    const EdOracle ed({4, 1.0, U, 4});
    const Vector psi = ground_state(ed).vector;
    const double th = kQuenchAngle;
    const Vector q = std::cos(th) * psi + cplx{0, std::sin(th)} * (ed.spin_x(2) * psi);
    for (double t : {0.4, 1.7}) {
      const Vector s = ed.evolve(q, t);
      for (int k = 0; k < 4; ++k) {
        const double g = retarded_spin_gf(ed, psi, 2, k, std::vector<double>{t})[0].real();
        EXPECT_NEAR(s.dot(ed.spin_x(k) * s).real(), 0.5 * g, 1e-9);
      }
    }
  }
}

TEST(QuenchIdentity, UnitaryQuenchExactWhenSitesSinglyOccupied) {
  // large U suppresses double occupancy, which is what separates the unitary quench from its linearization
  const EdOracle ed({4, 1.0, 40.0, 4});
  const Vector psi = ground_state(ed).vector;
  const Statevector s = ed.to_statevector(psi, OrderingKind::AllUpAllDown);
  const QuenchedState q = quench_state(ed.model(), s, {OrderingKind::Interleaved, true});
  const Vector u = ed.from_statevector(q.state, OrderingKind::Interleaved);
  const double t = 0.7;
  const Vector a = ed.evolve(u, t);
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double g = retarded_spin_gf(ed, psi, 2, k, std::vector<double>{t})[0].real();
    worst = std::max(worst, std::abs(a.dot(ed.spin_x(k) * a).real() - 0.5 * g));
  }
  EXPECT_LT(worst, 0.02);  // residual from double occupancy ~ (J/U)^2
}

TEST(SpinReflection, FreeFermionAndGroundStates) {
  const FermiHubbardModel m{4, 1.0, 3.0, 4};
  EXPECT_TRUE(verify_spin_reflection_symmetry(ff_state(m), OrderingKind::AllUpAllDown, 4).symmetric);
  const EdOracle ed(m);
  const auto g = ed.to_statevector(ground_state(ed).vector, OrderingKind::AllUpAllDown);
  EXPECT_TRUE(verify_spin_reflection_symmetry(g, OrderingKind::AllUpAllDown, 4).symmetric);
  // polarized state breaks it
  const auto pol = Statevector::basis_state(8, 0b00000011);
  EXPECT_FALSE(verify_spin_reflection_symmetry(pol, OrderingKind::AllUpAllDown, 4).symmetric);
}

TEST(Lehmann, SpectralWeightsArePositiveAndSumRule) {
  const EdOracle ed({4, 1.0, 2.0, 4});
  const auto g = ground_state(ed);
  const auto d = lehmann_data(ed, g.vector, g.energy, std::numbers::pi / 2, 0.05);
  double wp = 0.0;
  for (double w : d.weight_plus) {
    EXPECT_GE(w, 0.0);
    wp += w;
  }
  EXPECT_GT(wp, 0.0);
  for (double e : d.excitation) EXPECT_GE(e, -1e-9);
  EXPECT_THROW(lehmann_data(ed, g.vector, g.energy, 0.0, 0.0), std::invalid_argument);
}
