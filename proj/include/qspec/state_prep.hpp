#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qspec/gates.hpp"
#include "qspec/lattice.hpp"
#include "qspec/statevector.hpp"

namespace qspec {

// Rows are single-particle orbitals over the L sites, sorted by energy.
struct OrbitalMatrix {
  Eigen::MatrixXd rows;
  Eigen::VectorXd energies;

  int sites() const { return static_cast<int>(rows.cols()); }
  // First n rows.
  Eigen::MatrixXd occupied(int n) const { return rows.topRows(n); }
};

// Open-chain hopping eigenproblem. Throws if the Fermi level is degenerate.
OrbitalMatrix free_fermion_orbitals(const FermiHubbardModel& model);

// Single-sector hopping matrix -J (delta_{i,i+1} + delta_{i+1,i}).
Eigen::MatrixXd hopping_matrix(int L, double J);

// Rotation between adjacent modes (mode, mode + 1) of one spin sector.
struct ModeRotation {
  int mode = 0;
  double theta = 0.0;
};

struct GivensNetwork {
  int L = 0;
  std::vector<std::vector<ModeRotation>> layers;  // applied first to last
  std::vector<int> occupied_modes;               // initial X gates, per sector

  std::size_t rotation_count() const;
};

// Network that turns the reference state (modes 0..n-1 filled) into the
// Slater determinant of `orbitals.occupied(n_per_sector)`, up to a sign.
GivensNetwork givens_compile(const OrbitalMatrix& orbitals, int n_per_sector);

enum class DgaObjective { Energy, Fidelity };
std::string to_string(DgaObjective objective);
DgaObjective dga_objective_from_string(const std::string& name);
DgaObjective default_objective(int L);

// Brick-wall ansatz. angles holds 2 (L-1) n_layers entries: the up-sector block
// followed by the down-sector block; optimization keeps the two blocks equal.
struct DgaAnsatz {
  int L = 0;
  int Ne = 0;
  int n_layers = 0;
  DgaObjective objective = DgaObjective::Fidelity;
  std::vector<double> angles;
  std::vector<int> occupied_modes;
  // per-sector |det|^2 overlap and its square for the full two-sector state
  double sector_fidelity = 0.0;
  double fidelity = 0.0;
  double energy = 0.0;  // <H_0> with both sectors
  bool converged = true;
  int restarts = 0;

  GivensNetwork sector_network(Spin spin) const;
};

// Mode pairs of the brick-wall pattern, one entry per angle of a sector.
std::vector<int> dga_pattern(int L, int n_layers);

struct OptimizerConfig {
  int restarts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 5000;
  double tolerance = 1e-9;  // objective improvement over `window` iterations
  int window = 50;
  // start from these per-sector angles instead of a random point on restart 0
  std::vector<double> warm_start;
};

DgaAnsatz dga_optimize(const FermiHubbardModel& model, int n_layers, DgaObjective objective,
                       const OptimizerConfig& config = {});

// Per-sector single-particle quantities for arbitrary per-sector angles.
Eigen::MatrixXd apply_network(const Eigen::MatrixXd& orbitals, const GivensNetwork& network);
Eigen::MatrixXd reference_orbitals(int L, const std::vector<int>& occupied);
double sector_overlap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);  // det(a b^T)
double sector_energy(const Eigen::MatrixXd& orbitals, const Eigen::MatrixXd& hopping);

std::vector<int> initial_occupation(int L, int Ne);

double fidelity(const Statevector& a, const Statevector& b);

// Gates on the (all up)(all down) register: X on occupied modes, then the network, both sectors.
std::vector<Gate> network_gates(const GivensNetwork& up, const GivensNetwork& down);
Statevector prepare_state(const GivensNetwork& up, const GivensNetwork& down);

// Direct construction: amplitude det(Phi_up[:, A]) det(Phi_dn[:, B]) on the
// (all up)(all down) register.
Statevector slater_state(const Eigen::MatrixXd& up, const Eigen::MatrixXd& down);

void write_ansatz(std::ostream& os, const DgaAnsatz& ansatz);
DgaAnsatz read_ansatz(std::istream& is);

}  // namespace qspec
