#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qspec {

// <S^x_i(t_m)>: values(i, m).
struct TimeSeriesGrid {
  std::vector<double> times;
  Eigen::MatrixXd values;
  std::string provenance;

  int sites() const { return static_cast<int>(values.rows()); }
  int samples() const { return static_cast<int>(times.size()); }
  double step() const;
  // Full window N dt covered by the samples.
  double window() const { return step() * samples(); }
  void validate() const;
};

// t_m = m T / n, m = 0 .. n-1
std::vector<double> uniform_times(double T, int n_samples);

struct PaddingInfo {
  int n_samples = 0;
  int n_padded = 0;     // N'
  int fft_length = 0;   // 2 N'
  double dt = 0.0;
  double window = 0.0;         // T = N dt
  double padded_window = 0.0;  // T' = N' dt
  double d_omega = 0.0;        // 2 pi / T
  double d_omega_padded = 0.0; // 2 pi / T'
  double d_omega_fine = 0.0;   // pi / T', spacing of the output axis
};

PaddingInfo padding_info(int n_samples, double dt, double omega_max);

struct QsfGrid {
  std::vector<double> momenta;      // 2 pi m / L - pi
  std::vector<double> frequencies;  // ascending, |w| <= omega_max
  Eigen::MatrixXd magnitudes;       // (momentum, frequency), max normalized to 1
  PaddingInfo padding;
  double omega_max = 6.0;
  bool all_zero = false;
};

QsfGrid qsf_transform(const TimeSeriesGrid& grid, double omega_max = 6.0);
// Plain 2D DFT over (site, sample) without reflection or padding; rows are momenta.
Eigen::MatrixXcd raw_transform(const TimeSeriesGrid& grid);

struct RidgePoint {
  double momentum = 0.0;
  double omega = 0.0;
  double magnitude = 0.0;
  bool defined = false;
};

struct Cusp {
  double momentum = 0.0;
  double omega = 0.0;
  double momentum_uncertainty = 0.0;
};

struct SpectralRidge {
  std::vector<RidgePoint> points;
  std::vector<Cusp> cusps;  // local minima of omega(k) away from the k = 0 bin
};

SpectralRidge extract_ridge(const QsfGrid& qsf);

// 4 J sin(k/2) sin(dq/2)
double two_spinon_boundary(double k, double dq, double J);

struct EnvelopeBand {
  bool allowed = false;
  double lower = 0.0;
  double upper = 0.0;
};

// Extent of 4 J sin(k/2) sin(dq/2), dq = 2p + k, over occupied p (|p| <= kF) with
// an empty final state (|p + k| >= kF, folded into the zone).
EnvelopeBand two_spinon_envelope(double k, double k_fermi, double J, int samples = 4001);

// Share of QSF magnitude at w > omega_min that falls inside the envelope widened
// by k_inflate in momentum and omega_inflate in frequency.
double envelope_mass_fraction(const QsfGrid& qsf, double k_fermi, double J, double omega_min, double k_inflate,
                              double omega_inflate);

double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int window = 7);
double ssim(const QsfGrid& a, const QsfGrid& b);
double ssim(const TimeSeriesGrid& a, const TimeSeriesGrid& b);
double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double rmse(const QsfGrid& a, const QsfGrid& b);
double rmse(const TimeSeriesGrid& a, const TimeSeriesGrid& b);

struct BootstrapResult {
  double mean = 0.0;
  double stderr_estimate = 0.0;
};

// metric sees one resample (indices drawn with replacement from 0..n_samples-1).
BootstrapResult bootstrap_metric(const std::function<double(std::span<const std::size_t>)>& metric,
                                 std::size_t n_samples, int n_boot = 10000, std::uint64_t seed = 1);
BootstrapResult bootstrap_mean(std::span<const double> samples, int n_boot = 10000, std::uint64_t seed = 1);

void write_timeseries_csv(std::ostream& os, const TimeSeriesGrid& grid);
TimeSeriesGrid read_timeseries_csv(std::istream& is);
void write_qsf_csv(std::ostream& os, const QsfGrid& qsf);
void write_qsf_triplets(std::ostream& os, const QsfGrid& qsf);
void write_ridge(std::ostream& os, const SpectralRidge& ridge);

}  // namespace qspec
