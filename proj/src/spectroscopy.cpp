#include "qspec/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fftw3.h>

namespace qspec {

namespace {
constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;
}  // namespace

double TimeSeriesGrid::step() const {
  if (times.size() < 2) throw std::invalid_argument("time grid needs at least two samples");
  return times[1] - times[0];
}

void TimeSeriesGrid::validate() const {
  if (times.size() < 2) throw std::invalid_argument("time grid is degenerate (fewer than two samples)");
  if (values.cols() != static_cast<Eigen::Index>(times.size()))
    throw std::invalid_argument("time grid: value columns do not match the sample count");
  const double dt = step();
  if (!(dt > 0)) throw std::invalid_argument("time grid must be ascending");
  for (std::size_t m = 0; m < times.size(); ++m)
    if (std::abs(times[m] - times[0] - dt * static_cast<double>(m)) > 1e-9 * std::max(1.0, times.back()))
      throw std::invalid_argument("time grid must be uniform");
  if (!values.allFinite()) throw std::invalid_argument("time grid holds non-finite values");
}

std::vector<double> uniform_times(double T, int n_samples) {
  if (n_samples < 2 || !(T > 0)) throw std::invalid_argument("uniform_times: need T > 0 and >= 2 samples");
  std::vector<double> t(static_cast<std::size_t>(n_samples));
  for (int m = 0; m < n_samples; ++m) t[static_cast<std::size_t>(m)] = T * m / n_samples;
  return t;
}

PaddingInfo padding_info(int n_samples, double dt, double omega_max) {
  if (n_samples < 4) throw std::invalid_argument("qsf: need at least 4 samples");
  if (!(dt > 0) || !(omega_max > 0)) throw std::invalid_argument("qsf: dt and omega_max must be positive");
  PaddingInfo p;
  p.n_samples = n_samples;
  p.dt = dt;
  p.window = dt * n_samples;
  const double exact = 2.0 * kPi * n_samples * n_samples / (omega_max * p.window);
  // guard against a ceil kicked up by rounding noise, e.g. 315.0000000001
  p.n_padded = static_cast<int>(std::ceil(exact - 1e-9));
  p.n_padded = std::max(p.n_padded, n_samples);
  p.fft_length = 2 * p.n_padded;
  p.padded_window = dt * p.n_padded;
  p.d_omega = 2.0 * kPi / p.window;
  p.d_omega_padded = 2.0 * kPi / p.padded_window;
  p.d_omega_fine = kPi / p.padded_window;
  return p;
}

QsfGrid qsf_transform(const TimeSeriesGrid& grid, double omega_max) {
  grid.validate();
  if (std::abs(grid.times.front()) > 1e-12) throw std::invalid_argument("qsf: time grid must start at t = 0");
  const int L = grid.sites();
  const int N = grid.samples();
  QsfGrid out;
  out.omega_max = omega_max;
  out.padding = padding_info(N, grid.step(), omega_max);
  const int Np = out.padding.n_padded;
  const int P = out.padding.fft_length;

  // kept frequency bins, in ascending order: n = -n_max .. n_max
  const double dw = out.padding.d_omega_fine;
  const int n_max = std::min(static_cast<int>(std::floor(omega_max / dw + 1e-9)), P / 2 - 1);
  for (int n = -n_max; n <= n_max; ++n) out.frequencies.push_back(n * dw);
  const int n_freq = 2 * n_max + 1;

  Eigen::MatrixXcd temporal(L, n_freq);
  std::vector<cd> in(static_cast<std::size_t>(P)), spec(static_cast<std::size_t>(P));
  fftw_plan plan = fftw_plan_dft_1d(P, reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(spec.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  for (int x = 0; x < L; ++x) {
    std::fill(in.begin(), in.end(), cd{0.0, 0.0});
    for (int m = 0; m < N; ++m) in[static_cast<std::size_t>(m)] = grid.values(x, m);
    // even extension f(-t) = f(t); index Np stays zero
    for (int m = 1; m < Np; ++m) in[static_cast<std::size_t>(P - m)] = in[static_cast<std::size_t>(m)];
    fftw_execute(plan);
    for (int n = -n_max; n <= n_max; ++n) temporal(x, n + n_max) = spec[static_cast<std::size_t>((n + P) % P)];
  }
  fftw_destroy_plan(plan);

  out.magnitudes.resize(L, n_freq);
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * kPi * m / L - kPi;
    out.momenta.push_back(k);
    for (int n = 0; n < n_freq; ++n) {
      cd acc{0.0, 0.0};
      for (int x = 0; x < L; ++x) acc += std::exp(cd{0.0, -k * x}) * temporal(x, n);
      out.magnitudes(m, n) = std::abs(acc);
    }
  }
  const double peak = out.magnitudes.maxCoeff();
  if (peak > 0.0) {
    out.magnitudes /= peak;
  } else {
    out.all_zero = true;
  }
  return out;
}

Eigen::MatrixXcd raw_transform(const TimeSeriesGrid& grid) {
  grid.validate();
  const int L = grid.sites();
  const int N = grid.samples();
  Eigen::MatrixXcd out(L, N);
  for (int m = 0; m < L; ++m) {
    const double k = 2.0 * kPi * m / L - kPi;
    for (int n = 0; n < N; ++n) {
      cd acc{0.0, 0.0};
      for (int x = 0; x < L; ++x)
        for (int t = 0; t < N; ++t)
          acc += grid.values(x, t) * std::exp(cd{0.0, -k * x - 2.0 * kPi * n * t / N});
      out(m, n) = acc;
    }
  }
  return out;
}

SpectralRidge extract_ridge(const QsfGrid& qsf) {
  SpectralRidge ridge;
  const auto& w = qsf.frequencies;
  const int n_freq = static_cast<int>(w.size());
  const int L = static_cast<int>(qsf.momenta.size());
  const double dw = qsf.padding.d_omega_fine;
  for (int m = 0; m < L; ++m) {
    RidgePoint p;
    p.momentum = qsf.momenta[static_cast<std::size_t>(m)];
    int best = -1;
    double lo = INFINITY, hi = -INFINITY;
    for (int n = 0; n < n_freq; ++n) {
      if (!(w[static_cast<std::size_t>(n)] > 0.0)) continue;
      const double v = qsf.magnitudes(m, n);
      lo = std::min(lo, v);
      if (v > hi) {
        hi = v;
        best = n;
      }
    }
    if (best < 0 || qsf.all_zero || hi - lo <= 1e-14) {
      ridge.points.push_back(p);
      continue;
    }
    double omega = w[static_cast<std::size_t>(best)];
    double mag = hi;
    if (best > 0 && best + 1 < n_freq) {
      const double ym = qsf.magnitudes(m, best - 1), y0 = hi, yp = qsf.magnitudes(m, best + 1);
      const double denom = ym - 2.0 * y0 + yp;
      if (denom < 0.0) {
        const double shift = 0.5 * (ym - yp) / denom;
        omega += shift * dw;
        mag = y0 - 0.25 * (ym - yp) * shift;
      }
    }
    p.omega = std::clamp(omega, 0.0, qsf.omega_max);
    p.magnitude = mag;
    p.defined = true;
    ridge.points.push_back(p);
  }

  if (L < 3) return ridge;
  const double dk = 2.0 * kPi / L;
  // Valleys are maximal runs of equal ridge frequency bounded by higher points on both sides;
  // a flat bottom spanning several bins counts once. The valley holding k = 0 is always there.
  const double flat = 1e-6 * std::max(dw, 1e-12);
  const auto& pts = ridge.points;
  auto at = [&](int i) -> const RidgePoint& { return pts[static_cast<std::size_t>(((i % L) + L) % L)]; };
  std::vector<bool> visited(static_cast<std::size_t>(L), false);
  for (int m = 0; m < L; ++m) {
    if (visited[static_cast<std::size_t>(m)] || !pts[static_cast<std::size_t>(m)].defined) continue;
    const double level = pts[static_cast<std::size_t>(m)].omega;
    auto same = [&](int i) { return at(i).defined && std::abs(at(i).omega - level) <= flat; };
    int lo = m, hi = m;
    while (hi - lo + 1 < L && same(lo - 1)) --lo;
    while (hi - lo + 1 < L && same(hi + 1)) ++hi;
    for (int i = lo; i <= hi; ++i) visited[static_cast<std::size_t>(((i % L) + L) % L)] = true;
    if (hi - lo + 1 >= L) break;  // flat ridge
    const RidgePoint& l = at(lo - 1);
    const RidgePoint& r = at(hi + 1);
    if (!l.defined || !r.defined || l.omega <= level || r.omega <= level) continue;
    // momenta along the run, unwrapped across the zone edge
    const double k_lo = at(lo).momentum;
    double k = k_lo + 0.5 * (hi - lo) * dk;
    double omega = level;
    if (lo == hi) {
      const double denom = l.omega - 2.0 * level + r.omega;
      const double shift = 0.5 * (l.omega - r.omega) / denom;
      k += shift * dk;
      omega = std::max(0.0, level - 0.25 * (l.omega - r.omega) * shift);
    }
    k = std::remainder(k, 2.0 * kPi);
    bool holds_zero = false;
    for (int i = lo; i <= hi; ++i) holds_zero = holds_zero || std::abs(at(i).momentum) <= 0.5 * dk + 1e-9;
    if (holds_zero || std::abs(k) <= 0.5 * dk + 1e-9) continue;
    ridge.cusps.push_back({k, omega, (hi - lo + 1) * dk});
  }
  std::sort(ridge.cusps.begin(), ridge.cusps.end(), [](const Cusp& a, const Cusp& b) { return a.momentum < b.momentum; });
  return ridge;
}

double two_spinon_boundary(double k, double dq, double J) { return 4.0 * J * std::sin(k / 2) * std::sin(dq / 2); }

EnvelopeBand two_spinon_envelope(double k, double k_fermi, double J, int samples) {
  EnvelopeBand band;
  if (samples < 2) throw std::invalid_argument("two_spinon_envelope: need >= 2 samples");
  for (int i = 0; i < samples; ++i) {
    const double p = -k_fermi + 2.0 * k_fermi * i / (samples - 1);
    const double folded = std::remainder(p + k, 2.0 * kPi);
    if (std::abs(folded) < k_fermi - 1e-12) continue;
    const double omega = two_spinon_boundary(k, 2.0 * p + k, J);
    if (!band.allowed) {
      band.lower = band.upper = omega;
      band.allowed = true;
    } else {
      band.lower = std::min(band.lower, omega);
      band.upper = std::max(band.upper, omega);
    }
  }
  return band;
}

double envelope_mass_fraction(const QsfGrid& qsf, double k_fermi, double J, double omega_min, double k_inflate,
                              double omega_inflate) {
  constexpr int kShifts = 41;
  double total = 0.0, inside = 0.0;
  for (std::size_t m = 0; m < qsf.momenta.size(); ++m) {
    std::vector<EnvelopeBand> bands;
    for (int s = 0; s < kShifts; ++s) {
      const double k = qsf.momenta[m] - k_inflate + 2.0 * k_inflate * s / (kShifts - 1);
      const auto band = two_spinon_envelope(k, k_fermi, J);
      if (band.allowed) bands.push_back(band);
    }
    for (std::size_t n = 0; n < qsf.frequencies.size(); ++n) {
      const double w = qsf.frequencies[n];
      if (!(w > omega_min)) continue;
      const double a = qsf.magnitudes(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
      total += a;
      for (const auto& b : bands) {
        if (w >= b.lower - omega_inflate && w <= b.upper + omega_inflate) {
          inside += a;
          break;
        }
      }
    }
  }
  return total > 0.0 ? inside / total : 0.0;
}

double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int window) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("ssim: shape mismatch");
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const Eigen::Index wh = std::min<Eigen::Index>(window, a.rows());
  const Eigen::Index ww = std::min<Eigen::Index>(window, a.cols());
  const double n = static_cast<double>(wh * ww);
  if (n < 2) throw std::invalid_argument("ssim: window too small");
  double acc = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i + wh <= a.rows(); ++i) {
    for (Eigen::Index j = 0; j + ww <= a.cols(); ++j) {
      const auto x = a.block(i, j, wh, ww);
      const auto y = b.block(i, j, wh, ww);
      const double mx = x.mean(), my = y.mean();
      const double vx = (x.array() - mx).square().sum() / (n - 1);
      const double vy = (y.array() - my).square().sum() / (n - 1);
      const double cxy = ((x.array() - mx) * (y.array() - my)).sum() / (n - 1);
      acc += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return acc / count;
}

double ssim(const QsfGrid& a, const QsfGrid& b) { return ssim(a.magnitudes, b.magnitudes); }
double ssim(const TimeSeriesGrid& a, const TimeSeriesGrid& b) { return ssim(a.values, b.values); }

double rmse(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("rmse: shape mismatch");
  return std::sqrt((a - b).array().square().mean());
}
double rmse(const QsfGrid& a, const QsfGrid& b) { return rmse(a.magnitudes, b.magnitudes); }
double rmse(const TimeSeriesGrid& a, const TimeSeriesGrid& b) { return rmse(a.values, b.values); }

BootstrapResult bootstrap_metric(const std::function<double(std::span<const std::size_t>)>& metric,
                                 std::size_t n_samples, int n_boot, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("bootstrap: need at least two samples");
  if (n_boot < 2) throw std::invalid_argument("bootstrap: need at least two resamples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_samples - 1);
  std::vector<std::size_t> idx(n_samples);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n_boot));
  for (int b = 0; b < n_boot; ++b) {
    for (auto& i : idx) i = pick(rng);
    values.push_back(metric(idx));
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n_boot;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (n_boot - 1);
  return {mean, std::sqrt(var)};
}

BootstrapResult bootstrap_mean(std::span<const double> samples, int n_boot, std::uint64_t seed) {
  return bootstrap_metric(
      [&](std::span<const std::size_t> idx) {
        double s = 0.0;
        for (auto i : idx) s += samples[i];
        return s / static_cast<double>(idx.size());
      },
      samples.size(), n_boot, seed);
}

void write_timeseries_csv(std::ostream& os, const TimeSeriesGrid& grid) {
  os.precision(17);
  os << "t";
  for (int i = 0; i < grid.sites(); ++i) os << ",site" << i;
  os << "\n";
  for (int m = 0; m < grid.samples(); ++m) {
    os << grid.times[static_cast<std::size_t>(m)];
    for (int i = 0; i < grid.sites(); ++i) os << ',' << grid.values(i, m);
    os << "\n";
  }
}

TimeSeriesGrid read_timeseries_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("timeseries csv: empty input");
  const auto sites = static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<std::vector<double>> rows;
  TimeSeriesGrid g;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != sites + 1) throw std::runtime_error("timeseries csv: ragged row");
    g.times.push_back(row[0]);
    rows.push_back(std::move(row));
  }
  g.values.resize(sites, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t m = 0; m < rows.size(); ++m)
    for (int i = 0; i < sites; ++i) g.values(i, static_cast<Eigen::Index>(m)) = rows[m][static_cast<std::size_t>(i + 1)];
  return g;
}

void write_qsf_csv(std::ostream& os, const QsfGrid& qsf) {
  os.precision(17);
  os << "omega";
  for (double k : qsf.momenta) os << ',' << k;
  os << "\n";
  for (std::size_t n = 0; n < qsf.frequencies.size(); ++n) {
    os << qsf.frequencies[n];
    for (std::size_t m = 0; m < qsf.momenta.size(); ++m)
      os << ',' << qsf.magnitudes(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    os << "\n";
  }
}

void write_qsf_triplets(std::ostream& os, const QsfGrid& qsf) {
  os.precision(6);
  for (std::size_t m = 0; m < qsf.momenta.size(); ++m) {
    for (std::size_t n = 0; n < qsf.frequencies.size(); ++n)
      os << qsf.momenta[m] << ' ' << qsf.frequencies[n] << ' '
         << qsf.magnitudes(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) << "\n";
    os << "\n";
  }
}

void write_ridge(std::ostream& os, const SpectralRidge& ridge) {
  os.precision(17);
  os << "k,omega,magnitude,defined\n";
  for (const auto& p : ridge.points) os << p.momentum << ',' << p.omega << ',' << p.magnitude << ',' << p.defined << "\n";
  os << "# cusps: k,omega,k_uncertainty\n";
  for (const auto& c : ridge.cusps) os << "# " << c.momentum << ',' << c.omega << ',' << c.momentum_uncertainty << "\n";
}

}  // namespace qspec
