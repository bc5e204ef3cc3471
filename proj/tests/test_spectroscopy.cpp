#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "oracle_values.hpp"
#include "qspec/spectroscopy.hpp"

using namespace qspec;

namespace {
constexpr double kPi = std::numbers::pi;

TimeSeriesGrid grid(int L, int N, double T, const std::function<double(int, double)>& f) {
  TimeSeriesGrid g;
  g.times = uniform_times(T, N);
  g.values.resize(L, N);
  for (int i = 0; i < L; ++i)
    for (int m = 0; m < N; ++m) g.values(i, m) = f(i, g.times[static_cast<std::size_t>(m)]);
  return g;
}
}  // namespace

TEST(Padding, HardwareGrid) {
  const auto p = padding_info(30, 0.1, 6.0);
  EXPECT_EQ(p.n_padded, 315);
  EXPECT_EQ(p.fft_length, 630);
  EXPECT_NEAR(p.d_omega, 2 * kPi / 3, 1e-12);
  EXPECT_NEAR(p.d_omega_fine, kPi / 31.5, 1e-12);
  EXPECT_NEAR(p.padded_window, 31.5, 1e-12);
}

TEST(Padding, RejectsBadInput) {
  EXPECT_THROW(padding_info(3, 0.1, 6.0), std::invalid_argument);
  EXPECT_THROW(padding_info(30, 0.0, 6.0), std::invalid_argument);
}

TEST(Qsf, MatchesIndependentTransform) {
  const auto g = grid(5, 30, 3.0, [](int x, double t) { return std::sin(0.7 * x + 1.3 * t) + 0.1 * x * t; });
  const QsfGrid q = qsf_transform(g);
  ASSERT_EQ(static_cast<int>(q.frequencies.size()), 2 * oracle::kQsfNmax + 1);
  for (std::size_t i = 0; i < std::size(oracle::kQsfPickValue); ++i)
    EXPECT_NEAR(q.magnitudes(oracle::kQsfPickRow[i], oracle::kQsfPickCol[i]), oracle::kQsfPickValue[i], 1e-12) << i;
}

TEST(Qsf, MomentumAndFrequencyAxes) {
  const auto g = grid(6, 30, 3.0, [](int x, double t) { return std::cos(x + t); });
  const QsfGrid q = qsf_transform(g);
  ASSERT_EQ(q.momenta.size(), 6u);
  EXPECT_NEAR(q.momenta.front(), -kPi, 1e-15);
  EXPECT_NEAR(q.momenta[3], 0.0, 1e-15);
  for (std::size_t n = 0; n < q.frequencies.size(); ++n)
    EXPECT_NEAR(q.frequencies[n], -q.frequencies[q.frequencies.size() - 1 - n], 1e-12);
  EXPECT_LE(q.frequencies.back(), 6.0);
  EXPECT_NEAR(q.magnitudes.maxCoeff(), 1.0, 1e-15);
}

TEST(Qsf, ScaleInvarianceAndZeroSignal) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  auto g = grid(7, 30, 3.0, [&](int, double) { return nd(rng); });
  const QsfGrid a = qsf_transform(g);
  g.values *= 1e-3;
  EXPECT_LT((qsf_transform(g).magnitudes - a.magnitudes).cwiseAbs().maxCoeff(), 1e-12);
  g.values.setZero();
  EXPECT_TRUE(qsf_transform(g).all_zero);
}

TEST(Qsf, PureToneRecoveredWithinOneBin) {
  for (double w0 : {1.7, 3.3, 4.9}) {
    const auto g = grid(4, 30, 3.0, [&](int x, double t) { return x == 1 ? std::cos(w0 * t) : 0.0; });
    const QsfGrid q = qsf_transform(g);
    Eigen::Index r = 0, c = 0;
    q.magnitudes.maxCoeff(&r, &c);
    // the mirrored -w0 lobe pulls the peak by up to about a fine bin at T = 3
    EXPECT_NEAR(std::abs(q.frequencies[static_cast<std::size_t>(c)]), w0, 2 * q.padding.d_omega_fine) << w0;
  }
}

TEST(Qsf, PlaneWaveLandsOnItsMomentum) {
  const int L = 8;
  const auto g = grid(L, 30, 3.0, [&](int x, double t) { return std::cos(2 * kPi * 3 * x / L) * std::cos(2.0 * t); });
  const QsfGrid q = qsf_transform(g);
  Eigen::Index r = 0, c = 0;
  q.magnitudes.maxCoeff(&r, &c);
  EXPECT_NEAR(std::abs(q.momenta[static_cast<std::size_t>(r)]), 2 * kPi * 3 / L, 1e-12);
}

TEST(Qsf, RejectsShiftedOrNonUniformGrid) {
  auto g = grid(3, 10, 1.0, [](int, double t) { return t; });
  g.times[4] += 0.01;
  EXPECT_THROW(qsf_transform(g), std::invalid_argument);
  auto h = grid(3, 10, 1.0, [](int, double t) { return t; });
  for (auto& t : h.times) t += 0.5;
  EXPECT_THROW(qsf_transform(h), std::invalid_argument);
}

TEST(RawTransform, Parseval) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  const auto g = grid(5, 12, 1.2, [&](int, double) { return nd(rng); });
  const auto f = raw_transform(g);
  EXPECT_NEAR(f.squaredNorm() / (5.0 * 12.0), g.values.squaredNorm(), 1e-10);
}

TEST(Ridge, SyntheticDomeRecovered) {
  // |QSF| peaked along 4 sin^2(k/2)
  QsfGrid q;
  q.padding = padding_info(30, 0.1, 6.0);
  const double dw = q.padding.d_omega_fine;
  for (int n = -60; n <= 60; ++n) q.frequencies.push_back(n * dw);
  const int L = 12;
  q.magnitudes.resize(L, 121);
  for (int m = 0; m < L; ++m) {
    const double k = 2 * kPi * m / L - kPi;
    q.momenta.push_back(k);
    const double w0 = 4 * std::sin(k / 2) * std::sin(k / 2);
    for (int n = 0; n < 121; ++n) q.magnitudes(m, n) = std::exp(-std::pow(q.frequencies[n] - w0, 2) / 0.5) + 0.01;
  }
  const auto ridge = extract_ridge(q);
  for (const auto& p : ridge.points) {
    const double w0 = 4 * std::sin(p.momentum / 2) * std::sin(p.momentum / 2);
    if (w0 > 2 * dw) EXPECT_NEAR(p.omega, w0, dw) << p.momentum;
  }
}

TEST(Ridge, CuspAwayFromZeroAndFlatRows) {
  QsfGrid q;
  q.padding = padding_info(30, 0.1, 6.0);
  for (int n = -20; n <= 20; ++n) q.frequencies.push_back(n * 0.1);
  const int L = 9;
  const std::vector<double> peak{1.2, 0.2, 0.9, 0.3, 0.1, 0.3, 0.9, 0.2, 1.2};  // minima at 0 and +-2 bins
  q.magnitudes.resize(L, 41);
  for (int m = 0; m < L; ++m) {
    q.momenta.push_back(2 * kPi * m / L - kPi);
    for (int n = 0; n < 41; ++n) q.magnitudes(m, n) = std::exp(-std::pow(q.frequencies[n] - peak[m], 2) / 0.02);
  }
  const auto ridge = extract_ridge(q);
  ASSERT_EQ(ridge.cusps.size(), 2u);
  EXPECT_NEAR(std::abs(ridge.cusps[1].momentum), std::abs(q.momenta[7]), 2 * kPi / L);
  q.magnitudes.row(3).setConstant(0.5);
  EXPECT_FALSE(extract_ridge(q).points[3].defined);
}

TEST(Envelope, BoundaryShape) {
  EXPECT_NEAR(two_spinon_boundary(kPi, kPi, 1.0), 4.0, 1e-15);
  const auto band = two_spinon_envelope(kPi / 2, kPi / 3, 1.0);
  EXPECT_TRUE(band.allowed);
  EXPECT_LE(band.lower, band.upper);
  EXPECT_LE(band.upper, 4.0 + 1e-12);
}

TEST(Metrics, SsimAndRmse) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd a(9, 40);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(rmse(a, a), 0.0, 1e-15);
  Eigen::MatrixXd b = a;
  b(2, 3) += 0.5;
  EXPECT_LT(ssim(a, b), 1.0);
  EXPECT_NEAR(rmse(a, b), 0.5 / std::sqrt(360.0), 1e-12);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}

TEST(Bootstrap, MeanAndError) {
  std::vector<double> s(400);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(2.0, 1.0);
  for (auto& v : s) v = nd(rng);
  const auto r = bootstrap_mean(s, 2000, 9);
  EXPECT_NEAR(r.mean, 2.0, 0.15);
  EXPECT_NEAR(r.stderr_estimate, 0.05, 0.01);
}

TEST(Csv, TimeseriesRoundTripIsExact) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  auto g = grid(4, 10, 1.0, [&](int, double) { return nd(rng); });
  std::stringstream ss;
  write_timeseries_csv(ss, g);
  const auto h = read_timeseries_csv(ss);
  EXPECT_EQ(h.values, g.values);
  EXPECT_EQ(h.times, g.times);
}
