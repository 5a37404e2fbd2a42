// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "urllc/fading/covariance.hpp"
#include "urllc/fading/energy_cdf.hpp"
#include "urllc/fading/packet_variation.hpp"
#include "urllc/fading/spectrum.hpp"

using namespace urllc;
using namespace urllc::fading;

namespace {

ScatterEnvironment manual_env(std::vector<Vec2> scatterers, double wavelength = 0.1) {
  ScatterEnvironment env;
  env.scatterers = std::move(scatterers);
  env.tx_position = {10.0, 10.0};
  env.carrier_wavelength = wavelength;
  env.validate();
  return env;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST(Environment, SampleMatchesRecipe) {
  const auto env = sample_environment(100, {20.0, 20.0}, 3e9, 7);
  EXPECT_EQ(env.scatterers.size(), 100u);
  EXPECT_NEAR(env.carrier_wavelength, 0.09993, 1e-5);
  EXPECT_EQ(env.tx_position.x, 10.0);
  EXPECT_EQ(env.tx_position.y, 10.0);
  for (const auto& s : env.scatterers) EXPECT_TRUE(env.room().contains(s));
  const auto again = sample_environment(100, {20.0, 20.0}, 3e9, 7);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(env.scatterers[i].x, again.scatterers[i].x);
    EXPECT_EQ(env.scatterers[i].y, again.scatterers[i].y);
  }
  EXPECT_NE(sample_environment(100, {20.0, 20.0}, 3e9, 8).scatterers[0].x, env.scatterers[0].x);
}

TEST(Environment, RejectsBadArguments) {
  EXPECT_THROW(sample_environment(0, {20.0, 20.0}, 3e9, 1), InvalidArgument);
  EXPECT_THROW(sample_environment(5, {0.0, 20.0}, 3e9, 1), InvalidArgument);
  EXPECT_THROW(sample_environment(5, {20.0, 20.0}, -1.0, 1), InvalidArgument);
}

TEST(Environment, JsonRoundTrip) {
  const auto env = sample_environment(5, {12.0, 8.0}, 2.4e9, 3);
  const auto back = environment_from_json(nlohmann::json::parse(to_json(env).dump()));
  EXPECT_EQ(back.room_width, 12.0);
  EXPECT_EQ(back.seed, 3u);
  ASSERT_EQ(back.scatterers.size(), 5u);
  EXPECT_EQ(back.scatterers[4].y, env.scatterers[4].y);
  EXPECT_EQ(channel_at(back, {3.0, 3.0}), channel_at(env, {3.0, 3.0}));
  auto bad = to_json(env);
  bad["version"] = 2;
  EXPECT_THROW(environment_from_json(bad), InvalidArgument);
}

TEST(Channel, SingleScattererHasUnitMagnitude) {
  const auto env = sample_environment(1, {20.0, 20.0}, 3e9, 11);
  const auto tr = channel_trace(env, {{6.0, 7.0}, 10.0, 0.3}, uniform_times(0.0, 1e-3, 50));
  for (const auto& h : tr.coefficients) EXPECT_NEAR(std::abs(h), 1.0, 1e-12);
}

TEST(Channel, SinglePathPhase) {
  const auto env = manual_env({{13.0, 14.0}});
  const Vec2 rx{4.0, 6.0};
  const double d = distance(rx, {13.0, 14.0}) + 5.0;
  const auto h = channel_at(env, rx);
  EXPECT_NEAR(std::arg(h * std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * d / 0.1))), 0.0, 1e-9);
}

TEST(Channel, HalfWavelengthPathDifferenceCancels) {
  const double lambda = 0.1;
  // Tx (10,10), rx (10,12): a scatterer between them has total path 2; one at
  // (10+a, 11) has 2*sqrt(a^2+1), chosen to be 2 + lambda/2.
  const double a = std::sqrt(std::pow((2.0 + lambda / 2.0) / 2.0, 2) - 1.0);
  const auto env = manual_env({{10.0, 11.0}, {10.0 + a, 11.0}}, lambda);
  EXPECT_LT(std::abs(channel_at(env, {10.0, 12.0})), 1e-9);
}

TEST(Channel, EnsembleMeanEnergyIsOne) {
  const auto cdf = empirical_energy_cdf({100, {}, 3e9, 21}, 100000);
  EXPECT_NEAR(mean_of(cdf.sorted()), 1.0, 0.01);
}

TEST(Channel, MeanEnergyIsOneForSmallN) {
  for (std::size_t n : {1u, 2u, 5u}) {
    const auto cdf = empirical_energy_cdf({n, {}, 3e9, 5}, 100000);
    EXPECT_NEAR(mean_of(cdf.sorted()), 1.0, 0.02) << "n=" << n;
  }
}

TEST(Trace, StaticReceiverAndSingleSample) {
  const auto env = sample_environment(30, {20.0, 20.0}, 3e9, 2);
  const auto still = channel_trace(env, {{5.0, 5.0}, 0.0, 1.0}, uniform_times(0.0, 1e-3, 10));
  for (const auto& h : still.coefficients) EXPECT_EQ(h, still.coefficients.front());
  const double t0[] = {0.0};
  const auto one = channel_trace(env, {{5.0, 5.0}, 10.0, 1.0}, t0);
  EXPECT_EQ(one.coefficients.front(), channel_at(env, {5.0, 5.0}));
}

TEST(Trace, MagnitudeBoundedBySqrtN) {
  const auto env = sample_environment(16, {20.0, 20.0}, 3e9, 9);
  const auto tr = channel_trace(env, {{2.0, 2.0}, 10.0, 0.7}, uniform_times(0.0, 1e-4, 2000));
  for (const auto& h : tr.coefficients) EXPECT_LE(std::abs(h), 4.0 + 1e-12);
}

TEST(Trace, ExitingTheRoomNamesTheFirstTime) {
  const auto env = sample_environment(4, {20.0, 20.0}, 3e9, 1);
  try {
    channel_trace(env, {{19.0, 10.0}, 10.0, 0.0}, uniform_times(0.0, 0.05, 10));
    FAIL() << "expected TrajectoryExitsRoom";
  } catch (const TrajectoryExitsRoom& e) {
    EXPECT_NEAR(e.time(), 0.15, 1e-12);
  }
  const double bad[] = {0.0, 0.0};
  EXPECT_THROW(channel_trace(env, {{5.0, 5.0}, 1.0, 0.0}, bad), InvalidArgument);
}

TEST(EnergyCdf, ClosedForms) {
  EXPECT_EQ(rayleigh_energy_cdf(0.0), 0.0);
  EXPECT_NEAR(rayleigh_energy_cdf(std::log(2.0)), 0.5, 1e-15);
  EXPECT_THROW(rayleigh_energy_cdf(-1.0), InvalidArgument);
  EXPECT_THROW(rician_energy_cdf(0.5, -1.0), InvalidArgument);
  double worst = 0.0;
  for (double x = 0.0; x < 10.0; x += 0.01)
    worst = std::max(worst, std::fabs(rician_energy_cdf(x, 0.0) - rayleigh_energy_cdf(x)));
  EXPECT_LT(worst, 1e-10);
  EXPECT_LT(rician_energy_cdf(0.1, 5.0), rayleigh_energy_cdf(0.1));
}

TEST(EnergyCdf, RicianHasUnitMean) {
  for (double k : {0.5, 5.0}) {
    double mean = 0.0;
    const double dx = 1e-3;
    for (double x = 0.5 * dx; x < 30.0; x += dx) mean += (1.0 - rician_energy_cdf(x, k)) * dx;
    EXPECT_NEAR(mean, 1.0, 1e-4) << "K=" << k;
  }
}

TEST(EnergyCdf, LargeEnsembleIsRayleigh) {
  const auto cdf = empirical_energy_cdf({100, {}, 3e9, 4}, 400000);
  EXPECT_LT(cdf.ks_distance(rayleigh_energy_cdf), 0.005);
}

TEST(EnergyCdf, ThreadCountDoesNotChangeResult) {
  const EnsembleSpec spec{10, {}, 3e9, 77};
  const auto a = empirical_energy_cdf(spec, 20000, {1, 1000});
  const auto b = empirical_energy_cdf(spec, 20000, {3, 1000});
  EXPECT_EQ(a.sorted(), b.sorted());
}

TEST(Covariance, TheoreticalAnchors) {
  const double lambda = 0.1;
  EXPECT_EQ(theoretical_covariance(10.0, 0.0, lambda), 1.0);
  EXPECT_NEAR(theoretical_covariance(10.0, 0.3827 * lambda / 10.0, lambda), 0.0, 1e-3);
  EXPECT_LT(std::fabs(theoretical_covariance(10.0, 3.0 * lambda / 10.0, lambda)), 0.2);
  EXPECT_THROW(theoretical_covariance(1.0, 1.0, 0.0), InvalidArgument);
}

TEST(Covariance, InPhaseQuadratureDecorrelated) {
  const EnsembleSpec spec{100, {}, 3e9, 31};
  const std::vector<double> lags = {0.0};
  const auto est = empirical_covariance(spec, 10.0, lags, 20000);
  EXPECT_LT(std::fabs(est.in_quad.mean), 3.0 * est.in_quad.std_error());
  EXPECT_NEAR(est.energy.mean, 1.0, 4.0 * est.energy.std_error());
}

TEST(Covariance, IsotropicInHeading) {
  const EnsembleSpec spec{100, {}, 3e9, 41};
  const double lambda = spec.wavelength();
  std::vector<double> lags;
  for (int k = 0; k <= 8; ++k) lags.push_back(k * lambda / 8.0 / 10.0);
  const std::size_t n = 4000;
  const auto east = empirical_covariance(spec, 10.0, lags, n, {}, 0.0);
  const auto north = empirical_covariance(spec, 10.0, lags, n, {}, std::numbers::pi / 2.0);
  // Same environments, only the heading differs; the independent-sample bound is conservative.
  const double tol = 4.0 * std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < lags.size(); ++k) EXPECT_LT(std::abs(east.mean[k] - north.mean[k]), tol) << k;
}

TEST(Covariance, Deterministic) {
  const EnsembleSpec spec{20, {}, 3e9, 3};
  const std::vector<double> lags = {0.0, 1e-3};
  const auto a = empirical_covariance(spec, 10.0, lags, 500, {1, 64});
  const auto b = empirical_covariance(spec, 10.0, lags, 500, {3, 64});
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_THROW(empirical_covariance(spec, 10.0, {1e-3, 0.0}, 10), InvalidArgument);
}

TEST(Spectrum, RejectsUnresolvableSetups) {
  const EnsembleSpec spec{};
  PsdOptions slow;
  slow.sample_rate = 1000.0;  // below 20x Doppler (2 kHz at 10 m/s)
  try {
    psd_estimate(spec, slow);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("sample rate"), std::string::npos);
  }
  PsdOptions shortt;
  shortt.duration = 0.5;  // 5 m < 100 wavelengths
  EXPECT_THROW(psd_estimate(spec, shortt), InvalidArgument);
}

class SpectrumFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    PsdOptions o;
    o.n_traces = 60;
    est_ = psd_estimate(EnsembleSpec{100, {}, 3e9, 13}, o);
  }
  static inline PsdEstimate est_;
};

TEST_F(SpectrumFixture, InvariantsHold) {
  const auto& sp = est_.spectrum;
  for (double p : sp.power_density) EXPECT_GE(p, 0.0);
  EXPECT_NEAR(sp.integral() / sp.total_energy, 1.0, 1e-9);
  EXPECT_EQ(sp.frequencies.front(), 0.0);
}

TEST_F(SpectrumFixture, ParsevalAgainstTraceVariance) {
  EXPECT_NEAR(est_.spectrum.total_energy / est_.trace_variance, 1.0, 0.01);
}

TEST_F(SpectrumFixture, MassInsideDopplerBand) {
  const double edge = 1.0 / wavelength_for(3e9);
  EXPECT_GE(est_.spectrum.band_fraction(edge), 0.99);
}

TEST_F(SpectrumFixture, BandwidthBasics) {
  const auto& sp = est_.spectrum;
  EXPECT_THROW(energy_bandwidth(sp, 1.0), InvalidArgument);
  EXPECT_THROW(energy_bandwidth(sp, 0.0), InvalidArgument);
  EXPECT_NEAR(energy_bandwidth(sp, 1.0 - 1e-15), sp.frequencies.back(), sp.bin_width);
  EXPECT_LT(energy_bandwidth(sp, 0.9), energy_bandwidth(sp, 0.99));
}

TEST_F(SpectrumFixture, UnbandlimitednessWitness) {
  const auto& sp = est_.spectrum;
  EXPECT_GT(energy_bandwidth(sp, 0.9999), 2.0 * energy_bandwidth(sp, 0.99));
}

TEST(Spectrum, HannSidelobeFloor) {
  const std::size_t n = 256;
  const auto w = dsp::window_taps(Window::Hann, n);
  dsp::Fft fft(n * 16);
  auto* y = fft.data();
  for (std::size_t k = 0; k < n * 16; ++k) y[k] = k < n ? w[k] : 0.0;
  fft.run();
  const double peak = std::norm(y[0]);
  // Beyond ten bins from the main lobe the leakage sits below -60 dB.
  double worst = 0.0;
  for (std::size_t k = 16 * 10; k < n * 8; ++k) worst = std::max(worst, std::norm(y[k]) / peak);
  EXPECT_LT(10.0 * std::log10(worst), -60.0);
}

TEST(PacketVariation, StaticReceiverHasNoVariation) {
  PacketVariationOptions o;
  o.speed = 0.0;
  const auto pv = within_packet_variation({30, {}, 3e9, 1}, o);
  EXPECT_EQ(pv.all.sorted.back(), 0.0);
  EXPECT_GT(pv.conditioned.size(), 0u);
  EXPECT_LE(pv.conditioned.size(), pv.all.size());
}

TEST(PacketVariation, RejectsUnderSampledRuns) {
  PacketVariationOptions o;
  o.n_trials = 100;
  EXPECT_THROW(within_packet_variation({}, o), InvalidArgument);
  o.n_trials = 10000;
  o.points = 10;
  EXPECT_THROW(within_packet_variation({}, o), InvalidArgument);
}
