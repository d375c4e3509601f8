#include "eegscrub/filter.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace eegscrub;

namespace {

constexpr double kFs = 256.0;

Signal make(std::vector<double> x, double fs = kFs) { return Signal(std::move(x), fs); }

}  // namespace

TEST(SignalTest, RejectsInvalidConstruction) {
  EXPECT_THROW(Signal({}, 256.0), Error);
  EXPECT_THROW(Signal({1.0}, 0.0), Error);
  EXPECT_THROW(Signal({1.0, std::nan("")}, 256.0), Error);
}

TEST(RecordingTest, RequiresMatchingChannelsAndUniqueNames) {
  Signal a({1, 2, 3}, 256), b({1, 2}, 256);
  EXPECT_THROW(Recording({a, b}, {"TP9", "AF7"}), Error);
  EXPECT_THROW(Recording({a, a}, {"TP9", "TP9"}), Error);
  Recording r({a, a}, {"TP9", "AF7"});
  EXPECT_EQ(r.index_of("AF7"), 1u);
  EXPECT_THROW(r.index_of("Cz"), Error);
}

TEST(ApplyFilterTest, BandpassRetainsInBandTone) {
  const auto x = oracle::sine(1024, kFs, 10.0);
  const auto y = apply_filter(make(x), FilterSpec::bandpass(8.0, 13.0, 4));
  ASSERT_EQ(y.size(), x.size());
  const std::size_t bin = 40;  // 10 Hz at 0.25 Hz resolution
  EXPECT_GE(oracle::dft_power(y.values(), bin) / oracle::dft_power(x, bin), 0.97);
}

TEST(ApplyFilterTest, NotchRemovesMainsTone) {
  // Interior RMS: the first and last second hold the start-up transient of the
  // narrow notch.
  const auto x = oracle::sine(2048, kFs, 50.0);
  const auto y = apply_filter(make(x), FilterSpec::notch(50.0, 30.0));
  EXPECT_LT(oracle::rms(y.values(), 256, 2048 - 256), 0.01 * oracle::rms(x));
}

TEST(ApplyFilterTest, ZeroInZeroOut) {
  const auto y = apply_filter(make(std::vector<double>(500, 0.0)), FilterSpec::eeg_default());
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(ApplyFilterTest, IsLinear) {
  const auto x = oracle::gaussian(700, 1);
  const auto y = oracle::gaussian(700, 2);
  const double a = 1.7, b = -0.6;
  std::vector<double> combo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) combo[i] = a * x[i] + b * y[i];
  for (const auto& spec : {FilterSpec::eeg_default(), FilterSpec::notch(50.0), FilterSpec::highpass(1.0, 3),
                           FilterSpec::lowpass(30.0, 5)}) {
    const auto fx = apply_filter(make(x), spec).values();
    const auto fy = apply_filter(make(y), spec).values();
    const auto fc = apply_filter(make(combo), spec).values();
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ref = a * fx[i] + b * fy[i];
      scale = std::max(scale, std::abs(ref));
      err = std::max(err, std::abs(ref - fc[i]));
    }
    EXPECT_LE(err, 1e-9 * scale);
  }
}

TEST(ApplyFilterTest, ZeroPhaseHasNoLag) {
  const auto x = oracle::sine(1024, kFs, 10.0, 1.0, 0.3);
  const auto y = apply_filter(make(x), FilterSpec::bandpass(8.0, 13.0, 4)).values();
  int best_lag = 99;
  double best = -1e300;
  for (int lag = -12; lag <= 12; ++lag) {
    double s = 0.0;
    for (int i = 100; i < 900; ++i) s += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + lag)];
    if (s > best) best = s, best_lag = lag;
  }
  EXPECT_EQ(best_lag, 0);
}

TEST(ApplyFilterTest, ErrorPaths) {
  const auto sig = make(oracle::sine(512, kFs, 10.0));
  try {
    apply_filter(sig, FilterSpec::lowpass(128.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_spec);
  }
  EXPECT_THROW(apply_filter(sig, FilterSpec::bandpass(13.0, 8.0)), Error);
  try {
    apply_filter(make({1, 2, 3, 4, 5}), FilterSpec::bandpass(8.0, 13.0, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::too_short);
  }
}

TEST(DesignSosTest, ButterworthHalfPowerAtCorner) {
  const auto lp = design_sos(FilterSpec::lowpass(30.0, 4), kFs);
  EXPECT_NEAR(std::abs(frequency_response(lp, 30.0, kFs)), std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(std::abs(frequency_response(lp, 0.0, kFs)), 1.0, 1e-12);
  const auto bp = design_sos(FilterSpec::bandpass(8.0, 13.0, 4), kFs);
  EXPECT_NEAR(std::abs(frequency_response(bp, 8.0, kFs)), std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(std::abs(frequency_response(bp, 13.0, kFs)), std::sqrt(0.5), 1e-9);
  const auto hp = design_sos(FilterSpec::highpass(0.5, 2), kFs);
  EXPECT_NEAR(std::abs(frequency_response(hp, 128.0, kFs)), 1.0, 1e-12);
}

TEST(SegmentEpochsTest, CountsAndLengths) {
  const auto sig = make(std::vector<double>(1024, 1.0));
  auto e = segment_epochs(sig, 1.0, 0.0);
  ASSERT_EQ(e.size(), 4u);
  for (const auto& ep : e) EXPECT_EQ(ep.size(), 256u);
  EXPECT_EQ(segment_epochs(sig, 1.0, 0.5).size(), 7u);
  EXPECT_TRUE(segment_epochs(make(std::vector<double>(100, 1.0)), 1.0, 0.0).empty());
  EXPECT_THROW(segment_epochs(sig, 1.0 / 512.0, 0.0), Error);
  EXPECT_THROW(segment_epochs(sig, 1.0, 1.0), Error);
}

TEST(SegmentEpochsTest, NonOverlappingConcatenationIsPrefix) {
  const auto x = oracle::gaussian(1000, 5);
  const auto epochs = segment_epochs(make(x), 0.7, 0.0);
  std::vector<double> joined;
  for (const auto& e : epochs) joined.insert(joined.end(), e.values().begin(), e.values().end());
  ASSERT_LE(joined.size(), x.size());
  EXPECT_TRUE(std::equal(joined.begin(), joined.end(), x.begin()));
}

TEST(NormalizeTest, ZscoreMinmaxAndConstantColumn) {
  Matrix m(3, 3);
  const double cols[3][3] = {{1, 2, 3}, {2, 4, 6}, {5, 5, 5}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = cols[c][r];
  auto [z, zs] = normalize(m, NormMode::zscore);
  EXPECT_NEAR(z(0, 0), -1.224744871391589, 1e-12);
  EXPECT_NEAR(z(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(z(2, 0), 1.224744871391589, 1e-12);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(z(r, 2), 0.0);
  auto [mm, ms] = normalize(m, NormMode::minmax);
  EXPECT_DOUBLE_EQ(mm(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(mm(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(mm(2, 1), 1.0);
}

TEST(NormalizeTest, SuppliedStatsAreAppliedNotRecomputed) {
  Matrix train(2, 1), test(2, 1);
  train(0, 0) = 0, train(1, 0) = 10;
  test(0, 0) = 20, test(1, 0) = 30;
  auto [tn, st] = normalize(train, NormMode::minmax);
  auto [out, st2] = normalize(test, NormMode::minmax, st);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 3.0);
  EXPECT_EQ(st, st2);
}

TEST(NormalizeTest, ZscoreRoundTripProperty) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto v = oracle::gaussian(60, seed, 3.0 + seed);
    Matrix m(20, 3);
    for (std::size_t i = 0; i < 60; ++i) m.data()[i] = v[i] + 10.0 * seed;
    auto [z, st] = normalize(m, NormMode::zscore);
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0, var = 0;
      for (std::size_t r = 0; r < 20; ++r) mean += z(r, c);
      mean /= 20;
      for (std::size_t r = 0; r < 20; ++r) var += (z(r, c) - mean) * (z(r, c) - mean);
      EXPECT_NEAR(mean, 0.0, 1e-9);
      EXPECT_NEAR(var / 20, 1.0, 1e-9);
    }
    const auto back = denormalize(z, st);
    for (std::size_t i = 0; i < 60; ++i) EXPECT_NEAR(back.data()[i], m.data()[i], 1e-9 * std::abs(m.data()[i]) + 1e-12);
  }
}

TEST(NormalizeTest, SignalOverload) {
  auto [s, st] = normalize(make({2, 4, 6}), NormMode::minmax);
  EXPECT_EQ(s.values(), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(s.fs(), kFs);
}

TEST(MovingAverageTest, Examples) {
  EXPECT_EQ(moving_average(make({1, 1, 1, 1}), 3).values(), (std::vector<double>{1, 1, 1, 1}));
  const auto y = moving_average(make({0, 3, 0}), 3).values();
  for (double v : y) EXPECT_DOUBLE_EQ(v, 1.0);
  std::vector<double> imp(9, 0.0);
  imp[4] = 1.0;
  const auto b = moving_average(make(imp), 3).values();
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(b[i], (i >= 3 && i <= 5) ? 1.0 / 3.0 : 0.0);
}

TEST(MovingAverageTest, RejectsBadWidth) {
  EXPECT_THROW(moving_average(make({1, 2, 3, 4}), 2), Error);
  EXPECT_THROW(moving_average(make({1, 2, 3}), 5), Error);
}
