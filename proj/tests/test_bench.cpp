#include "eegscrub/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace eegscrub;

namespace {

const std::vector<NoiseKind> kAllKinds = {NoiseKind::awgn, NoiseKind::powerline, NoiseKind::baseline_wander,
                                          NoiseKind::emg_burst, NoiseKind::blink};

}  // namespace

TEST(QuantileTest, HandValues) {
  // Type-7 quantiles of {1,2,3,4}: position q*(n-1).
  const std::vector<double> v = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.75), 3.25);
  EXPECT_DOUBLE_EQ(iqr(v), 1.5);
  EXPECT_DOUBLE_EQ(quantile({7.0}, 0.9), 7.0);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(SurrogateTest, ShapeNamesAndDeterminism) {
  const auto a = clean_surrogate(512, 256, 3);
  const auto b = clean_surrogate(512, 256, 3);
  const auto c = clean_surrogate(512, 256, 4);
  ASSERT_EQ(a.channel_count(), 4u);
  EXPECT_EQ(a.names(), surrogate_channel_names());
  EXPECT_EQ(a.size(), 512u);
  const auto vec = [](const Recording& r) { return std::vector<double>(r.channel(0).samples().begin(), r.channel(0).samples().end()); };
  EXPECT_EQ(vec(a), vec(b));
  EXPECT_NE(vec(a), vec(c));
}

TEST(ContaminateTest, AchievedSnrMatchesTargetAcrossGrid) {
  for (const auto kind : kAllKinds) {
    for (const double snr : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto scene = contaminate(clean_surrogate(1024, 256, seed), NoiseSpec::make(kind), snr, seed);
        for (std::size_t c = 0; c < scene.noisy.channel_count(); ++c) {
          const auto m = compute_metrics(scene.clean.channel(c), scene.noisy.channel(c));
          EXPECT_NEAR(m.snr_db, snr, 1e-6) << to_string(kind) << " snr " << snr << " seed " << seed;
        }
      }
    }
  }
}

TEST(BenchTest, RowCountAndOrder) {
  BenchGrid g;
  g.methods = {"identity", "dwt"};
  g.noises = {NoiseKind::powerline, NoiseKind::awgn};
  g.snrs_db = {5, -5, 0};
  g.seeds = {0, 1, 2};
  g.n_samples = 512;
  const auto rows = run_bench(g);
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto key = [](const BenchRow& r) { return std::make_tuple(r.method, std::string(to_string(r.noise)), r.snr_db); };
    EXPECT_LT(key(rows[i - 1]), key(rows[i]));
  }
  for (const auto& r : rows) EXPECT_EQ(r.runs, 3u);
  const auto tables = bench_tables_json(rows);
  EXPECT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables["awgn"].size(), 6u);
}

TEST(BenchTest, IdentityControlHasZeroGain) {
  BenchGrid g;
  g.methods = {"identity"};
  g.seeds = {0, 1, 2, 3};
  g.n_samples = 512;
  const auto rows = run_bench(g);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].median_snr_gain_db, 0.0, 1e-9);
  EXPECT_NEAR(rows[0].median_rmse_ratio, 1.0, 1e-12);
  EXPECT_EQ(rows[0].failures, 0u);
}

TEST(BenchTest, DwtOnAwgnGainsFiveDb) {
  BenchGrid g;
  g.methods = {"dwt"};
  const auto rows = run_bench(g);  // 20 default seeds, 0 dB, 2048 samples
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].runs, 20u);
  EXPECT_GE(rows[0].median_snr_gain_db, 5.0);
}

TEST(BenchTest, Deterministic) {
  BenchGrid g;
  g.methods = {"dwt", "akf"};
  g.noises = {NoiseKind::emg_burst};
  g.seeds = {5, 6};
  g.n_samples = 512;
  std::ostringstream a, b;
  write_leaderboard_csv(a, run_bench(g));
  write_leaderboard_csv(b, run_bench(g));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, 7), "method,");
}

TEST(BenchTest, MethodFailuresAreRecordedNotRaised) {
  BenchGrid g;
  g.methods = {"ssa_cca"};
  g.seeds = {0, 1};
  g.n_samples = 256;  // 1 s at 256 Hz; SSA-CCA needs 2 s
  std::vector<BenchRow> rows;
  ASSERT_NO_THROW(rows = run_bench(g));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].failures, 2u);
  EXPECT_EQ(rows[0].errors.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].median_snr_gain_db));
}

TEST(BenchTest, Preconditions) {
  BenchGrid g;
  g.methods = {};
  EXPECT_THROW(run_bench(g), Error);
  g.methods = {"nope"};
  EXPECT_THROW(run_bench(g), Error);
}

TEST(BenchInputsTest, PowerlineSuppliesReference) {
  const auto in = bench_inputs(NoiseSpec::make(NoiseKind::powerline), 512, 256);
  ASSERT_EQ(in.references.size(), 1u);
  EXPECT_EQ(in.references[0].size(), 512u);
  EXPECT_TRUE(in.blink_template.has_value());
  EXPECT_TRUE(bench_inputs(NoiseSpec::make(NoiseKind::awgn), 512, 256).references.empty());
}
