#include "eegscrub/dataset_io.hpp"
#include "eegscrub/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eegscrub;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "eegscrub_io_test";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

// ------------------------------------------------------------------ feature CSV

TEST(FeatureCsvTest, ShapeAndLabels) {
  const auto p = temp_file("three.csv",
                           "a,b,label,c\n"
                           "1.5,2,POSITIVE,-3e2\n"
                           "0,0,negative,1\n"
                           "4,5,Neutral,6\n");
  const auto ds = load_feature_csv(p.string());
  EXPECT_EQ(ds.features.n_rows(), 3u);
  EXPECT_EQ(ds.features.n_cols(), 3u);
  EXPECT_EQ(ds.features.feature_names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(*ds.features.labels, (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(ds.features.rows[0], (std::vector<double>{1.5, 2.0, -300.0}));
  EXPECT_EQ(ds.class_names, (std::vector<std::string>{"NEGATIVE", "NEUTRAL", "POSITIVE"}));
  EXPECT_EQ(ds.source, p.string());
}

TEST(FeatureCsvTest, LoadingTwiceIsIdentical) {
  const auto p = temp_file("twice.csv", "# mean_0_a,x,label\n1,2,1\n3,4,0\n5,6,2\n");
  const auto a = load_feature_csv(p.string());
  const auto b = load_feature_csv(p.string());
  EXPECT_EQ(a.features.rows, b.features.rows);
  EXPECT_EQ(*a.features.labels, *b.features.labels);
  EXPECT_EQ(a.features.feature_names.front(), "# mean_0_a");
}

TEST(FeatureCsvTest, NonNumericCellNamesRowAndColumn) {
  const auto p = temp_file("bad_cell.csv", "f1,f2,label\n1,2,POSITIVE\n3,abc,NEUTRAL\n");
  const auto msg = error_text([&] { load_feature_csv(p.string()); });
  EXPECT_NE(msg.find("bad_cell.csv"), std::string::npos) << msg;
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'f2'"), std::string::npos) << msg;
}

TEST(FeatureCsvTest, ContractErrors) {
  std::istringstream empty("");
  EXPECT_THROW(read_feature_csv(empty, "e.csv"), Error);
  std::istringstream nolabel("a,b\n1,2\n");
  EXPECT_NE(error_text([&] { read_feature_csv(nolabel, "n.csv"); }).find("label"), std::string::npos);
  std::istringstream unknown("a,label\n1,HAPPY\n");
  const auto msg = error_text([&] { read_feature_csv(unknown, "u.csv"); });
  EXPECT_NE(msg.find("row 2"), std::string::npos);
  EXPECT_NE(msg.find("HAPPY"), std::string::npos);
  std::istringstream ragged("a,b,label\n1,2\n");
  EXPECT_THROW(read_feature_csv(ragged, "r.csv"), Error);
  std::istringstream nan("a,label\nnan,POSITIVE\n");
  EXPECT_THROW(read_feature_csv(nan, "nan.csv"), Error);
  EXPECT_THROW(load_feature_csv("/nonexistent/dir/file.csv"), Error);
}

TEST(FeatureCsvTest, CustomLabelColumnAndQuotedCells) {
  std::istringstream is("\"x, y\",emotion\r\n\"1.25\",\"POSITIVE\"\r\n");
  const auto ds = read_feature_csv(is, "q.csv", "emotion");
  EXPECT_EQ(ds.features.feature_names.front(), "x, y");
  EXPECT_EQ(ds.features.rows[0][0], 1.25);
  EXPECT_EQ(ds.features.labels->front(), 2);
}

TEST(FeatureCsvTest, OptionalLabelColumn) {
  std::istringstream is("a,b\n1,2\n3,4\n");
  const auto ds = read_feature_csv(is, "u.csv", "label", true);
  EXPECT_FALSE(ds.features.labels.has_value());
  EXPECT_EQ(ds.features.n_cols(), 2u);
  EXPECT_EQ(ds.features.n_rows(), 2u);
}

TEST(FeatureCsvTest, WriteThenReadRoundTrips) {
  FeatureMatrix fm;
  fm.feature_names = {"TP9_delta", "TP9_theta"};
  fm.rows = {{0.1, 1.0 / 3.0}, {-2.5e-7, 12345.678}};
  fm.labels = std::vector<int>{0, 2};
  std::stringstream ss;
  write_feature_csv(ss, fm);
  const auto back = read_feature_csv(ss, "mem");
  EXPECT_EQ(back.features.feature_names, fm.feature_names);
  EXPECT_EQ(back.features.rows, fm.rows);
  EXPECT_EQ(*back.features.labels, *fm.labels);
}

// ------------------------------------------------------------------ raw CSV

TEST(RawCsvTest, FourChannelsTwoSeconds) {
  std::ostringstream os;
  os << "TP9,AF7,AF8,TP10\n";
  for (int i = 0; i < 512; ++i) os << i << ',' << -i << ',' << 0.5 * i << ",1\n";
  const auto p = temp_file("raw.csv", os.str());
  const auto r = load_raw_csv(p.string());
  EXPECT_EQ(r.recording.channel_count(), 4u);
  EXPECT_EQ(r.recording.size(), 512u);
  EXPECT_DOUBLE_EQ(static_cast<double>(r.recording.size()) / r.recording.fs(), 2.0);
  EXPECT_EQ(r.recording.names(), (std::vector<std::string>{"TP9", "AF7", "AF8", "TP10"}));
  EXPECT_EQ(r.recording.channel(2)[10], 5.0);
  EXPECT_EQ(r.rejected_rows, 0u);
  EXPECT_FALSE(r.dropped_timestamp);
}

TEST(RawCsvTest, TimestampDroppedAndNonFiniteRowsRejected) {
  std::istringstream is(
      "timestamps,TP9,AF7,AF8,TP10\n"
      "0.000,1.0,2.0,3.0,4.0\n"
      "0.004,1.0,2.0,NaN,4.0\n"
      "0.008,5.0,6.0,7.0,8.0\n");
  const auto r = read_raw_csv(is, "ts.csv", 250.0);
  EXPECT_TRUE(r.dropped_timestamp);
  EXPECT_EQ(r.recording.channel_count(), 4u);
  EXPECT_EQ(r.recording.size(), 2u);
  EXPECT_EQ(r.rejected_rows, 1u);
  EXPECT_EQ(r.recording.fs(), 250.0);
  EXPECT_EQ(r.recording.channel(0).values(), (std::vector<double>{1.0, 5.0}));
}

TEST(RawCsvTest, ContractErrors) {
  std::istringstream ragged("A,B\n1,2\n3\n");
  EXPECT_NE(error_text([&] { read_raw_csv(ragged, "rg.csv"); }).find("row 3"), std::string::npos);
  std::istringstream only_ts("timestamp\n0.1\n");
  EXPECT_THROW(read_raw_csv(only_ts, "ts.csv"), Error);
  std::istringstream text("A,B\n1,zz\n");
  const auto msg = error_text([&] { read_raw_csv(text, "t.csv"); });
  EXPECT_NE(msg.find("'B'"), std::string::npos);
  std::istringstream all_bad("A\nnan\ninf\n");
  EXPECT_THROW(read_raw_csv(all_bad, "b.csv"), Error);
}

TEST(RawCsvTest, WriteThenReadRoundTrips) {
  const Recording rec({Signal({0.1, -0.2, 1e-9}, 128.0), Signal({3, 4, 5}, 128.0)}, {"X", "Y"});
  std::stringstream ss;
  write_raw_csv(ss, rec);
  const auto back = read_raw_csv(ss, "mem", 128.0).recording;
  EXPECT_EQ(back.names(), rec.names());
  for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(back.channel(c).values(), rec.channel(c).values());
}

// ------------------------------------------------------------------ reports

TEST(ReportTest, EvaluationHasCountsAndF1) {
  const auto ev = evaluate_predictions({0, 1, 2, 2}, {0, 1, 1, 2}, emotion_class_names());
  const auto j = to_json(ev);
  ASSERT_EQ(j.at("confusion_matrix").size(), 3u);
  for (const auto& row : j.at("confusion_matrix")) EXPECT_EQ(row.size(), 3u);
  ASSERT_EQ(j.at("per_class").size(), 3u);
  for (const auto& c : j.at("per_class")) EXPECT_TRUE(c.contains("f1"));
}

TEST(ReportTest, WriteThenReadEqualStructures) {
  const auto ev = evaluate_predictions({0, 1, 2, 0, 1, 2}, {0, 0, 0, 0, 0, 0}, emotion_class_names());
  const Metrics m{kInfiniteSnr, 0.0, 1.0, false};
  const MixReport mix{3.0, 3.0000000000000004, 0.123456789, NoiseSpec::make(NoiseKind::powerline, {{"freq", 60.0}}, 9)};
  const DenoiseReport dr{"dwt", {{"levels", "3"}, {"mode", "soft"}}, {"12 detail coefficients zeroed"}, 2048};
  const auto report = make_report("test", Json{{"seed", 1}},
                                  Json{{"evaluation", to_json(ev)}, {"metrics", to_json(m)}, {"mix", to_json(mix)}, {"denoise", to_json(dr)}});
  const auto p = std::filesystem::temp_directory_path() / "eegscrub_io_test" / "report.json";
  write_report(p.string(), report);
  const auto back = read_report(p.string());
  EXPECT_EQ(back, report);

  const auto ev2 = evaluation_from_json(back.at("results").at("evaluation"));
  EXPECT_EQ(ev2.accuracy, ev.accuracy);
  EXPECT_EQ(ev2.confusion.counts, ev.confusion.counts);
  EXPECT_EQ(ev2.per_class[1].precision_undefined, true);
  const auto m2 = metrics_from_json(back.at("results").at("metrics"));
  EXPECT_EQ(m2.snr_db, kInfiniteSnr);
  EXPECT_EQ(m2.corr, 1.0);
  const auto mix2 = mix_report_from_json(back.at("results").at("mix"));
  EXPECT_EQ(mix2.achieved_snr_db, mix.achieved_snr_db);
  EXPECT_EQ(mix2.noise_scale, mix.noise_scale);
  EXPECT_EQ(mix2.spec->to_text(), mix.spec->to_text());
  const auto dr2 = denoise_report_from_json(back.at("results").at("denoise"));
  EXPECT_EQ(dr2.params, dr.params);
  EXPECT_EQ(dr2.components_removed, dr.components_removed);
  EXPECT_EQ(dr2.input_len, dr.input_len);
}

TEST(ReportTest, NonFiniteSentinels) {
  EXPECT_EQ(num(std::numeric_limits<double>::infinity()), "+inf");
  EXPECT_EQ(num(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(num(std::nan("")), "nan");
  const auto text = dump_report(make_report("x", {}, Json{{"v", num(-kInfiniteSnr)}, {"w", num(std::nan(""))}}));
  const auto back = parse_report(text);
  EXPECT_EQ(num_from(back["results"]["v"]), -kInfiniteSnr);
  EXPECT_TRUE(std::isnan(num_from(back["results"]["w"])));
  EXPECT_THROW(num_from(Json("inf")), Error);
}

TEST(ReportTest, RejectsWrongVersionAndUnwritablePath) {
  EXPECT_THROW(parse_report("{\"format_version\": 99}"), Error);
  EXPECT_THROW(parse_report("not json"), Error);
  EXPECT_THROW(write_report("/nonexistent/dir/r.json", make_report("x", {}, {})), Error);
}
