#pragma once

#include "eegscrub/denoise.hpp"
#include "eegscrub/error.hpp"
#include "eegscrub/gru.hpp"
#include "eegscrub/noise.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

namespace eegscrub {

using Json = nlohmann::ordered_json;

inline constexpr int kReportFormatVersion = 1;

// Non-finite values become the sentinel strings "+inf", "-inf" and "nan".
inline Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return v;
}

inline double num_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  fail(ErrorKind::parse, "expected a number or a non-finite sentinel, got " + j.dump());
}

// ------------------------------------------------------------------ structs

inline Json to_json(const Metrics& m) {
  return Json{{"snr_db", num(m.snr_db)}, {"rmse", num(m.rmse)}, {"corr", num(m.corr)}, {"corr_degenerate", m.corr_degenerate}};
}

inline Metrics metrics_from_json(const Json& j) {
  return {num_from(j.at("snr_db")), num_from(j.at("rmse")), num_from(j.at("corr")), j.at("corr_degenerate").get<bool>()};
}

inline Json to_json(const MixReport& m) {
  Json j{{"target_snr_db", num(m.target_snr_db)}, {"achieved_snr_db", num(m.achieved_snr_db)}, {"noise_scale", num(m.noise_scale)}};
  j["noise_spec"] = m.spec ? Json(m.spec->to_text()) : Json(nullptr);
  return j;
}

inline MixReport mix_report_from_json(const Json& j) {
  MixReport m{num_from(j.at("target_snr_db")), num_from(j.at("achieved_snr_db")), num_from(j.at("noise_scale")), std::nullopt};
  if (!j.at("noise_spec").is_null()) m.spec = NoiseSpec::parse(j.at("noise_spec").get<std::string>());
  return m;
}

inline Json to_json(const DenoiseReport& r) {
  return Json{{"method_id", r.method_id}, {"params", r.params}, {"components_removed", r.components_removed}, {"input_len", r.input_len}};
}

inline DenoiseReport denoise_report_from_json(const Json& j) {
  return {j.at("method_id").get<std::string>(), j.at("params").get<std::map<std::string, std::string>>(),
          j.at("components_removed").get<std::vector<std::string>>(), j.at("input_len").get<std::size_t>()};
}

inline Json to_json(const Evaluation& ev) {
  Json per = Json::array();
  for (std::size_t k = 0; k < ev.per_class.size(); ++k) {
    const auto& c = ev.per_class[k];
    per.push_back({{"class", ev.confusion.class_names.at(k)},
                   {"precision", num(c.precision)},
                   {"recall", num(c.recall)},
                   {"f1", num(c.f1)},
                   {"precision_undefined", c.precision_undefined},
                   {"recall_undefined", c.recall_undefined},
                   {"f1_undefined", c.f1_undefined}});
  }
  return Json{{"accuracy", num(ev.accuracy)},
              {"macro_f1", num(ev.macro_f1)},
              {"class_names", ev.confusion.class_names},
              {"confusion_matrix", ev.confusion.counts},
              {"per_class", per}};
}

inline Evaluation evaluation_from_json(const Json& j) {
  Evaluation ev;
  ev.accuracy = num_from(j.at("accuracy"));
  ev.macro_f1 = num_from(j.at("macro_f1"));
  ev.confusion.class_names = j.at("class_names").get<std::vector<std::string>>();
  ev.confusion.counts = j.at("confusion_matrix").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& c : j.at("per_class")) {
    ev.per_class.push_back({num_from(c.at("precision")), num_from(c.at("recall")), num_from(c.at("f1")),
                            c.at("precision_undefined").get<bool>(), c.at("recall_undefined").get<bool>(),
                            c.at("f1_undefined").get<bool>()});
  }
  return ev;
}

inline Json to_json(const ModelConfig& mc) {
  return Json{{"seq_len", mc.seq_len}, {"feat_dim", mc.feat_dim}, {"hidden_size", mc.hidden_size},
              {"n_classes", mc.n_classes}, {"seed", mc.seed}};
}

inline Json to_json(const TrainConfig& tc) {
  return Json{{"epochs", tc.epochs},           {"batch_size", tc.batch_size}, {"learning_rate", num(tc.learning_rate)},
              {"beta1", num(tc.beta1)},        {"beta2", num(tc.beta2)},      {"adam_eps", num(tc.adam_eps)},
              {"grad_clip", num(tc.grad_clip)}, {"val_fraction", num(tc.val_fraction)}, {"seed", tc.seed}};
}

inline Json to_json(const std::vector<EpochRecord>& history) {
  Json a = Json::array();
  for (const auto& e : history) {
    a.push_back({{"epoch", e.epoch}, {"train_loss", num(e.train_loss)}, {"train_acc", num(e.train_acc)},
                 {"val_loss", num(e.val_loss)}, {"val_acc", num(e.val_acc)}});
  }
  return a;
}

// ------------------------------------------------------------------ files

// Top-level envelope shared by every command's report.
inline Json make_report(const std::string& command, Json config, Json results) {
  return Json{{"format_version", kReportFormatVersion},
              {"command", command},
              {"config", std::move(config)},
              {"results", std::move(results)}};
}

inline std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

inline void write_report(const std::string& path, const Json& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  os << dump_report(report);
  if (!os) fail(ErrorKind::io, "failed writing '" + path + "'");
}

inline Json parse_report(const std::string& text, const std::string& source = "<report>") {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, source + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("format_version")) fail(ErrorKind::parse, source + ": missing format_version");
  if (j.at("format_version") != kReportFormatVersion) fail(ErrorKind::parse, source + ": unsupported format_version " + j.at("format_version").dump());
  return j;
}

inline Json read_report(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_report(ss.str(), path);
}

}  // namespace eegscrub
