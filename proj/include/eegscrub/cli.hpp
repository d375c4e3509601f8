#pragma once

#include "eegscrub/bench.hpp"
#include "eegscrub/dataset_io.hpp"
#include "eegscrub/denoise.hpp"
#include "eegscrub/features.hpp"
#include "eegscrub/filter.hpp"
#include "eegscrub/gru.hpp"
#include "eegscrub/noise.hpp"
#include "eegscrub/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace eegscrub::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

inline constexpr const char* kSeedEnv = "EEGSCRUB_SEED";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct SeedOpt {
  std::optional<std::uint64_t> flag;

  // --seed, then $EEGSCRUB_SEED, then 0.
  std::pair<std::uint64_t, std::string> resolve() const {
    if (flag) return {*flag, "flag"};
    if (const char* env = std::getenv(kSeedEnv); env && *env) {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        return {v, "env"};
      } catch (const std::exception&) {
        throw UsageError(std::string(kSeedEnv) + " is not an unsigned integer: '" + env + "'");
      }
    }
    return {0, "default"};
  }
};

inline void add_seed(CLI::App* sub, SeedOpt& s) {
  sub->add_option("--seed", s.flag, std::string("Seed for all randomness (fallback: $") + kSeedEnv + ", then 0)");
}

inline Json seed_json(const SeedOpt& s) {
  const auto [v, src] = s.resolve();
  return Json{{"value", v}, {"source", src}};
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  return os;
}

inline bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  const auto ca = std::filesystem::weakly_canonical(a, ec);
  const auto cb = std::filesystem::weakly_canonical(b, ec);
  return ca == cb;
}

// Outputs must never overwrite an input.
inline void guard_outputs(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) {
    if (o.empty()) continue;
    for (const auto& i : inputs)
      if (!i.empty() && same_file(i, o)) throw UsageError("output '" + o + "' would overwrite input '" + i + "'");
  }
}

inline void emit_report(const Json& report, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << dump_report(report);
  } else {
    write_report(path, report);
  }
}

inline void add_denoise_params(CLI::App* sub, DenoiseParams& p, std::string& mode) {
  sub->add_option("--levels", p.dwt_levels, "DWT decomposition levels")->capture_default_str();
  sub->add_option("--mode", mode, "DWT threshold mode")->check(CLI::IsMember({"soft", "hard"}))->capture_default_str();
  sub->add_option("--ma-width", p.ma_width, "EMD-MAF moving-average width (odd)")->capture_default_str();
  sub->add_option("--ssa-window", p.ssa_window, "SSA window length (0: min(N/2, 128))")->capture_default_str();
  sub->add_option("--var-thresh", p.var_thresh, "SSA motion share threshold")->capture_default_str();
  sub->add_option("--autocorr-thresh", p.ssa_cca.autocorr_thresh, "SSA-CCA lag-1 autocorrelation threshold")->capture_default_str();
  sub->add_option("--ssa-k", p.ssa_cca.components_per_channel, "SSA-CCA components per channel")->capture_default_str();
  sub->add_option("--akf-q", p.akf.q, "AKF process-noise variance")->capture_default_str();
  sub->add_option("--akf-r0", p.akf.r0, "AKF initial measurement-noise variance")->capture_default_str();
  sub->add_option("--akf-window", p.akf.adapt_window, "AKF adaptation window (samples)")->capture_default_str();
  sub->add_option("--mu", p.mu, "NLMS step size")->capture_default_str();
  sub->add_option("--taps", p.taps, "NLMS taps per stage")->capture_default_str();
  sub->add_option("--blink-threshold", p.blink_threshold, "Blink NCC detection threshold")->capture_default_str();
  sub->add_option("--frontal", p.frontal, "Frontal channels for blink detection")->delimiter(',')->capture_default_str();
}

inline ThresholdMode parse_mode(const std::string& m) { return m == "hard" ? ThresholdMode::hard : ThresholdMode::soft; }

// "awgn" or a full "kind=...,key=value" spec.
inline NoiseSpec parse_noise_arg(const std::string& text) {
  if (text.find('=') == std::string::npos) return NoiseSpec::make(parse_noise_kind(text));
  return NoiseSpec::parse(text);
}

inline std::optional<int> parse_label_arg(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto y = parse_emotion_label(s);
  if (!y) throw UsageError("unknown label '" + s + "' (use NEGATIVE, NEUTRAL, POSITIVE or 0-2)");
  return y;
}

inline Json metrics_table(const Recording& clean, const Recording& test) {
  Json a = Json::array();
  for (std::size_t c = 0; c < clean.channel_count(); ++c) {
    auto j = to_json(compute_metrics(clean.channel(c), test.channel(c)));
    j["channel"] = clean.names()[c];
    a.push_back(std::move(j));
  }
  return a;
}

}  // namespace detail

// Parses and runs one command. args exclude the program name.
inline int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG artifact removal, benchmarking and emotion classification toolkit", "eegscrub"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "eegscrub 1.0.0");

  std::string report_path;
  std::function<Json()> action;

  // ---------------------------------------------------------------- simulate
  struct {
    std::string out_path, clean_out, noise = "awgn";
    double snr = 0.0, fs = kDefaultRawFs;
    std::size_t samples = 2048;
    detail::SeedOpt seed;
  } sim;
  auto* s_sim = app.add_subcommand("simulate", "Write a semi-simulated contaminated 4-channel recording");
  s_sim->add_option("--out", sim.out_path, "Contaminated CSV output")->required();
  s_sim->add_option("--clean-out", sim.clean_out, "Also write the clean surrogate");
  s_sim->add_option("--noise", sim.noise, "Noise kind or spec, e.g. 'kind=emg_burst,duty=1'")->capture_default_str();
  s_sim->add_option("--snr", sim.snr, "Target SNR in dB (inf for none)")->capture_default_str();
  s_sim->add_option("--samples", sim.samples, "Samples per channel")->check(CLI::Range(std::size_t{16}, std::size_t{1} << 26))->capture_default_str();
  s_sim->add_option("--fs", sim.fs, "Sampling rate (Hz)")->check(CLI::PositiveNumber)->capture_default_str();
  s_sim->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_seed(s_sim, sim.seed);
  s_sim->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({}, {sim.out_path, sim.clean_out, report_path});
      const auto [seed, _] = sim.seed.resolve();
      NoiseSpec spec;
      try {
        spec = detail::parse_noise_arg(sim.noise);
      } catch (const Error& e) {
        throw UsageError(std::string("--noise: ") + e.what());
      }
      const auto scene = contaminate(clean_surrogate(sim.samples, sim.fs, seed), spec, sim.snr, seed);
      {
        auto os = detail::open_out(sim.out_path);
        write_raw_csv(os, scene.noisy);
      }
      if (!sim.clean_out.empty()) {
        auto os = detail::open_out(sim.clean_out);
        write_raw_csv(os, scene.clean);
      }
      Json mixes = Json::array();
      for (std::size_t c = 0; c < scene.mixes.size(); ++c) {
        auto j = to_json(scene.mixes[c]);
        j["channel"] = scene.noisy.names()[c];
        mixes.push_back(std::move(j));
      }
      const Json cfg{{"out", sim.out_path}, {"clean_out", sim.clean_out}, {"noise", spec.to_text()}, {"snr_db", num(sim.snr)},
                     {"samples", sim.samples}, {"fs", sim.fs}, {"seed", detail::seed_json(sim.seed)}};
      return make_report("simulate", cfg, Json{{"channels", scene.noisy.names()}, {"mixes", mixes}});
    };
  });

  // ---------------------------------------------------------------- denoise
  struct {
    std::string in, out_path, method, clean, reference, tmpl, mode = "soft";
    double fs = kDefaultRawFs, blink_width = 0.3;
    DenoiseParams params;
    detail::SeedOpt seed;
  } dn;
  auto* s_dn = app.add_subcommand("denoise", "Apply one registered artifact-removal method to a raw CSV");
  s_dn->add_option("--in", dn.in, "Raw CSV input")->required()->check(CLI::ExistingFile);
  s_dn->add_option("--out", dn.out_path, "Cleaned CSV output")->required();
  s_dn->add_option("--method", dn.method, "Method id")->required()->check(CLI::IsMember(registered_methods()));
  s_dn->add_option("--fs", dn.fs, "Sampling rate of the input (Hz)")->check(CLI::PositiveNumber)->capture_default_str();
  s_dn->add_option("--clean", dn.clean, "Clean reference CSV; adds before/after metrics")->check(CLI::ExistingFile);
  s_dn->add_option("--reference", dn.reference, "CSV of reference signals for cascade_lms (one per column)")->check(CLI::ExistingFile);
  s_dn->add_option("--template", dn.tmpl, "Single-column CSV blink template")->check(CLI::ExistingFile);
  s_dn->add_option("--blink-width", dn.blink_width, "Width (s) of the built-in blink template")->check(CLI::PositiveNumber)->capture_default_str();
  s_dn->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_denoise_params(s_dn, dn.params, dn.mode);
  detail::add_seed(s_dn, dn.seed);
  s_dn->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({dn.in, dn.clean, dn.reference, dn.tmpl}, {dn.out_path, report_path});
      dn.params.dwt_mode = detail::parse_mode(dn.mode);
      const auto raw = load_raw_csv(dn.in, dn.fs);
      DenoiseInputs inputs;
      if (!dn.reference.empty()) {
        const auto refs = load_raw_csv(dn.reference, dn.fs).recording;
        for (const auto& r : refs.channels()) inputs.references.push_back(r);
      }
      inputs.blink_template = dn.tmpl.empty() ? blink_template(dn.blink_width, dn.fs) : load_raw_csv(dn.tmpl, dn.fs).recording.channel(0);
      const auto [cleaned, rep] = run_denoiser(dn.method, raw.recording, dn.params, inputs);
      {
        auto os = detail::open_out(dn.out_path);
        write_raw_csv(os, cleaned);
      }
      Json results{{"denoise", to_json(rep)},
                   {"rows_rejected", raw.rejected_rows},
                   {"timestamp_dropped", raw.dropped_timestamp},
                   {"channels", cleaned.names()},
                   {"samples", cleaned.size()}};
      if (!dn.clean.empty()) {
        const auto clean = load_raw_csv(dn.clean, dn.fs).recording;
        if (clean.channel_count() != cleaned.channel_count() || clean.size() != cleaned.size()) {
          fail(ErrorKind::shape_mismatch, "--clean does not match the input's shape");
        }
        results["metrics_before"] = detail::metrics_table(clean, raw.recording);
        results["metrics_after"] = detail::metrics_table(clean, cleaned);
      }
      Json params(dn.params.to_map());
      const Json cfg{{"in", dn.in}, {"out", dn.out_path}, {"method", dn.method}, {"fs", dn.fs}, {"clean", dn.clean},
                     {"reference", dn.reference}, {"template", dn.tmpl}, {"blink_width", dn.blink_width},
                     {"params", params}, {"seed", detail::seed_json(dn.seed)}};
      return make_report("denoise", cfg, results);
    };
  });

  // ---------------------------------------------------------------- bench
  struct {
    std::vector<std::string> methods = {"identity", "dwt"}, noises = {"awgn"};
    std::vector<double> snrs = {0.0};
    std::size_t n_seeds = 20, samples = 2048;
    double fs = kDefaultRawFs;
    std::string out_path, mode = "soft";
    DenoiseParams params;
    detail::SeedOpt seed;
  } bn;
  auto* s_bn = app.add_subcommand("bench", "Monte-Carlo grid of methods x noise kinds x SNRs");
  s_bn->add_option("--methods", bn.methods, "Method ids")->delimiter(',')->check(CLI::IsMember(registered_methods()))->capture_default_str();
  s_bn->add_option("--noises", bn.noises, "Noise kinds")->delimiter(',')->capture_default_str();
  s_bn->add_option("--snrs", bn.snrs, "SNR levels in dB")->delimiter(',')->capture_default_str();
  s_bn->add_option("--seeds", bn.n_seeds, "Seeds per cell (seed, seed+1, ...)")->check(CLI::PositiveNumber)->capture_default_str();
  s_bn->add_option("--samples", bn.samples, "Samples per channel")->check(CLI::Range(std::size_t{64}, std::size_t{1} << 24))->capture_default_str();
  s_bn->add_option("--fs", bn.fs, "Sampling rate (Hz)")->check(CLI::PositiveNumber)->capture_default_str();
  s_bn->add_option("--out", bn.out_path, "Leaderboard CSV output");
  s_bn->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_denoise_params(s_bn, bn.params, bn.mode);
  detail::add_seed(s_bn, bn.seed);
  s_bn->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({}, {bn.out_path, report_path});
      bn.params.dwt_mode = detail::parse_mode(bn.mode);
      BenchGrid grid;
      grid.methods = bn.methods;
      grid.noises.clear();
      for (const auto& n : bn.noises) {
        try {
          grid.noises.push_back(parse_noise_kind(n));
        } catch (const Error& e) {
          throw UsageError(std::string("--noises: ") + e.what());
        }
      }
      grid.snrs_db = bn.snrs;
      const auto [base, _] = bn.seed.resolve();
      for (std::size_t i = 0; i < bn.n_seeds; ++i) grid.seeds.push_back(base + i);
      grid.n_samples = bn.samples;
      grid.fs = bn.fs;
      grid.params = bn.params;
      const auto rows = run_bench(grid);
      if (!bn.out_path.empty()) {
        auto os = detail::open_out(bn.out_path);
        write_leaderboard_csv(os, rows);
      }
      Json params(bn.params.to_map());
      const Json cfg{{"methods", bn.methods}, {"noises", bn.noises}, {"snrs_db", bn.snrs}, {"seeds", grid.seeds},
                     {"samples", bn.samples}, {"fs", bn.fs}, {"out", bn.out_path}, {"params", params},
                     {"seed", detail::seed_json(bn.seed)}};
      return make_report("bench", cfg, Json{{"rows", rows.size()}, {"tables", bench_tables_json(rows)}});
    };
  });

  // ---------------------------------------------------------------- extract-features
  struct {
    std::string in, out_path, label;
    double window = 2.0, overlap = 0.0, fs = kDefaultRawFs;
    bool bandpass = false;
    detail::SeedOpt seed;
  } ef;
  auto* s_ef = app.add_subcommand("extract-features", "Epoch a raw CSV and write the per-channel feature matrix");
  s_ef->add_option("--in", ef.in, "Raw CSV input")->required()->check(CLI::ExistingFile);
  s_ef->add_option("--out", ef.out_path, "Feature CSV output")->required();
  s_ef->add_option("--label", ef.label, "Class for every row (NEGATIVE, NEUTRAL, POSITIVE or 0-2)");
  s_ef->add_option("--window", ef.window, "Epoch length (s)")->check(CLI::PositiveNumber)->capture_default_str();
  s_ef->add_option("--overlap", ef.overlap, "Epoch overlap fraction")->check(CLI::Range(0.0, 0.999))->capture_default_str();
  s_ef->add_option("--fs", ef.fs, "Sampling rate (Hz)")->check(CLI::PositiveNumber)->capture_default_str();
  s_ef->add_flag("--bandpass", ef.bandpass, "Apply the 0.5-45 Hz zero-phase bandpass first");
  s_ef->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_seed(s_ef, ef.seed);
  s_ef->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({ef.in}, {ef.out_path, report_path});
      const auto label = detail::parse_label_arg(ef.label);
      const auto raw = load_raw_csv(ef.in, ef.fs);
      const auto rec = ef.bandpass ? apply_filter(raw.recording, FilterSpec::eeg_default()) : raw.recording;
      const auto fm = build_feature_matrix(rec, {ef.window, ef.overlap}, label);
      {
        auto os = detail::open_out(ef.out_path);
        write_feature_csv(os, fm);
      }
      const Json cfg{{"in", ef.in}, {"out", ef.out_path}, {"label", label ? Json(*label) : Json(nullptr)},
                     {"window_s", ef.window}, {"overlap", ef.overlap}, {"fs", ef.fs}, {"bandpass", ef.bandpass},
                     {"welch_segment", kDefaultWelchSegment}, {"seed", detail::seed_json(ef.seed)}};
      return make_report("extract-features", cfg,
                         Json{{"rows", fm.n_rows()}, {"columns", fm.n_cols()}, {"degenerate_cells", fm.degenerate_count},
                              {"rows_rejected", raw.rejected_rows}});
    };
  });

  // ---------------------------------------------------------------- train
  struct {
    std::string features, model, history, label_column = "label", kind = "gru";
    ModelConfig mc;
    TrainConfig tc;
    detail::SeedOpt seed;
  } tr;
  auto* s_tr = app.add_subcommand("train", "Train the GRU (or linear baseline) on a labeled feature CSV");
  s_tr->add_option("--features", tr.features, "Labeled feature CSV")->required()->check(CLI::ExistingFile);
  s_tr->add_option("--model", tr.model, "Model output file")->required();
  s_tr->add_option("--history", tr.history, "Per-epoch history CSV output");
  s_tr->add_option("--label-column", tr.label_column, "Label column name")->capture_default_str();
  s_tr->add_option("--model-type", tr.kind, "Model type")->check(CLI::IsMember({"gru", "linear"}))->capture_default_str();
  s_tr->add_option("--seq-len", tr.mc.seq_len, "GRU sequence length T")->check(CLI::PositiveNumber)->capture_default_str();
  s_tr->add_option("--hidden", tr.mc.hidden_size, "GRU hidden size")->check(CLI::PositiveNumber)->capture_default_str();
  s_tr->add_option("--epochs", tr.tc.epochs, "Training epochs")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_tr->add_option("--batch", tr.tc.batch_size, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
  s_tr->add_option("--lr", tr.tc.learning_rate, "Adam learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_tr->add_option("--clip", tr.tc.grad_clip, "Global gradient-norm clip (0: off)")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_tr->add_option("--val-fraction", tr.tc.val_fraction, "Held-out validation fraction")->capture_default_str();
  s_tr->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_seed(s_tr, tr.seed);
  s_tr->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({tr.features}, {tr.model, tr.history, report_path});
      const auto [seed, _] = tr.seed.resolve();
      tr.mc.seed = seed;
      tr.tc.seed = seed;
      try {
        tr.tc.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const auto ds = load_feature_csv(tr.features, tr.label_column);
      tr.mc.n_classes = ds.class_names.size();
      const auto res = tr.kind == "gru" ? train(ds.features, tr.mc, tr.tc) : train_linear_baseline(ds.features, tr.tc, tr.mc.n_classes);
      save_model(tr.model, res.model);
      if (!tr.history.empty()) {
        auto os = detail::open_out(tr.history);
        write_history_csv(os, res.history);
      }
      const Json cfg{{"features", tr.features}, {"model", tr.model}, {"history", tr.history},
                     {"label_column", tr.label_column}, {"model_type", tr.kind}, {"model_config", to_json(res.model.cfg)},
                     {"train_config", to_json(tr.tc)}, {"seed", detail::seed_json(tr.seed)}};
      Json results{{"samples", ds.features.n_rows()}, {"features", ds.features.n_cols()},
                   {"parameters", res.model.parameter_count()}, {"history", to_json(res.history)}};
      if (!res.history.empty()) results["final"] = to_json(std::vector<EpochRecord>{res.history.back()}).front();
      return make_report("train", cfg, results);
    };
  });

  // ---------------------------------------------------------------- eval
  struct {
    std::string features, model, label_column = "label";
    detail::SeedOpt seed;
  } ev;
  auto* s_ev = app.add_subcommand("eval", "Evaluate a trained model on a labeled feature CSV");
  s_ev->add_option("--features", ev.features, "Labeled feature CSV")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--model", ev.model, "Model file")->required()->check(CLI::ExistingFile);
  s_ev->add_option("--label-column", ev.label_column, "Label column name")->capture_default_str();
  s_ev->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_seed(s_ev, ev.seed);
  s_ev->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({ev.features, ev.model}, {report_path});
      const auto model = load_model(ev.model);
      const auto ds = load_feature_csv(ev.features, ev.label_column);
      const Json cfg{{"features", ev.features}, {"model", ev.model}, {"model_type", to_string(model.kind)},
                     {"label_column", ev.label_column}, {"seed", detail::seed_json(ev.seed)}};
      return make_report("eval", cfg, Json{{"samples", ds.features.n_rows()}, {"evaluation", to_json(evaluate(model, ds.features))}});
    };
  });

  // ---------------------------------------------------------------- predict
  struct {
    std::string features, model, out_path, label_column = "label";
    detail::SeedOpt seed;
  } pr;
  auto* s_pr = app.add_subcommand("predict", "Predict classes for a feature CSV (label column optional)");
  s_pr->add_option("--features", pr.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  s_pr->add_option("--model", pr.model, "Model file")->required()->check(CLI::ExistingFile);
  s_pr->add_option("--out", pr.out_path, "Predictions CSV output");
  s_pr->add_option("--label-column", pr.label_column, "Label column name (ignored if absent)")->capture_default_str();
  s_pr->add_option("--report", report_path, "Report path (default: stdout)");
  detail::add_seed(s_pr, pr.seed);
  s_pr->callback([&] {
    action = [&]() -> Json {
      detail::guard_outputs({pr.features, pr.model}, {pr.out_path, report_path});
      const auto model = load_model(pr.model);
      const auto ds = load_feature_csv(pr.features, pr.label_column, true);
      std::ostringstream csv;
      csv.precision(17);
      csv << "row,predicted";
      for (const auto& c : model.class_names) csv << ",p_" << c;
      csv << '\n';
      Json preds = Json::array();
      for (std::size_t r = 0; r < ds.features.n_rows(); ++r) {
        const auto p = predict_proba(model, ds.features.rows[r]);
        const auto k = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
        csv << r << ',' << model.class_names[k];
        for (double v : p) csv << ',' << v;
        csv << '\n';
        preds.push_back(model.class_names[k]);
      }
      if (!pr.out_path.empty()) {
        auto os = detail::open_out(pr.out_path);
        os << csv.str();
      }
      const Json cfg{{"features", pr.features}, {"model", pr.model}, {"out", pr.out_path},
                     {"label_column", pr.label_column}, {"seed", detail::seed_json(pr.seed)}};
      return make_report("predict", cfg, Json{{"samples", ds.features.n_rows()}, {"predictions", preds}});
    };
  });

  std::vector<std::string> argv_store{"eegscrub"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    const Json report = action();
    detail::emit_report(report, report_path, out);
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

}  // namespace eegscrub::cli
