#pragma once

#include "eegscrub/denoise.hpp"
#include "eegscrub/noise.hpp"
#include "eegscrub/random.hpp"
#include "eegscrub/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace eegscrub {

inline const std::vector<std::string>& surrogate_channel_names() {
  static const std::vector<std::string> names = {"TP9", "AF7", "AF8", "TP10"};
  return names;
}

// Four-channel clean surrogate: a 10 Hz component plus a half-amplitude 6 Hz
// component per channel, phases drawn from the seed.
inline Recording clean_surrogate(std::size_t n, double fs, std::uint64_t seed) {
  const CounterRng base(seed, "clean_surrogate");
  std::vector<Signal> chans;
  for (std::size_t c = 0; c < surrogate_channel_names().size(); ++c) {
    auto rng = base.split(c);
    const double p1 = rng.uniform(0.0, 2.0 * detail::pi), p2 = rng.uniform(0.0, 2.0 * detail::pi);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      x[i] = std::sin(2.0 * detail::pi * 10.0 * t + p1) + 0.5 * std::sin(2.0 * detail::pi * 6.0 * t + p2);
    }
    chans.emplace_back(std::move(x), fs);
  }
  return Recording(std::move(chans), surrogate_channel_names(), {{"kind", "clean_surrogate"}, {"seed", std::to_string(seed)}});
}

// Per-channel noise with seeds derived from (seed, kind, channel).
inline std::vector<NoiseSpec> channel_noise_specs(const NoiseSpec& base_spec, std::size_t channels, std::uint64_t seed) {
  const CounterRng base(seed, std::string("noise:") + to_string(base_spec.kind));
  std::vector<NoiseSpec> out;
  for (std::size_t c = 0; c < channels; ++c) {
    NoiseSpec s = base_spec;
    s.seed = base.split(c).next_u64();
    out.push_back(std::move(s));
  }
  return out;
}

struct Contaminated {
  Recording clean;
  Recording noisy;
  std::vector<MixReport> mixes;  // one per channel
};

inline Contaminated contaminate(const Recording& clean, const NoiseSpec& spec, double snr_db, std::uint64_t seed) {
  const auto specs = channel_noise_specs(spec, clean.channel_count(), seed);
  std::vector<Signal> noisy;
  std::vector<MixReport> mixes;
  for (std::size_t c = 0; c < clean.channel_count(); ++c) {
    const auto noise = gen_noise(specs[c], clean.size(), clean.fs());
    auto [mixed, rep] = mix_at_snr(clean.channel(c), noise, snr_db, specs[c]);
    noisy.push_back(std::move(mixed));
    mixes.push_back(std::move(rep));
  }
  return {clean, clean.with_channels(std::move(noisy)), std::move(mixes)};
}

// Side inputs the bench hands to reference-based methods: a line-frequency
// reference (shifted phase) for powerline noise, and the generator's blink
// shape.
inline DenoiseInputs bench_inputs(const NoiseSpec& spec, std::size_t n, double fs) {
  DenoiseInputs in;
  if (spec.kind == NoiseKind::powerline) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::sin(2.0 * detail::pi * spec.param("freq") * static_cast<double>(i) / fs + 0.7);
    in.references.emplace_back(std::move(r), fs);
  }
  const double width = spec.kind == NoiseKind::blink ? spec.param("width") : noise_defaults(NoiseKind::blink).at("width");
  in.blink_template = blink_template(width, fs);
  return in;
}

struct BenchGrid {
  std::vector<std::string> methods = {"identity", "dwt"};
  std::vector<NoiseKind> noises = {NoiseKind::awgn};
  std::vector<double> snrs_db = {0.0};
  std::vector<std::uint64_t> seeds;  // empty: 0..19
  std::size_t n_samples = 2048;
  double fs = 256.0;
  DenoiseParams params{};
};

struct BenchRow {
  std::string method;
  NoiseKind noise = NoiseKind::awgn;
  double snr_db = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;  // seeds where the method raised an error
  double median_snr_gain_db = 0, iqr_snr_gain_db = 0;
  double median_output_snr_db = 0;
  double median_rmse = 0, iqr_rmse = 0;
  double median_rmse_ratio = 0;  // output RMSE / input RMSE
  double median_corr = 0, iqr_corr = 0;
  std::vector<std::string> errors;
};

// Linear-interpolation quantile (the common "type 7" definition).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double iqr(const std::vector<double>& v) { return quantile(v, 0.75) - quantile(v, 0.25); }

// Every (method, noise, snr) cell over all seeds. Per seed the channel-mean of
// each metric is taken; rows report median and IQR across seeds, sorted by
// (method, noise, snr).
inline std::vector<BenchRow> run_bench(const BenchGrid& grid) {
  if (grid.methods.empty()) fail(ErrorKind::invalid_argument, "bench needs at least one method");
  for (const auto& m : grid.methods)
    if (!is_registered_method(m)) fail(ErrorKind::unknown_kind, "unknown method '" + m + "'");
  std::vector<std::uint64_t> seeds = grid.seeds;
  if (seeds.empty())
    for (std::uint64_t s = 0; s < 20; ++s) seeds.push_back(s);

  std::vector<BenchRow> rows;
  for (const auto& method : grid.methods) {
    for (const auto kind : grid.noises) {
      for (const double snr : grid.snrs_db) {
        BenchRow row;
        row.method = method;
        row.noise = kind;
        row.snr_db = snr;
        std::vector<double> gain, out_snr, rmse, ratio, corr;
        for (const auto seed : seeds) {
          const auto spec = NoiseSpec::make(kind);
          const auto scene = contaminate(clean_surrogate(grid.n_samples, grid.fs, seed), spec, snr, seed);
          ++row.runs;
          try {
            const auto out = run_denoiser(method, scene.noisy, grid.params, bench_inputs(spec, grid.n_samples, grid.fs)).first;
            double g = 0, o = 0, r = 0, q = 0, k = 0;
            const auto nch = static_cast<double>(out.channel_count());
            for (std::size_t c = 0; c < out.channel_count(); ++c) {
              const auto before = compute_metrics(scene.clean.channel(c), scene.noisy.channel(c));
              const auto after = compute_metrics(scene.clean.channel(c), out.channel(c));
              g += (after.snr_db - before.snr_db) / nch;
              o += after.snr_db / nch;
              r += after.rmse / nch;
              q += (before.rmse > 0 ? after.rmse / before.rmse : 1.0) / nch;
              k += after.corr / nch;
            }
            gain.push_back(g), out_snr.push_back(o), rmse.push_back(r), ratio.push_back(q), corr.push_back(k);
          } catch (const Error& e) {
            ++row.failures;
            row.errors.push_back("seed " + std::to_string(seed) + ": " + e.what());
          }
        }
        row.median_snr_gain_db = quantile(gain, 0.5);
        row.iqr_snr_gain_db = iqr(gain);
        row.median_output_snr_db = quantile(out_snr, 0.5);
        row.median_rmse = quantile(rmse, 0.5);
        row.iqr_rmse = iqr(rmse);
        row.median_rmse_ratio = quantile(ratio, 0.5);
        row.median_corr = quantile(corr, 0.5);
        row.iqr_corr = iqr(corr);
        rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::make_tuple(a.method, std::string(to_string(a.noise)), a.snr_db) <
           std::make_tuple(b.method, std::string(to_string(b.noise)), b.snr_db);
  });
  return rows;
}

inline void write_leaderboard_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os.precision(10);
  os << "method,noise,snr_db,runs,failures,median_snr_gain_db,iqr_snr_gain_db,median_output_snr_db,median_rmse,iqr_rmse,"
        "median_rmse_ratio,median_corr,iqr_corr\n";
  for (const auto& r : rows) {
    os << r.method << ',' << to_string(r.noise) << ',' << r.snr_db << ',' << r.runs << ',' << r.failures << ','
       << r.median_snr_gain_db << ',' << r.iqr_snr_gain_db << ',' << r.median_output_snr_db << ',' << r.median_rmse << ','
       << r.iqr_rmse << ',' << r.median_rmse_ratio << ',' << r.median_corr << ',' << r.iqr_corr << '\n';
  }
}

inline Json to_json(const BenchRow& r) {
  return Json{{"method", r.method},
              {"noise", to_string(r.noise)},
              {"snr_db", num(r.snr_db)},
              {"runs", r.runs},
              {"failures", r.failures},
              {"median_snr_gain_db", num(r.median_snr_gain_db)},
              {"iqr_snr_gain_db", num(r.iqr_snr_gain_db)},
              {"median_output_snr_db", num(r.median_output_snr_db)},
              {"median_rmse", num(r.median_rmse)},
              {"iqr_rmse", num(r.iqr_rmse)},
              {"median_rmse_ratio", num(r.median_rmse_ratio)},
              {"median_corr", num(r.median_corr)},
              {"iqr_corr", num(r.iqr_corr)},
              {"errors", r.errors}};
}

// One table per noise kind, rows in leaderboard order.
inline Json bench_tables_json(const std::vector<BenchRow>& rows) {
  Json tables = Json::object();
  for (const auto& r : rows) tables[to_string(r.noise)].push_back(to_json(r));
  return tables;
}

}  // namespace eegscrub
