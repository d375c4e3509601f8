// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Classification reproduction on the public dataset lives in
// acceptance_classification.cpp because it needs an external file.

#include "eegscrub/bench.hpp"
#include "eegscrub/denoise.hpp"
#include "eegscrub/emd.hpp"
#include "eegscrub/filter.hpp"
#include "eegscrub/gru.hpp"
#include "eegscrub/ssa.hpp"
#include "eegscrub/wavelet.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace eegscrub;

namespace {

constexpr double kFs = 256.0;
constexpr int kSeeds = 20;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    err = std::max(err, std::abs(a[i] - b[i]));
  }
  return err / std::max(scale, 1e-300);
}

// Gaussian noise plus a sine of random frequency.
std::vector<double> random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto x = oracle::gaussian(n, seed + 1000);
  const double f = 1.0 + 40.0 * u(g);
  for (std::size_t i = 0; i < n; ++i) x[i] += 3.0 * std::sin(2 * oracle::kPi * f * static_cast<double>(i) / kFs);
  return x;
}

double snr_db(const std::vector<double>& clean, const std::vector<double>& est) {
  return 20.0 * std::log10(oracle::rms(clean) / oracle::rmse(clean, est));
}

Recording make_rec(std::vector<std::vector<double>> chans) {
  std::vector<Signal> s;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < chans.size(); ++c) {
    s.emplace_back(std::move(chans[c]), kFs);
    names.push_back("ch" + std::to_string(c));
  }
  return Recording(std::move(s), std::move(names), {});
}

// ------------------------------------------------------------------ 1

Outcome reconstruction_identities() {
  Outcome o;
  double dwt_worst = 0;
  for (std::size_t n : {37u, 256u, 1000u, 1024u}) {
    const auto x = oracle::gaussian(n, static_cast<unsigned>(n));
    const auto y = dwt_inverse(dwt_forward(Signal(x, kFs), dwt_max_level(n))).values();
    for (std::size_t i = 0; i < n; ++i) dwt_worst = std::max(dwt_worst, std::abs(x[i] - y[i]));
  }
  o.check(dwt_worst < 1e-8, "DWT max|err| " + fmt("%.2e", dwt_worst) + " < 1e-8");

  std::mt19937_64 g(42);
  double emd_worst = 0, ssa_worst = 0;
  for (unsigned s = 0; s < 100; ++s) {
    const std::size_t n = 64 + g() % 400;
    const auto x = random_signal(n, s);
    emd_worst = std::max(emd_worst, max_rel_err(x, emd(Signal(x, kFs)).reconstruct()));
    const std::size_t l = 2 + g() % std::min<std::size_t>(n / 2 - 1, 60);
    ssa_worst = std::max(ssa_worst, max_rel_err(x, ssa_reconstruct_all(ssa_decompose(Signal(x, kFs), l)).values()));
  }
  o.check(emd_worst < 1e-8, "EMD rel err " + fmt("%.2e", emd_worst) + " < 1e-8 (100 signals)");
  o.check(ssa_worst < 1e-8, "SSA rel err " + fmt("%.2e", ssa_worst) + " < 1e-8 (100 signals)");
  return o;
}

// ------------------------------------------------------------------ 2

Outcome notch_performance() {
  // Magnitude response of the zero-phase filter = |DFT| of its response to a
  // centered unit impulse, read at exact bins (resolution fs/N = 0.125 Hz).
  Outcome o;
  const std::size_t n = 2048;
  std::vector<double> impulse(n, 0.0);
  impulse[n / 2] = 1.0;
  for (const double f0 : {50.0, 60.0}) {
    const auto h = apply_filter(Signal(impulse, kFs), FilterSpec::notch(f0)).values();
    const auto gain_db = [&](double f) {
      const auto bin = static_cast<std::size_t>(std::lround(f * static_cast<double>(n) / kFs));
      return 10.0 * std::log10(oracle::dft_power(h, bin) / oracle::dft_power(impulse, bin));
    };
    const double at_notch = -gain_db(f0), at_10 = -gain_db(10.0);
    o.check(at_notch >= 40.0, fmt("%.0f Hz", f0) + " attenuation " + fmt("%.1f", at_notch) + " dB >= 40");
    o.check(at_10 <= 3.0, fmt("%.0f Hz notch", f0) + " 10 Hz attenuation " + fmt("%.2e", at_10) + " dB <= 3");
  }
  return o;
}

// ------------------------------------------------------------------ 3

Outcome denoising_efficacy() {
  Outcome o;

  {  // DWT on AWGN
    std::vector<double> gain, control;
    const auto clean = oracle::sine(2048, kFs, 10.0);
    for (int s = 0; s < kSeeds; ++s) {
      const auto noisy = oracle::mix(clean, oracle::gaussian(2048, 100 + s), 0.0);
      const auto out = denoise_dwt(Signal(noisy, kFs)).first.values();
      const auto id = run_denoiser("identity", make_rec({noisy}), {}).first.channel(0).values();
      gain.push_back(snr_db(clean, out) - snr_db(clean, noisy));
      control.push_back(snr_db(clean, id) - snr_db(clean, noisy));
    }
    o.check(oracle::median(gain) >= 5.0, "DWT/AWGN gain " + fmt("%.2f", oracle::median(gain)) + " dB >= 5 (identity " +
                                             fmt("%.2f", oracle::median(control)) + ")");
  }

  {  // EMD-MAF on continuous 20-60 Hz EMG
    std::vector<double> reduction;
    const auto clean = oracle::sine(2048, kFs, 5.0);
    for (int s = 0; s < kSeeds; ++s) {
      const auto emg = gen_noise(NoiseSpec::make(NoiseKind::emg_burst, {{"duty", 1.0}}, 200 + s), 2048, kFs).values();
      const auto noisy = oracle::mix(clean, emg, 0.0);
      const auto out = denoise_emd_maf(Signal(noisy, kFs)).first.values();
      reduction.push_back(1.0 - oracle::rmse(clean, out) / oracle::rmse(clean, noisy));
    }
    o.check(oracle::median(reduction) >= 0.30, "EMD-MAF/EMG RMSE reduction " + fmt("%.3f", oracle::median(reduction)) + " >= 0.30");
  }

  {  // SSA motion on 0.3 Hz drift, random phases
    std::vector<double> corr, control;
    for (int s = 0; s < kSeeds; ++s) {
      std::mt19937_64 g(300 + s);
      std::uniform_real_distribution<double> ph(0.0, 2 * oracle::kPi);
      const auto clean = oracle::sine(2048, kFs, 10.0, 1.0, ph(g));
      const auto noisy = oracle::mix(clean, oracle::sine(2048, kFs, 0.3, 1.0, ph(g)), 0.0);
      const auto out = remove_motion_ssa(Signal(noisy, kFs)).first.values();
      corr.push_back(oracle::pearson(clean, out));
      control.push_back(oracle::pearson(clean, noisy));
    }
    o.check(oracle::median(corr) >= 0.9, "SSA-motion/drift corr " + fmt("%.3f", oracle::median(corr)) + " >= 0.9 (identity " +
                                             fmt("%.3f", oracle::median(control)) + ")");
  }

  {  // SSA-CCA on EMG shared by 4 channels
    const double freqs[] = {6.0, 8.0, 10.0, 12.0};
    std::vector<double> reduction;
    for (int s = 0; s < kSeeds; ++s) {
      const auto emg = gen_noise(NoiseSpec::make(NoiseKind::emg_burst, {}, 300 + s), 1024, kFs).values();
      std::vector<std::vector<double>> clean, noisy;
      for (int c = 0; c < 4; ++c) {
        clean.push_back(oracle::sine(1024, kFs, freqs[c], 1.0, c));
        noisy.push_back(oracle::mix(clean.back(), emg, 0.0));
      }
      const auto out = remove_muscle_ssa_cca(make_rec(noisy)).first;
      double before = 0, after = 0;
      for (int c = 0; c < 4; ++c) {
        before += oracle::rmse(clean[c], noisy[c]);
        after += oracle::rmse(clean[c], out.channel(c).values());
      }
      reduction.push_back(1.0 - after / before);
    }
    o.check(oracle::median(reduction) >= 0.30, "SSA-CCA/EMG mean RMSE reduction " + fmt("%.3f", oracle::median(reduction)) + " >= 0.30");
  }

  {  // cascade LMS on 50 Hz, residual over the second half (after convergence)
    const auto clean = oracle::sine(2048, kFs, 10.0);
    std::vector<double> residual;
    for (int s = 0; s < kSeeds; ++s) {
      const double ph = 0.3 * s;
      const auto hum = oracle::sine(2048, kFs, 50.0, 1.0, ph);
      const auto ref = oracle::sine(2048, kFs, 50.0, 0.7, ph + 0.5);
      const auto out = cascade_lms(Signal(oracle::add(clean, hum), kFs), {Signal(ref, kFs)}).first.values();
      residual.push_back(oracle::rms(oracle::add(out, clean, -1.0), 1024) / oracle::rms(hum, 1024));
    }
    o.check(oracle::median(residual) < 0.10, "LMS/50 Hz residual " + fmt("%.4f", oracle::median(residual)) + " < 0.10");
  }
  return o;
}

// ------------------------------------------------------------------ 4

Outcome gru_correctness() {
  Outcome o;
  double worst = 0;
  const double eps = 1e-5;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = make_gru({3, 2, 4, 3, seed}, 6);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (auto& p : m.params)
      for (auto& v : p.w) v = u(gen);
    std::vector<std::vector<double>> xs;
    for (unsigned i = 0; i < 3; ++i) xs.push_back(oracle::gaussian(6, static_cast<unsigned>(seed * 10) + i));
    const std::vector<int> ys = {0, 2, 1};
    const auto lg = loss_and_grad(m, xs, ys, 0.0);
    for (std::size_t k = 0; k < m.params.size(); ++k) {
      for (std::size_t j = 0; j < m.params[k].w.size(); ++j) {
        const double w0 = m.params[k].w[j];
        m.params[k].w[j] = w0 + eps;
        const double lp = loss_and_grad(m, xs, ys).loss;
        m.params[k].w[j] = w0 - eps;
        const double lm = loss_and_grad(m, xs, ys).loss;
        m.params[k].w[j] = w0;
        const double num = (lp - lm) / (2 * eps), ana = lg.grads[k][j];
        worst = std::max(worst, std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-6}));
      }
    }
  }
  o.check(worst < 1e-4, "gradient check worst rel err " + fmt("%.2e", worst) + " < 1e-4 (5 seeds)");

  auto z = make_gru({5, 3, 7, 3, 1}, 15);
  for (auto& p : z.params) std::fill(p.w.begin(), p.w.end(), 0.0);
  bool all_zero = true;
  for (double h : forward(z, oracle::gaussian(15, 3, 10.0)).hidden) all_zero = all_zero && h == 0.0;
  o.check(all_zero, "zero-weight hidden states exactly 0");
  std::vector<std::vector<double>> xs;
  for (unsigned i = 0; i < 4; ++i) xs.push_back(oracle::gaussian(15, 50 + i));
  const double loss = loss_and_grad(z, xs, {0, 1, 2, 1}).loss;
  o.check(loss == std::log(3.0), "zero-weight loss " + fmt("%.17g", loss) + " == ln 3");

  // Three Gaussian blobs, trained twice with the same seed.
  FeatureMatrix fm;
  fm.feature_names = {"x", "y"};
  fm.labels.emplace();
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd(0.0, 0.7);
  const double centers[3][2] = {{-4, 0}, {4, 0}, {0, 5}};
  for (int k = 0; k < 180; ++k) {
    fm.rows.push_back({centers[k % 3][0] + nd(gen), centers[k % 3][1] + nd(gen)});
    fm.labels->push_back(k % 3);
  }
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 16;
  tc.seed = 42;
  std::ostringstream a, b;
  write_model(a, train(fm, {4, 1, 8, 3, 42}, tc).model);
  write_model(b, train(fm, {4, 1, 8, 3, 42}, tc).model);
  o.check(a.str() == b.str(), "same-seed training bit-identical (" + std::to_string(a.str().size()) + " bytes)");
  return o;
}

// ------------------------------------------------------------------ 6

Outcome metrics_self_consistency() {
  Outcome o;
  double worst = 0;
  std::size_t cases = 0;
  for (const auto kind : {NoiseKind::awgn, NoiseKind::powerline, NoiseKind::baseline_wander, NoiseKind::emg_burst, NoiseKind::blink}) {
    for (const double snr : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
      for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const auto scene = contaminate(clean_surrogate(2048, kFs, seed), NoiseSpec::make(kind), snr, seed);
        for (std::size_t c = 0; c < scene.noisy.channel_count(); ++c) {
          worst = std::max(worst, std::abs(compute_metrics(scene.clean.channel(c), scene.noisy.channel(c)).snr_db - snr));
          ++cases;
        }
      }
    }
  }
  o.check(worst < 1e-6, "max |achieved - target| " + fmt("%.2e", worst) + " dB < 1e-6 over " + std::to_string(cases) + " mixes");
  return o;
}

// ------------------------------------------------------------------ 7

Outcome evaluation_arithmetic() {
  Outcome o;
  const auto names = default_class_names(3);
  const auto eq = [](const Evaluation& ev, std::vector<std::vector<std::size_t>> counts, double acc, std::vector<double> p,
                     std::vector<double> r, std::vector<double> f1) {
    bool ok = ev.confusion.counts == counts && ev.accuracy == acc;
    double sum = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      ok = ok && ev.per_class[k].precision == p[k] && ev.per_class[k].recall == r[k] && ev.per_class[k].f1 == f1[k];
      sum += f1[k];
    }
    return ok && ev.macro_f1 == sum / 3.0;
  };
  // truth 0,0,1,2 / pred 0,1,1,2
  o.check(eq(evaluate_predictions({0, 0, 1, 2}, {0, 1, 1, 2}, names), {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}}, 3.0 / 4, {1, 1.0 / 2, 1},
             {1.0 / 2, 1, 1}, {2.0 / 3, 2.0 / 3, 1}),
          "4-sample case");
  // rows (truth): [1 1 1] [0 2 0] [1 0 3]
  o.check(eq(evaluate_predictions({0, 0, 0, 1, 1, 2, 2, 2, 2}, {0, 1, 2, 1, 1, 2, 2, 0, 2}, names),
             {{1, 1, 1}, {0, 2, 0}, {1, 0, 3}}, 6.0 / 9, {1.0 / 2, 2.0 / 3, 3.0 / 4}, {1.0 / 3, 1, 3.0 / 4},
             {2.0 / 5, 4.0 / 5, 6.0 / 8}),
          "9-sample case");
  const auto z = evaluate_predictions({0, 1, 2, 0, 1, 2}, {0, 0, 0, 0, 0, 0}, names);
  o.check(eq(z, {{2, 0, 0}, {2, 0, 0}, {2, 0, 0}}, 2.0 / 6, {2.0 / 6, 0, 0}, {1, 0, 0}, {4.0 / 8, 0, 0}) &&
              z.per_class[1].precision_undefined && z.per_class[2].f1_undefined && !z.per_class[1].recall_undefined,
          "all-predicted-0 case with undefined flags");
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria = {
      {1, "reconstruction identities", reconstruction_identities, 30},
      {2, "notch performance", notch_performance, 0},
      {3, "denoising efficacy", denoising_efficacy, 300},
      {4, "GRU correctness", gru_correctness, 60},
      {6, "metrics self-consistency", metrics_self_consistency, 0},
      {7, "evaluation arithmetic", evaluation_arithmetic, 0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.check(secs < c.budget_s, "runtime " + fmt("%.1f", secs) + " s < " + fmt("%.0f", c.budget_s) + " s");
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
