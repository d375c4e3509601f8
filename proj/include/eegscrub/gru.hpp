#pragma once

#include "eegscrub/error.hpp"
#include "eegscrub/features.hpp"
#include "eegscrub/random.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace eegscrub {

// ------------------------------------------------------------------ configs

struct ModelConfig {
  std::size_t seq_len = 16;
  std::size_t feat_dim = 0;  // 0: ceil(n_features / seq_len)
  std::size_t hidden_size = 64;
  std::size_t n_classes = 3;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 5.0;  // global-norm clip; 0 disables
  double val_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    if (epochs < 0) fail(ErrorKind::invalid_argument, "epochs must be nonnegative");
    if (batch_size == 0) fail(ErrorKind::invalid_argument, "batch_size must be positive");
    if (!(learning_rate >= 0.0)) fail(ErrorKind::invalid_argument, "learning_rate must be nonnegative");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) fail(ErrorKind::invalid_argument, "Adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) fail(ErrorKind::invalid_argument, "adam_eps must be positive");
    if (!(grad_clip >= 0.0)) fail(ErrorKind::invalid_argument, "grad_clip must be nonnegative");
    if (!(val_fraction > 0.0 && val_fraction <= 0.5)) fail(ErrorKind::invalid_argument, "val_fraction must lie in (0, 0.5]");
  }
};

inline std::vector<std::string> default_class_names(std::size_t c) {
  if (c == 3) return {"NEGATIVE", "NEUTRAL", "POSITIVE"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < c; ++i) out.push_back(std::to_string(i));
  return out;
}

// ------------------------------------------------------------------ model

enum class ModelKind { gru, linear };

inline const char* to_string(ModelKind k) { return k == ModelKind::gru ? "gru" : "linear"; }

struct Param {
  std::string name;
  std::size_t rows = 0, cols = 0;
  std::vector<double> w;  // row-major rows x cols

  double& operator()(std::size_t r, std::size_t c) { return w[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return w[r * cols + c]; }
};

// GRU parameter slots; the linear model only has the dense pair.
enum GruSlot : std::size_t { Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh, Wd, bd, kGruSlots };

struct Model {
  ModelKind kind = ModelKind::gru;
  ModelConfig cfg;
  std::size_t n_features = 0;
  std::vector<double> feat_mean;   // z-score statistics fitted on training rows
  std::vector<double> feat_scale;
  std::vector<std::string> class_names;
  std::vector<Param> params;

  std::size_t input_len() const { return kind == ModelKind::gru ? cfg.seq_len * cfg.feat_dim : n_features; }
  const Param& dense_w() const { return params[kind == ModelKind::gru ? std::size_t{Wd} : 0]; }
  const Param& dense_b() const { return params[kind == ModelKind::gru ? std::size_t{bd} : 1]; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.w.size();
    return n;
  }
};

namespace detail {

inline Param make_param(std::string name, std::size_t rows, std::size_t cols) {
  return Param{std::move(name), rows, cols, std::vector<double>(rows * cols, 0.0)};
}

// Glorot-uniform fill, one stream per tensor name.
inline void glorot(Param& p, const CounterRng& base) {
  auto rng = base.split(p.name);
  const double a = std::sqrt(6.0 / static_cast<double>(p.rows + p.cols));
  for (auto& v : p.w) v = rng.uniform(-a, a);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (auto& x : v) {
    x = std::exp(x - m);
    s += x;
  }
  for (auto& x : v) x /= s;
}

// y += A x for a rows x cols parameter.
inline void gemv_add(const Param& a, const double* x, double* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* row = a.w.data() + r * a.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

// y += A^T x.
inline void gemv_t_add(const Param& a, const double* x, double* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* row = a.w.data() + r * a.cols;
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t c = 0; c < a.cols; ++c) y[c] += row[c] * xr;
  }
}

// G += u v^T.
inline void outer_add(std::vector<double>& g, std::size_t cols, const double* u, std::size_t rows, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double ur = u[r];
    if (ur == 0.0) continue;
    double* row = g.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ur * v[c];
  }
}

}  // namespace detail

inline void validate_model_config(const ModelConfig& mc, std::size_t n_features) {
  if (mc.n_classes < 2) fail(ErrorKind::invalid_argument, "need at least 2 classes");
  if (mc.seq_len == 0 || mc.hidden_size == 0) fail(ErrorKind::invalid_argument, "seq_len and hidden_size must be positive");
  if (mc.seq_len * mc.feat_dim < n_features) {
    fail(ErrorKind::invalid_argument, "seq_len * feat_dim = " + std::to_string(mc.seq_len * mc.feat_dim) +
                                          " is smaller than the feature count " + std::to_string(n_features));
  }
}

inline ModelConfig resolve_model_config(ModelConfig mc, std::size_t n_features) {
  if (mc.feat_dim == 0) mc.feat_dim = std::max<std::size_t>(1, (n_features + mc.seq_len - 1) / std::max<std::size_t>(1, mc.seq_len));
  validate_model_config(mc, n_features);
  return mc;
}

// GRU with Glorot-initialized weights and zero biases; identity normalization.
inline Model make_gru(ModelConfig mc, std::size_t n_features) {
  mc = resolve_model_config(mc, n_features);
  Model m;
  m.kind = ModelKind::gru;
  m.cfg = mc;
  m.n_features = n_features;
  m.feat_mean.assign(n_features, 0.0);
  m.feat_scale.assign(n_features, 1.0);
  m.class_names = default_class_names(mc.n_classes);
  const std::size_t h = mc.hidden_size, f = mc.feat_dim, t = mc.seq_len, c = mc.n_classes;
  m.params = {detail::make_param("W_z", h, f), detail::make_param("U_z", h, h), detail::make_param("b_z", h, 1),
              detail::make_param("W_r", h, f), detail::make_param("U_r", h, h), detail::make_param("b_r", h, 1),
              detail::make_param("W_h", h, f), detail::make_param("U_h", h, h), detail::make_param("b_h", h, 1),
              detail::make_param("W_dense", c, t * h), detail::make_param("b_dense", c, 1)};
  const CounterRng base(mc.seed, "init");
  for (std::size_t s : {Wz, Uz, Wr, Ur, Wh, Uh, Wd}) detail::glorot(m.params[s], base);
  return m;
}

// Softmax regression on the flat (normalized) feature vector; zero-initialized.
inline Model make_linear(std::size_t n_features, std::size_t n_classes) {
  if (n_classes < 2) fail(ErrorKind::invalid_argument, "need at least 2 classes");
  Model m;
  m.kind = ModelKind::linear;
  m.cfg.n_classes = n_classes;
  m.cfg.seq_len = 1;
  m.cfg.feat_dim = n_features;
  m.cfg.hidden_size = 0;
  m.n_features = n_features;
  m.feat_mean.assign(n_features, 0.0);
  m.feat_scale.assign(n_features, 1.0);
  m.class_names = default_class_names(n_classes);
  m.params = {detail::make_param("W_dense", n_classes, n_features), detail::make_param("b_dense", n_classes, 1)};
  return m;
}

// Standardizes a raw feature row and, for the GRU, zero-pads it to T*F.
inline std::vector<double> prepare_input(const Model& m, const std::vector<double>& raw) {
  if (raw.size() != m.n_features) {
    fail(ErrorKind::shape_mismatch, "feature row has " + std::to_string(raw.size()) + " values, model expects " +
                                        std::to_string(m.n_features));
  }
  std::vector<double> x(m.input_len(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) x[i] = (raw[i] - m.feat_mean[i]) / m.feat_scale[i];
  return x;
}

// ------------------------------------------------------------------ forward

struct Forward {
  std::vector<double> hidden;  // T x H row-major (empty for the linear model)
  std::vector<double> probs;   // C
};

namespace detail {

struct GruTape {
  std::vector<double> z, r, hc, h;  // each T x H; h excludes the zero initial state
  std::vector<double> logits;
};

inline GruTape gru_run(const Model& m, const std::vector<double>& x) {
  const std::size_t t_len = m.cfg.seq_len, hsz = m.cfg.hidden_size, f = m.cfg.feat_dim;
  const auto& p = m.params;
  GruTape tp;
  tp.z.assign(t_len * hsz, 0.0);
  tp.r.assign(t_len * hsz, 0.0);
  tp.hc.assign(t_len * hsz, 0.0);
  tp.h.assign(t_len * hsz, 0.0);
  std::vector<double> h_prev(hsz, 0.0), rh(hsz), az(hsz), ar(hsz), ah(hsz);
  for (std::size_t t = 0; t < t_len; ++t) {
    const double* xt = x.data() + t * f;
    std::copy(p[bz].w.begin(), p[bz].w.end(), az.begin());
    std::copy(p[br].w.begin(), p[br].w.end(), ar.begin());
    std::copy(p[bh].w.begin(), p[bh].w.end(), ah.begin());
    gemv_add(p[Wz], xt, az.data());
    gemv_add(p[Uz], h_prev.data(), az.data());
    gemv_add(p[Wr], xt, ar.data());
    gemv_add(p[Ur], h_prev.data(), ar.data());
    double* z = tp.z.data() + t * hsz;
    double* r = tp.r.data() + t * hsz;
    for (std::size_t i = 0; i < hsz; ++i) {
      z[i] = sigmoid(az[i]);
      r[i] = sigmoid(ar[i]);
      rh[i] = r[i] * h_prev[i];
    }
    gemv_add(p[Wh], xt, ah.data());
    gemv_add(p[Uh], rh.data(), ah.data());
    double* hc = tp.hc.data() + t * hsz;
    double* h = tp.h.data() + t * hsz;
    for (std::size_t i = 0; i < hsz; ++i) {
      hc[i] = std::tanh(ah[i]);
      h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hc[i];
    }
    std::copy(h, h + hsz, h_prev.begin());
  }
  tp.logits = p[bd].w;
  gemv_add(p[Wd], tp.h.data(), tp.logits.data());
  return tp;
}

}  // namespace detail

// Forward pass on a prepared input (length T*F for the GRU, n_features for the
// linear model).
inline Forward forward(const Model& m, const std::vector<double>& input) {
  if (input.size() != m.input_len()) {
    fail(ErrorKind::shape_mismatch, "input has " + std::to_string(input.size()) + " values, model expects " +
                                        std::to_string(m.input_len()));
  }
  Forward out;
  if (m.kind == ModelKind::gru) {
    auto tp = detail::gru_run(m, input);
    out.hidden = std::move(tp.h);
    out.probs = std::move(tp.logits);
  } else {
    out.probs = m.dense_b().w;
    detail::gemv_add(m.dense_w(), input.data(), out.probs.data());
  }
  detail::softmax_inplace(out.probs);
  return out;
}

inline std::vector<double> predict_proba(const Model& m, const std::vector<double>& raw_row) {
  return forward(m, prepare_input(m, raw_row)).probs;
}

inline int predict(const Model& m, const std::vector<double>& raw_row) {
  const auto p = predict_proba(m, raw_row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

// ------------------------------------------------------------------ gradients

struct LossGrad {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // aligned with Model::params
  double grad_norm = 0.0;                  // before clipping
  std::size_t correct = 0;
};

namespace detail {

inline void check_label(const Model& m, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= m.cfg.n_classes) {
    fail(ErrorKind::invalid_argument, "label " + std::to_string(y) + " outside [0, " + std::to_string(m.cfg.n_classes) + ")");
  }
}

// Accumulates one sample's gradient; returns its loss.
inline double gru_backward(const Model& m, const std::vector<double>& x, int y, std::vector<std::vector<double>>& g,
                           bool& correct) {
  const std::size_t t_len = m.cfg.seq_len, hsz = m.cfg.hidden_size, f = m.cfg.feat_dim;
  const auto& p = m.params;
  auto tp = gru_run(m, x);
  auto probs = tp.logits;
  softmax_inplace(probs);
  correct = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()) == y;
  const double loss = -std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));
  std::vector<double> dlogits = probs;
  dlogits[static_cast<std::size_t>(y)] -= 1.0;

  outer_add(g[Wd], t_len * hsz, dlogits.data(), dlogits.size(), tp.h.data());
  for (std::size_t c = 0; c < dlogits.size(); ++c) g[bd][c] += dlogits[c];
  std::vector<double> dH(t_len * hsz, 0.0);
  gemv_t_add(p[Wd], dlogits.data(), dH.data());

  std::vector<double> dh(hsz, 0.0), dh_prev(hsz), daz(hsz), dar(hsz), dah(hsz), drh(hsz), rh(hsz);
  const std::vector<double> zeros(hsz, 0.0);
  for (std::size_t t = t_len; t-- > 0;) {
    const double* xt = x.data() + t * f;
    const double* hp = t == 0 ? zeros.data() : tp.h.data() + (t - 1) * hsz;
    const double* z = tp.z.data() + t * hsz;
    const double* r = tp.r.data() + t * hsz;
    const double* hc = tp.hc.data() + t * hsz;
    for (std::size_t i = 0; i < hsz; ++i) dh[i] += dH[t * hsz + i];
    for (std::size_t i = 0; i < hsz; ++i) {
      const double dhc = dh[i] * z[i];
      const double dz = dh[i] * (hc[i] - hp[i]);
      dh_prev[i] = dh[i] * (1.0 - z[i]);
      dah[i] = dhc * (1.0 - hc[i] * hc[i]);
      daz[i] = dz * z[i] * (1.0 - z[i]);
      rh[i] = r[i] * hp[i];
    }
    std::fill(drh.begin(), drh.end(), 0.0);
    gemv_t_add(p[Uh], dah.data(), drh.data());
    for (std::size_t i = 0; i < hsz; ++i) {
      const double dr = drh[i] * hp[i];
      dh_prev[i] += drh[i] * r[i];
      dar[i] = dr * r[i] * (1.0 - r[i]);
    }
    outer_add(g[Wh], f, dah.data(), hsz, xt);
    outer_add(g[Uh], hsz, dah.data(), hsz, rh.data());
    outer_add(g[Wz], f, daz.data(), hsz, xt);
    outer_add(g[Uz], hsz, daz.data(), hsz, hp);
    outer_add(g[Wr], f, dar.data(), hsz, xt);
    outer_add(g[Ur], hsz, dar.data(), hsz, hp);
    for (std::size_t i = 0; i < hsz; ++i) {
      g[bh][i] += dah[i];
      g[bz][i] += daz[i];
      g[br][i] += dar[i];
    }
    gemv_t_add(p[Uz], daz.data(), dh_prev.data());
    gemv_t_add(p[Ur], dar.data(), dh_prev.data());
    dh.swap(dh_prev);
  }
  return loss;
}

inline double linear_backward(const Model& m, const std::vector<double>& x, int y, std::vector<std::vector<double>>& g,
                              bool& correct) {
  std::vector<double> probs = m.params[1].w;
  gemv_add(m.params[0], x.data(), probs.data());
  softmax_inplace(probs);
  correct = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin()) == y;
  const double loss = -std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-300));
  probs[static_cast<std::size_t>(y)] -= 1.0;
  outer_add(g[0], x.size(), probs.data(), probs.size(), x.data());
  for (std::size_t c = 0; c < probs.size(); ++c) g[1][c] += probs[c];
  return loss;
}

}  // namespace detail

// Mean cross-entropy over the batch and its exact gradient (full BPTT for the
// GRU). With grad_clip > 0 the gradient is rescaled to that global norm when
// it exceeds it.
inline LossGrad loss_and_grad(const Model& m, const std::vector<std::vector<double>>& inputs, const std::vector<int>& labels,
                              double grad_clip = 0.0) {
  if (inputs.empty()) fail(ErrorKind::invalid_argument, "empty batch");
  if (inputs.size() != labels.size()) fail(ErrorKind::shape_mismatch, "inputs and labels differ in count");
  LossGrad out;
  out.grads.resize(m.params.size());
  for (std::size_t k = 0; k < m.params.size(); ++k) out.grads[k].assign(m.params[k].w.size(), 0.0);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    detail::check_label(m, labels[i]);
    if (inputs[i].size() != m.input_len()) fail(ErrorKind::shape_mismatch, "input length does not match the model");
    bool ok = false;
    out.loss += m.kind == ModelKind::gru ? detail::gru_backward(m, inputs[i], labels[i], out.grads, ok)
                                         : detail::linear_backward(m, inputs[i], labels[i], out.grads, ok);
    out.correct += ok;
  }
  const double inv = 1.0 / static_cast<double>(inputs.size());
  out.loss *= inv;
  double ss = 0.0;
  for (auto& g : out.grads) {
    for (auto& v : g) {
      v *= inv;
      ss += v * v;
    }
  }
  out.grad_norm = std::sqrt(ss);
  if (grad_clip > 0.0 && out.grad_norm > grad_clip) {
    const double s = grad_clip / out.grad_norm;
    for (auto& g : out.grads)
      for (auto& v : g) v *= s;
  }
  return out;
}

// ------------------------------------------------------------------ split

struct Split {
  std::vector<std::size_t> train, val, test;
};

// Per-class shuffled partition; each class contributes round(n_c * fraction)
// to val and test (at least one to every partition with a nonzero fraction)
// and the rest to train. Index lists come back sorted.
inline Split stratified_split(const std::vector<int>& labels, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0 && f <= 1.0)) fail(ErrorKind::invalid_argument, "split fractions must lie in [0, 1]");
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) fail(ErrorKind::invalid_argument, "split fractions must sum to 1");
  const std::size_t parts = static_cast<std::size_t>(fractions[0] > 0) + (fractions[1] > 0) + (fractions[2] > 0);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  const CounterRng base(seed, "stratified_split");
  Split s;
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < parts) {
      fail(ErrorKind::stratification, "class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                                          " samples, fewer than the " + std::to_string(parts) + " partitions");
    }
    auto rng = base.split(static_cast<std::uint64_t>(static_cast<std::int64_t>(cls)));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const double n = static_cast<double>(idx.size());
    auto count = [&](double f) -> std::size_t {
      if (f <= 0.0) return 0;
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(n * f)));
    };
    std::size_t n_val = count(fractions[1]);
    std::size_t n_test = count(fractions[2]);
    const std::size_t need_train = fractions[0] > 0 ? 1 : 0;
    while (n_val + n_test + need_train > idx.size()) (n_val >= n_test ? n_val : n_test)--;
    if (fractions[0] <= 0.0) {
      // No train partition: the leftover goes to whichever of val/test is nonzero.
      (fractions[2] > 0 ? n_test : n_val) = idx.size() - (fractions[2] > 0 ? n_val : n_test);
    }
    const std::size_t n_train = idx.size() - n_val - n_test;
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.insert(s.val.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline FeatureMatrix select_rows(const FeatureMatrix& fm, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.feature_names = fm.feature_names;
  if (fm.labels) out.labels.emplace();
  for (auto i : idx) {
    out.rows.push_back(fm.rows.at(i));
    if (fm.labels) out.labels->push_back(fm.labels->at(i));
  }
  return out;
}

// ------------------------------------------------------------------ training

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

namespace detail {

inline void require_labels(const FeatureMatrix& fm, const char* what) {
  if (!fm.labels) fail(ErrorKind::invalid_argument, std::string(what) + " set has no labels");
  fm.validate();
}

// Fits z-score statistics on the training rows (population sd, constant
// columns get scale 1).
inline void fit_normalization(Model& m, const FeatureMatrix& fm) {
  const std::size_t n = fm.n_rows(), d = fm.n_cols();
  m.feat_mean.assign(d, 0.0);
  m.feat_scale.assign(d, 1.0);
  for (const auto& row : fm.rows)
    for (std::size_t j = 0; j < d; ++j) m.feat_mean[j] += row[j];
  for (auto& v : m.feat_mean) v /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : fm.rows)
    for (std::size_t j = 0; j < d; ++j) var[j] += (row[j] - m.feat_mean[j]) * (row[j] - m.feat_mean[j]);
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    m.feat_scale[j] = sd > 1e-12 * std::max(1.0, std::abs(m.feat_mean[j])) ? sd : 1.0;
  }
}

inline std::pair<double, double> loss_acc(const Model& m, const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  if (x.empty()) return {0.0, 0.0};
  double loss = 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = forward(m, x[i]).probs;
    loss -= std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
    hit += static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin()) == y[i];
  }
  return {loss / static_cast<double>(x.size()), static_cast<double>(hit) / static_cast<double>(x.size())};
}

inline TrainResult fit(Model m, const FeatureMatrix& train_set, const FeatureMatrix& val_set, const TrainConfig& tc) {
  tc.validate();
  require_labels(train_set, "training");
  const std::size_t c = m.cfg.n_classes;
  if (train_set.n_rows() < 5 * c) {
    fail(ErrorKind::invalid_argument, "training needs at least " + std::to_string(5 * c) + " samples, got " +
                                          std::to_string(train_set.n_rows()));
  }
  std::vector<std::size_t> per_class(c, 0);
  for (int y : *train_set.labels) {
    detail::check_label(m, y);
    ++per_class[static_cast<std::size_t>(y)];
  }
  for (std::size_t k = 0; k < c; ++k) {
    if (per_class[k] == 0) fail(ErrorKind::stratification, "class " + std::to_string(k) + " is absent from the training split");
  }
  fit_normalization(m, train_set);
  std::vector<std::vector<double>> xs, vx;
  for (const auto& row : train_set.rows) xs.push_back(prepare_input(m, row));
  std::vector<int> vy;
  if (val_set.n_rows()) {
    require_labels(val_set, "validation");
    for (const auto& row : val_set.rows) vx.push_back(prepare_input(m, row));
    vy = *val_set.labels;
  }
  const auto& ys = *train_set.labels;

  std::vector<std::vector<double>> m1(m.params.size()), m2(m.params.size());
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    m1[k].assign(m.params[k].w.size(), 0.0);
    m2[k].assign(m.params[k].w.size(), 0.0);
  }
  const CounterRng shuffle_base(tc.seed, "shuffle");
  std::vector<std::size_t> order(xs.size());
  TrainResult res;
  long step = 0;
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto rng = shuffle_base.split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      std::vector<std::vector<double>> bx;
      std::vector<int> by;
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(xs[order[i]]);
        by.push_back(ys[order[i]]);
      }
      const auto lg = loss_and_grad(m, bx, by, tc.grad_clip);
      ++step;
      if (tc.learning_rate == 0.0) continue;
      const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < m.params.size(); ++k) {
        auto& w = m.params[k].w;
        const auto& g = lg.grads[k];
        for (std::size_t j = 0; j < w.size(); ++j) {
          m1[k][j] = tc.beta1 * m1[k][j] + (1.0 - tc.beta1) * g[j];
          m2[k][j] = tc.beta2 * m2[k][j] + (1.0 - tc.beta2) * g[j] * g[j];
          w[j] -= tc.learning_rate * (m1[k][j] / c1) / (std::sqrt(m2[k][j] / c2) + tc.adam_eps);
        }
      }
    }
    EpochRecord rec{epoch, 0, 0, 0, 0};
    std::tie(rec.train_loss, rec.train_acc) = loss_acc(m, xs, ys);
    std::tie(rec.val_loss, rec.val_acc) = loss_acc(m, vx, vy);
    res.history.push_back(rec);
  }
  res.model = std::move(m);
  return res;
}

inline std::size_t class_count(const FeatureMatrix& fm, std::size_t requested) {
  if (requested) return requested;
  int hi = 0;
  if (fm.labels)
    for (int y : *fm.labels) hi = std::max(hi, y);
  return std::max<std::size_t>(2, static_cast<std::size_t>(hi) + 1);
}

}  // namespace detail

inline TrainResult train(const FeatureMatrix& train_set, const FeatureMatrix& val_set, const ModelConfig& mc,
                         const TrainConfig& tc) {
  return detail::fit(make_gru(mc, train_set.n_cols()), train_set, val_set, tc);
}

// Holds out tc.val_fraction of the data (stratified) for the history's
// validation columns.
inline TrainResult train(const FeatureMatrix& dataset, const ModelConfig& mc, const TrainConfig& tc) {
  tc.validate();
  detail::require_labels(dataset, "training");
  const auto s = stratified_split(*dataset.labels, {1.0 - tc.val_fraction, tc.val_fraction, 0.0}, tc.seed);
  return train(select_rows(dataset, s.train), select_rows(dataset, s.val), mc, tc);
}

inline TrainResult train_linear_baseline(const FeatureMatrix& train_set, const FeatureMatrix& val_set, const TrainConfig& tc,
                                         std::size_t n_classes = 3) {
  return detail::fit(make_linear(train_set.n_cols(), n_classes), train_set, val_set, tc);
}

inline TrainResult train_linear_baseline(const FeatureMatrix& dataset, const TrainConfig& tc, std::size_t n_classes = 3) {
  tc.validate();
  detail::require_labels(dataset, "training");
  const auto s = stratified_split(*dataset.labels, {1.0 - tc.val_fraction, tc.val_fraction, 0.0}, tc.seed);
  return train_linear_baseline(select_rows(dataset, s.train), select_rows(dataset, s.val), tc, n_classes);
}

// ------------------------------------------------------------------ evaluation

struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;  // rows = true class, cols = predicted
  std::vector<std::string> class_names;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& r : counts)
      for (auto v : r) t += v;
    return t;
  }
};

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
};

struct Evaluation {
  double accuracy = 0;
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0;
  ConfusionMatrix confusion;
};

inline Evaluation evaluate_predictions(const std::vector<int>& truth, const std::vector<int>& predicted,
                                       const std::vector<std::string>& class_names) {
  if (truth.size() != predicted.size()) fail(ErrorKind::shape_mismatch, "truth and predictions differ in count");
  if (truth.empty()) fail(ErrorKind::invalid_argument, "nothing to evaluate");
  const std::size_t c = class_names.size();
  Evaluation ev;
  ev.confusion.class_names = class_names;
  ev.confusion.counts.assign(c, std::vector<std::size_t>(c, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int v : {truth[i], predicted[i]})
      if (v < 0 || static_cast<std::size_t>(v) >= c) fail(ErrorKind::invalid_argument, "class id " + std::to_string(v) + " out of range");
    ++ev.confusion.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  std::size_t diag = 0;
  for (std::size_t k = 0; k < c; ++k) {
    diag += ev.confusion.counts[k][k];
    std::size_t row = 0, col = 0;
    for (std::size_t j = 0; j < c; ++j) {
      row += ev.confusion.counts[k][j];
      col += ev.confusion.counts[j][k];
    }
    ClassMetrics cm;
    const double tp = static_cast<double>(ev.confusion.counts[k][k]);
    if (col) cm.precision = tp / static_cast<double>(col);
    else cm.precision_undefined = true;
    if (row) cm.recall = tp / static_cast<double>(row);
    else cm.recall_undefined = true;
    // 2TP / (2TP + FP + FN): one rounding, so hand counts compare exactly.
    if (tp > 0.0) cm.f1 = 2.0 * tp / static_cast<double>(row + col);
    else cm.f1_undefined = true;
    ev.macro_f1 += cm.f1;
    ev.per_class.push_back(cm);
  }
  ev.macro_f1 /= static_cast<double>(c);
  ev.accuracy = static_cast<double>(diag) / static_cast<double>(truth.size());
  return ev;
}

inline std::vector<int> predict_all(const Model& m, const FeatureMatrix& fm) {
  std::vector<int> out;
  out.reserve(fm.n_rows());
  for (const auto& row : fm.rows) out.push_back(predict(m, row));
  return out;
}

inline Evaluation evaluate(const Model& m, const FeatureMatrix& test_set) {
  detail::require_labels(test_set, "test");
  return evaluate_predictions(*test_set.labels, predict_all(m, test_set), m.class_names);
}

// ------------------------------------------------------------------ persistence

inline constexpr char kModelMagic[8] = {'E', 'E', 'G', 'S', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_le(std::istream& is, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) fail(ErrorKind::parse, "model file truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

inline void put_array(std::ostream& os, const std::string& name, std::size_t rows, std::size_t cols, const std::vector<double>& w) {
  put_u32(os, static_cast<std::uint32_t>(name.size()));
  os.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u32(os, static_cast<std::uint32_t>(rows));
  put_u32(os, static_cast<std::uint32_t>(cols));
  for (double v : w) put_f64(os, v);
}

inline std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + v[i];
  return s;
}

}  // namespace detail

// Binary container: magic, format version, a key=value text header with the
// configuration, then named shape-tagged little-endian float64 arrays.
inline void write_model(std::ostream& os, const Model& m) {
  std::ostringstream hdr;
  hdr << "kind=" << to_string(m.kind) << '\n'
      << "seq_len=" << m.cfg.seq_len << '\n'
      << "feat_dim=" << m.cfg.feat_dim << '\n'
      << "hidden_size=" << m.cfg.hidden_size << '\n'
      << "n_classes=" << m.cfg.n_classes << '\n'
      << "seed=" << m.cfg.seed << '\n'
      << "n_features=" << m.n_features << '\n'
      << "class_names=" << detail::join(m.class_names, ';') << '\n';
  const std::string h = hdr.str();
  os.write(kModelMagic, sizeof kModelMagic);
  detail::put_u32(os, kModelFormatVersion);
  detail::put_u32(os, static_cast<std::uint32_t>(h.size()));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  detail::put_u32(os, static_cast<std::uint32_t>(m.params.size() + 2));
  detail::put_array(os, "feat_mean", 1, m.feat_mean.size(), m.feat_mean);
  detail::put_array(os, "feat_scale", 1, m.feat_scale.size(), m.feat_scale);
  for (const auto& p : m.params) detail::put_array(os, p.name, p.rows, p.cols, p.w);
  if (!os) fail(ErrorKind::io, "failed writing model");
}

inline Model read_model(std::istream& is) {
  char magic[sizeof kModelMagic];
  is.read(magic, sizeof magic);
  if (!is || !std::equal(magic, magic + sizeof magic, kModelMagic)) fail(ErrorKind::parse, "not a model file (bad magic)");
  const auto version = detail::get_le(is, 4);
  if (version != kModelFormatVersion) fail(ErrorKind::parse, "unsupported model format version " + std::to_string(version));
  std::string h(detail::get_le(is, 4), '\0');
  is.read(h.data(), static_cast<std::streamsize>(h.size()));
  std::map<std::string, std::string> kv;
  std::istringstream hs(h);
  for (std::string line; std::getline(hs, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto num = [&](const char* key) -> std::uint64_t {
    const auto it = kv.find(key);
    if (it == kv.end()) fail(ErrorKind::parse, std::string("model header lacks ") + key);
    return std::stoull(it->second);
  };
  Model m;
  const auto kind = kv["kind"];
  if (kind != "gru" && kind != "linear") fail(ErrorKind::parse, "unknown model kind '" + kind + "'");
  m.kind = kind == "gru" ? ModelKind::gru : ModelKind::linear;
  m.cfg.seq_len = num("seq_len");
  m.cfg.feat_dim = num("feat_dim");
  m.cfg.hidden_size = num("hidden_size");
  m.cfg.n_classes = num("n_classes");
  m.cfg.seed = num("seed");
  m.n_features = num("n_features");
  std::istringstream cn(kv["class_names"]);
  for (std::string s; std::getline(cn, s, ';');) m.class_names.push_back(s);
  const auto count = detail::get_le(is, 4);
  for (std::uint64_t a = 0; a < count; ++a) {
    std::string name(detail::get_le(is, 4), '\0');
    is.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto rows = detail::get_le(is, 4), cols = detail::get_le(is, 4);
    std::vector<double> w(rows * cols);
    for (auto& v : w) v = std::bit_cast<double>(detail::get_le(is, 8));
    if (name == "feat_mean") m.feat_mean = std::move(w);
    else if (name == "feat_scale") m.feat_scale = std::move(w);
    else m.params.push_back(Param{name, rows, cols, std::move(w)});
  }
  const std::size_t expect = m.kind == ModelKind::gru ? std::size_t{kGruSlots} : 2;
  if (m.params.size() != expect || m.feat_mean.size() != m.n_features || m.feat_scale.size() != m.n_features ||
      m.class_names.size() != m.cfg.n_classes) {
    fail(ErrorKind::parse, "model file arrays do not match its header");
  }
  return m;
}

inline void save_model(const std::string& path, const Model& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  write_model(os, m);
}

inline Model load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open '" + path + "'");
  return read_model(is);
}

inline void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  os.precision(17);
  for (const auto& r : history) os << r.epoch << ',' << r.train_loss << ',' << r.train_acc << ',' << r.val_loss << ',' << r.val_acc << '\n';
}

}  // namespace eegscrub
