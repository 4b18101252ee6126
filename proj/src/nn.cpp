#include "owcsim/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace owcsim {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double tanh_fn(double z) { return std::tanh(z); }

void check_model_shape(const LstmModel& model) {
  if (model.layers.empty()) throw std::invalid_argument("LstmModel: needs >= 1 layer");
  const int hidden = model.layers.front().hidden_dim();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    if (layer.hidden_dim() != hidden) {
      throw std::invalid_argument("LstmModel: stacked layers must share hidden size");
    }
    const int expect_in = l == 0 ? layer.input_dim() : hidden;
    if (layer.input_dim() != expect_in || layer.w_input.rows() != 4 * hidden ||
        layer.w_recurrent.rows() != 4 * hidden || layer.bias.size() != 4 * hidden) {
      throw std::invalid_argument("LstmModel: inconsistent layer dimensions");
    }
  }
  if (model.head_weights.cols() != hidden ||
      model.head_weights.rows() != model.head_bias.size()) {
    throw std::invalid_argument("LstmModel: inconsistent head dimensions");
  }
}

struct StepCache {
  Eigen::MatrixXd x;  // layer input
  Eigen::MatrixXd i, f, g, o;
  Eigen::MatrixXd c_prev, c, tanh_c, h_prev, h;
};

// Full forward pass; optionally fills the per-(timestep, layer) cache needed
// for backpropagation through time.
Eigen::MatrixXd forward_impl(const LstmModel& model,
                             const std::vector<Eigen::MatrixXd>& steps,
                             std::vector<std::vector<StepCache>>* cache) {
  check_model_shape(model);
  if (steps.empty()) throw std::invalid_argument("lstm_forward: empty input sequence");
  const auto batch = steps.front().cols();
  const int n_layers = model.num_layers();
  const int hidden = model.hidden_dim();
  for (const auto& s : steps) {
    if (s.rows() != model.input_dim() || s.cols() != batch) {
      throw std::invalid_argument("lstm_forward: input dimension mismatch");
    }
  }

  std::vector<Eigen::MatrixXd> h(n_layers, Eigen::MatrixXd::Zero(hidden, batch));
  std::vector<Eigen::MatrixXd> c(n_layers, Eigen::MatrixXd::Zero(hidden, batch));
  if (cache) {
    cache->assign(steps.size(), std::vector<StepCache>(n_layers));
  }

  for (std::size_t t = 0; t < steps.size(); ++t) {
    Eigen::MatrixXd x = steps[t];
    for (int l = 0; l < n_layers; ++l) {
      const auto& layer = model.layers[l];
      Eigen::MatrixXd z = layer.w_input * x + layer.w_recurrent * h[l];
      z.colwise() += layer.bias;
      Eigen::MatrixXd gi = z.topRows(hidden).unaryExpr(&sigmoid);
      Eigen::MatrixXd gf = z.middleRows(hidden, hidden).unaryExpr(&sigmoid);
      Eigen::MatrixXd gg = z.middleRows(2 * hidden, hidden).unaryExpr(&tanh_fn);
      Eigen::MatrixXd go = z.bottomRows(hidden).unaryExpr(&sigmoid);
      Eigen::MatrixXd c_new = gf.cwiseProduct(c[l]) + gi.cwiseProduct(gg);
      Eigen::MatrixXd tanh_c = c_new.unaryExpr(&tanh_fn);
      Eigen::MatrixXd h_new = go.cwiseProduct(tanh_c);
      if (cache) {
        auto& sc = (*cache)[t][l];
        sc.x = x;
        sc.i = gi;
        sc.f = gf;
        sc.g = gg;
        sc.o = go;
        sc.c_prev = c[l];
        sc.c = c_new;
        sc.tanh_c = tanh_c;
        sc.h_prev = h[l];
        sc.h = h_new;
      }
      c[l] = std::move(c_new);
      h[l] = h_new;
      x = std::move(h_new);
    }
  }

  Eigen::MatrixXd out = model.head_weights * h.back();
  out.colwise() += model.head_bias;
  return out;
}

std::vector<Eigen::MatrixXd> pack_window(const LstmModel& model,
                                         const Eigen::MatrixXd& window) {
  if (window.rows() != model.input_dim() ||
      (model.window > 0 && window.cols() != model.window)) {
    throw std::invalid_argument("lstm_forward: window dimension mismatch");
  }
  std::vector<Eigen::MatrixXd> steps;
  steps.reserve(window.cols());
  for (Eigen::Index t = 0; t < window.cols(); ++t) {
    steps.push_back(window.col(t));
  }
  return steps;
}

struct ParamSpan {
  double* data;
  Eigen::Index size;
};

struct ConstParamSpan {
  const double* data;
  Eigen::Index size;
};

template <typename ModelLike>
std::vector<ParamSpan> spans_of(ModelLike& m) {
  std::vector<ParamSpan> spans;
  for (auto& layer : m.layers) {
    spans.push_back({layer.w_input.data(), layer.w_input.size()});
    spans.push_back({layer.w_recurrent.data(), layer.w_recurrent.size()});
    spans.push_back({layer.bias.data(), layer.bias.size()});
  }
  spans.push_back({m.head_weights.data(), m.head_weights.size()});
  spans.push_back({m.head_bias.data(), m.head_bias.size()});
  return spans;
}

template <typename ModelLike>
std::vector<ConstParamSpan> const_spans_of(const ModelLike& m) {
  std::vector<ConstParamSpan> spans;
  for (const auto& layer : m.layers) {
    spans.push_back({layer.w_input.data(), layer.w_input.size()});
    spans.push_back({layer.w_recurrent.data(), layer.w_recurrent.size()});
    spans.push_back({layer.bias.data(), layer.bias.size()});
  }
  spans.push_back({m.head_weights.data(), m.head_weights.size()});
  spans.push_back({m.head_bias.data(), m.head_bias.size()});
  return spans;
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
  if (!(c.beta1 > 0.0 && c.beta1 < 1.0) || !(c.beta2 > 0.0 && c.beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: betas must be in (0, 1)");
  }
  if (!(c.epsilon > 0.0)) throw std::invalid_argument("TrainConfig: epsilon must be > 0");
  if (c.batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (c.epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  if (!(c.grad_clip_norm > 0.0)) throw std::invalid_argument("TrainConfig: grad_clip_norm must be > 0");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction <= 0.5)) {
    throw std::invalid_argument("TrainConfig: validation_fraction must be in (0, 0.5]");
  }
  if (!(c.test_fraction >= 0.0 && c.test_fraction <= 0.5)) {
    throw std::invalid_argument("TrainConfig: test_fraction must be in [0, 0.5]");
  }
  if (c.early_stop_patience < 1) throw std::invalid_argument("TrainConfig: early_stop_patience must be >= 1");
}

LstmGradients zero_gradients(const LstmModel& model) {
  LstmGradients g;
  g.layers.reserve(model.layers.size());
  for (const auto& layer : model.layers) {
    LstmLayerWeights zl;
    zl.w_input = Eigen::MatrixXd::Zero(layer.w_input.rows(), layer.w_input.cols());
    zl.w_recurrent = Eigen::MatrixXd::Zero(layer.w_recurrent.rows(), layer.w_recurrent.cols());
    zl.bias = Eigen::VectorXd::Zero(layer.bias.size());
    g.layers.push_back(std::move(zl));
  }
  g.head_weights = Eigen::MatrixXd::Zero(model.head_weights.rows(), model.head_weights.cols());
  g.head_bias = Eigen::VectorXd::Zero(model.head_bias.size());
  return g;
}

AdamState make_adam_state(const LstmModel& model) {
  AdamState st;
  st.m = zero_gradients(model);
  st.v = zero_gradients(model);
  st.t = 0;
  return st;
}

Eigen::VectorXd lstm_forward(const LstmModel& model, const Eigen::MatrixXd& window) {
  return forward_impl(model, pack_window(model, window), nullptr).col(0);
}

Eigen::MatrixXd lstm_forward_batch(const LstmModel& model,
                                   const std::vector<Eigen::MatrixXd>& steps) {
  return forward_impl(model, steps, nullptr);
}

double sequence_loss(const LstmModel& model, const std::vector<Eigen::MatrixXd>& steps,
                     const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd out = forward_impl(model, steps, nullptr);
  if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
    throw std::invalid_argument("sequence_loss: target dimension mismatch");
  }
  return (out - targets).squaredNorm() / static_cast<double>(out.size());
}

std::pair<LstmGradients, double> bptt_gradients(const LstmModel& model,
                                                const std::vector<Eigen::MatrixXd>& steps,
                                                const Eigen::MatrixXd& targets) {
  std::vector<std::vector<StepCache>> cache;
  const Eigen::MatrixXd out = forward_impl(model, steps, &cache);
  if (out.rows() != targets.rows() || out.cols() != targets.cols()) {
    throw std::invalid_argument("bptt_gradients: target dimension mismatch");
  }

  const int n_layers = model.num_layers();
  const int hidden = model.hidden_dim();
  const auto batch = out.cols();
  const int k = static_cast<int>(steps.size());
  const double loss = (out - targets).squaredNorm() / static_cast<double>(out.size());

  LstmGradients grads = zero_gradients(model);

  // d(loss)/d(output) under the mean-over-batch-and-dims MSE convention.
  const Eigen::MatrixXd d_out = 2.0 * (out - targets) / static_cast<double>(out.size());
  grads.head_weights = d_out * cache[k - 1][n_layers - 1].h.transpose();
  grads.head_bias = d_out.rowwise().sum();

  std::vector<Eigen::MatrixXd> dh_carry(n_layers, Eigen::MatrixXd::Zero(hidden, batch));
  std::vector<Eigen::MatrixXd> dc_carry(n_layers, Eigen::MatrixXd::Zero(hidden, batch));

  for (int t = k - 1; t >= 0; --t) {
    Eigen::MatrixXd dx_down;  // gradient w.r.t. the input of the layer above
    for (int l = n_layers - 1; l >= 0; --l) {
      const auto& sc = cache[t][l];
      const auto& layer = model.layers[l];

      Eigen::MatrixXd dh = dh_carry[l];
      if (l == n_layers - 1 && t == k - 1) {
        dh += model.head_weights.transpose() * d_out;
      }
      if (l < n_layers - 1) {
        dh += dx_down;
      }

      Eigen::MatrixXd dc = dc_carry[l];
      dc.array() += dh.array() * sc.o.array() * (1.0 - sc.tanh_c.array().square());

      Eigen::MatrixXd dz(4 * hidden, batch);
      dz.topRows(hidden).array() =
          dc.array() * sc.g.array() * sc.i.array() * (1.0 - sc.i.array());
      dz.middleRows(hidden, hidden).array() =
          dc.array() * sc.c_prev.array() * sc.f.array() * (1.0 - sc.f.array());
      dz.middleRows(2 * hidden, hidden).array() =
          dc.array() * sc.i.array() * (1.0 - sc.g.array().square());
      dz.bottomRows(hidden).array() =
          dh.array() * sc.tanh_c.array() * sc.o.array() * (1.0 - sc.o.array());

      grads.layers[l].w_input += dz * sc.x.transpose();
      grads.layers[l].w_recurrent += dz * sc.h_prev.transpose();
      grads.layers[l].bias += dz.rowwise().sum();

      dx_down = layer.w_input.transpose() * dz;
      dh_carry[l] = layer.w_recurrent.transpose() * dz;
      dc_carry[l] = dc.cwiseProduct(sc.f);
    }
  }
  return {std::move(grads), loss};
}

std::pair<LstmGradients, double> bptt_gradients(const LstmModel& model,
                                                std::span<const SequenceExample> batch) {
  if (batch.empty()) throw std::invalid_argument("bptt_gradients: empty batch");
  const auto k = batch.front().window.cols();
  const auto in = batch.front().window.rows();
  const auto out_dim = batch.front().target.size();
  std::vector<Eigen::MatrixXd> steps(k, Eigen::MatrixXd(in, batch.size()));
  Eigen::MatrixXd targets(out_dim, batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    if (ex.window.rows() != in || ex.window.cols() != k || ex.target.size() != out_dim) {
      throw std::invalid_argument("bptt_gradients: inconsistent batch dimensions");
    }
    for (Eigen::Index t = 0; t < k; ++t) {
      steps[t].col(b) = ex.window.col(t);
    }
    targets.col(b) = ex.target;
  }
  return bptt_gradients(model, steps, targets);
}

void optimizer_step(LstmModel& model, const LstmGradients& grads, AdamState& opt_state,
                    const TrainConfig& config) {
  auto params = spans_of(model);
  auto gspans = const_spans_of(grads);
  auto mspans = spans_of(opt_state.m);
  auto vspans = spans_of(opt_state.v);
  if (params.size() != gspans.size()) {
    throw std::invalid_argument("optimizer_step: gradient shape mismatch");
  }

  double sq_norm = 0.0;
  for (const auto& s : gspans) {
    for (Eigen::Index j = 0; j < s.size; ++j) sq_norm += s.data[j] * s.data[j];
  }
  const double norm = std::sqrt(sq_norm);
  const double scale = norm > config.grad_clip_norm ? config.grad_clip_norm / norm : 1.0;

  opt_state.t += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(opt_state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(opt_state.t));

  for (std::size_t si = 0; si < params.size(); ++si) {
    if (params[si].size != gspans[si].size) {
      throw std::invalid_argument("optimizer_step: gradient shape mismatch");
    }
    double* p = params[si].data;
    const double* gr = gspans[si].data;
    double* m = mspans[si].data;
    double* v = vspans[si].data;
    for (Eigen::Index j = 0; j < params[si].size; ++j) {
      const double gc = gr[j] * scale;
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * gc;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * gc * gc;
      p[j] -= config.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + config.epsilon);
    }
  }
}

double gradient_check(const LstmModel& model, const SequenceExample& sample, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("gradient_check: step must be > 0");
  auto steps = pack_window(model, sample.window);
  Eigen::MatrixXd targets = sample.target;

  auto [bp, loss] = bptt_gradients(model, steps, targets);
  (void)loss;

  LstmModel probe = model;
  auto params = spans_of(probe);
  auto gspans = const_spans_of(bp);

  double max_rel = 0.0;
  for (std::size_t si = 0; si < params.size(); ++si) {
    for (Eigen::Index j = 0; j < params[si].size; ++j) {
      double& p = params[si].data[j];
      const double orig = p;
      p = orig + step;
      const double lp = sequence_loss(probe, steps, targets);
      p = orig - step;
      const double lm = sequence_loss(probe, steps, targets);
      p = orig;
      const double g_fd = (lp - lm) / (2.0 * step);
      const double g_bp = gspans[si].data[j];
      const double denom = std::max({std::abs(g_fd), std::abs(g_bp), 1e-12});
      max_rel = std::max(max_rel, std::abs(g_fd - g_bp) / denom);
    }
  }
  return max_rel;
}

// ---------------------------------------------------------------------------
// Serialization. Little-endian, versioned:
//   magic "OWCLSTM\0", u32 version,
//   u32 n_layers, input_dim, hidden_dim, output_dim, window,
//   u32 n_hyper, then per entry: u32 key_len, key bytes, f64 value,
//   feature_mean/scale (input_dim f64 each), target_mean/scale (output_dim),
//   per layer: w_input, w_recurrent, bias (column-major f64),
//   head_weights, head_bias.
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint8_t kModelMagic[8] = {'O', 'W', 'C', 'L', 'S', 'T', 'M', '\0'};
constexpr std::uint32_t kModelVersion = 1;

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_f64(std::vector<std::uint8_t>& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void append_matrix(std::vector<std::uint8_t>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.size(); ++j) append_f64(out, m.data()[j]);
}

void append_vector(std::vector<std::uint8_t>& out, const Eigen::VectorXd& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j) append_f64(out, v[j]);
}

struct ByteReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw FormatError("model file truncated");
  }
  std::uint32_t read_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  double read_f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(v);
  }
  std::string read_str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
  Eigen::MatrixXd read_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = read_f64();
    return m;
  }
  Eigen::VectorXd read_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = read_f64();
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const LstmModel& model) {
  check_model_shape(model);
  if (model.feature_mean.size() != model.input_dim() ||
      model.feature_scale.size() != model.input_dim() ||
      model.target_mean.size() != model.output_dim() ||
      model.target_scale.size() != model.output_dim()) {
    throw std::invalid_argument("serialize_model: normalization stat dimensions mismatch");
  }
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kModelMagic), std::end(kModelMagic));
  append_u32(out, kModelVersion);
  append_u32(out, static_cast<std::uint32_t>(model.num_layers()));
  append_u32(out, static_cast<std::uint32_t>(model.input_dim()));
  append_u32(out, static_cast<std::uint32_t>(model.hidden_dim()));
  append_u32(out, static_cast<std::uint32_t>(model.output_dim()));
  append_u32(out, static_cast<std::uint32_t>(model.window));
  append_u32(out, static_cast<std::uint32_t>(model.hyper.size()));
  for (const auto& [key, value] : model.hyper) {
    append_u32(out, static_cast<std::uint32_t>(key.size()));
    out.insert(out.end(), key.begin(), key.end());
    append_f64(out, value);
  }
  append_vector(out, model.feature_mean);
  append_vector(out, model.feature_scale);
  append_vector(out, model.target_mean);
  append_vector(out, model.target_scale);
  for (const auto& layer : model.layers) {
    append_matrix(out, layer.w_input);
    append_matrix(out, layer.w_recurrent);
    append_vector(out, layer.bias);
  }
  append_matrix(out, model.head_weights);
  append_vector(out, model.head_bias);
  return out;
}

LstmModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r{bytes};
  r.need(8);
  if (std::memcmp(bytes.data(), kModelMagic, 8) != 0) {
    throw FormatError("model file: bad magic");
  }
  r.pos = 8;
  const std::uint32_t version = r.read_u32();
  if (version != kModelVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t n_layers = r.read_u32();
  const std::uint32_t input_dim = r.read_u32();
  const std::uint32_t hidden = r.read_u32();
  const std::uint32_t output_dim = r.read_u32();
  const std::uint32_t window = r.read_u32();
  if (n_layers == 0 || input_dim == 0 || hidden == 0 || output_dim == 0 ||
      n_layers > 64 || input_dim > 65536 || hidden > 65536 || output_dim > 65536) {
    throw FormatError("model file: implausible dimensions");
  }
  LstmModel model;
  model.window = static_cast<int>(window);
  const std::uint32_t n_hyper = r.read_u32();
  for (std::uint32_t i = 0; i < n_hyper; ++i) {
    const std::uint32_t len = r.read_u32();
    if (len > 4096) throw FormatError("model file: implausible metadata key length");
    std::string key = r.read_str(len);
    const double value = r.read_f64();
    model.hyper.emplace(std::move(key), value);
  }
  model.feature_mean = r.read_vector(input_dim);
  model.feature_scale = r.read_vector(input_dim);
  model.target_mean = r.read_vector(output_dim);
  model.target_scale = r.read_vector(output_dim);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const std::uint32_t in = l == 0 ? input_dim : hidden;
    LstmLayerWeights layer;
    layer.w_input = r.read_matrix(4 * hidden, in);
    layer.w_recurrent = r.read_matrix(4 * hidden, hidden);
    layer.bias = r.read_vector(4 * hidden);
    model.layers.push_back(std::move(layer));
  }
  model.head_weights = r.read_matrix(output_dim, hidden);
  model.head_bias = r.read_vector(output_dim);
  if (r.pos != bytes.size()) throw FormatError("model file: trailing bytes");
  for (Eigen::Index j = 0; j < model.feature_scale.size(); ++j) {
    if (!(model.feature_scale[j] > 0.0)) throw FormatError("model file: non-positive feature scale");
  }
  for (Eigen::Index j = 0; j < model.target_scale.size(); ++j) {
    if (!(model.target_scale[j] > 0.0)) throw FormatError("model file: non-positive target scale");
  }
  return model;
}

void save_model(const std::string& path, const LstmModel& model) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

LstmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace owcsim
