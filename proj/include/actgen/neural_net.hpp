#pragma once

// Multilayer perceptron over tabular rows. Each categorical column enters
// either one-hot or through a learned embedding table; continuous columns
// enter standardized. Hidden layers compute h = g(W^T x + b); the output
// layer is affine followed by a softmax (classification) or identity
// (regression) head.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "actgen/encoding.hpp"
#include "actgen/error.hpp"
#include "actgen/rng.hpp"

namespace actgen {

enum class Activation { Sigmoid, ReLU, Identity };
enum class Head { Softmax, Identity };
enum class LossKind { CrossEntropy, Rmse };
enum class OptimizerKind { Sgd, Adam };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}
inline std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::Sgd ? "sgd" : "adam"; }
inline std::string_view to_string(LossKind l) { return l == LossKind::CrossEntropy ? "cross_entropy" : "rmse"; }

inline Activation activation_from_string(std::string_view s) {
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "relu") return Activation::ReLU;
  if (s == "identity") return Activation::Identity;
  throw Error(ErrorCode::ConfigError, "neural-net", "unknown activation '" + std::string(s) + "'");
}
inline OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "sgd") return OptimizerKind::Sgd;
  if (s == "adam") return OptimizerKind::Adam;
  throw Error(ErrorCode::ConfigError, "neural-net", "unknown optimizer '" + std::string(s) + "'");
}

struct DenseLayer {
  std::size_t in = 0, out = 0;
  std::vector<double> weights;  // in x out, row-major: weights[i * out + j]
  std::vector<double> bias;
  Activation activation = Activation::Identity;

  double& w(std::size_t i, std::size_t j) { return weights[i * out + j]; }
  double w(std::size_t i, std::size_t j) const { return weights[i * out + j]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NeuralNet {
  FeatureSchema schema;
  bool embedded = false;
  EmbeddingMode embeddings;  // one table per categorical column when embedded
  std::vector<DenseLayer> layers;  // hidden layers then the output layer
  Head head = Head::Softmax;
  double target_mean = 0.0, target_scale = 1.0;  // regression targets are learnt standardized

  EncoderMode encoder_mode() const {
    if (embedded) return embeddings;
    return OneHotMode{};
  }
  std::size_t input_width() const { return layers.empty() ? 0 : layers.front().in; }
  std::size_t output_width() const { return layers.empty() ? 0 : layers.back().out; }

  friend bool operator==(const NeuralNet& a, const NeuralNet& b) {
    auto tables_eq = [](const EmbeddingMode& x, const EmbeddingMode& y) { return x.tables == y.tables; };
    return a.schema == b.schema && a.embedded == b.embedded && tables_eq(a.embeddings, b.embeddings) &&
           a.layers == b.layers && a.head == b.head && a.target_mean == b.target_mean &&
           a.target_scale == b.target_scale;
  }
};

/// Hidden widths tapering geometrically from the input width to the output
/// width, capped at `cap`.
inline std::vector<std::size_t> taper_widths(std::size_t in, std::size_t out, std::size_t hidden_layers,
                                             std::size_t cap = 128) {
  std::vector<std::size_t> widths;
  const double ratio = static_cast<double>(std::max<std::size_t>(out, 1)) / static_cast<double>(std::max<std::size_t>(in, 1));
  for (std::size_t l = 1; l <= hidden_layers; ++l) {
    const double w = static_cast<double>(in) * std::pow(ratio, static_cast<double>(l) / static_cast<double>(hidden_layers + 1));
    widths.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(w)), 2, cap));
  }
  return widths;
}

namespace detail {

inline void init_dense(DenseLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in);
  const double fan_out = static_cast<double>(layer.out);
  const double limit = layer.activation == Activation::ReLU ? std::sqrt(6.0 / fan_in)
                                                             : std::sqrt(6.0 / (fan_in + fan_out));
  layer.weights.resize(layer.in * layer.out);
  for (double& w : layer.weights) w = rng.uniform(-limit, limit);
  layer.bias.assign(layer.out, 0.0);
}

}  // namespace detail

/// Fresh network for `schema` with the given hidden widths. Embedding
/// tables are sized by the column's slots with width embedding_dim(n).
inline NeuralNet make_net(const FeatureSchema& schema, bool embedded, const std::vector<std::size_t>& hidden,
                          Activation activation, std::size_t outputs, Head head, std::uint64_t seed) {
  Rng rng(seed);
  NeuralNet net;
  net.schema = schema;
  net.embedded = embedded;
  net.head = head;
  if (embedded) {
    for (const auto& col : schema.columns()) {
      if (!col.categorical()) continue;
      EmbeddingTable t;
      t.column = col.name;
      t.rows = col.slots();
      t.dim = embedding_dim(std::max<std::size_t>(col.cardinality(), 1));
      t.values.resize(t.rows * t.dim);
      for (double& v : t.values) v = rng.normal(0.0, 1.0);
      net.embeddings.tables.push_back(std::move(t));
    }
  }
  std::size_t in = encoded_width(schema, net.encoder_mode());
  for (std::size_t width : hidden) {
    DenseLayer layer{in, width, {}, {}, activation};
    detail::init_dense(layer, rng);
    net.layers.push_back(std::move(layer));
    in = width;
  }
  DenseLayer output{in, outputs, {}, {}, Activation::Identity};
  detail::init_dense(output, rng);
  net.layers.push_back(std::move(output));
  return net;
}

inline double activate(Activation g, double z) {
  switch (g) {
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Identity: return z;
  }
  return z;
}

/// g'(z) expressed through the activation value a = g(z); ReLU uses 0 at 0.
inline double activation_slope(Activation g, double a) {
  switch (g) {
    case Activation::Sigmoid: return a * (1.0 - a);
    case Activation::ReLU: return a > 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

inline void softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

/// Activations of every layer for one input vector.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::size_t> active;            // indices of non-zero inputs
  std::vector<std::vector<double>> outputs;   // post-activation, per layer; last is pre-head
  std::vector<double> result;                 // after the head
};

inline void forward_dense(const NeuralNet& net, std::span<const double> x, ForwardTrace& trace) {
  if (x.size() != net.input_width())
    throw Error(ErrorCode::DimensionMismatch, "neural-net",
                "input width " + std::to_string(x.size()) + " != " + std::to_string(net.input_width()));
  trace.input.assign(x.begin(), x.end());
  trace.active.clear();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) trace.active.push_back(i);
  trace.outputs.resize(net.layers.size());
  const std::vector<double>* prev = &trace.input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    std::vector<double>& z = trace.outputs[l];
    z.assign(layer.bias.begin(), layer.bias.end());
    if (l == 0) {
      for (std::size_t i : trace.active) {
        const double xi = (*prev)[i];
        const double* wrow = &layer.weights[i * layer.out];
        for (std::size_t j = 0; j < layer.out; ++j) z[j] += wrow[j] * xi;
      }
    } else {
      for (std::size_t i = 0; i < layer.in; ++i) {
        const double xi = (*prev)[i];
        if (xi == 0.0) continue;
        const double* wrow = &layer.weights[i * layer.out];
        for (std::size_t j = 0; j < layer.out; ++j) z[j] += wrow[j] * xi;
      }
    }
    for (double& v : z) v = activate(layer.activation, v);
    prev = &z;
  }
  trace.result = trace.outputs.back();
  if (net.head == Head::Softmax) softmax_inplace(trace.result);
}

inline std::vector<double> input_vector(const NeuralNet& net, const IndexedRow& row) {
  std::vector<double> x;
  encode_indexed(row, net.schema, net.encoder_mode(), x);
  return x;
}

/// Output of the network (probabilities, or the standardized regression value).
inline std::vector<double> forward(const NeuralNet& net, const IndexedRow& row) {
  ForwardTrace trace;
  forward_dense(net, input_vector(net, row), trace);
  return trace.result;
}

inline std::vector<double> forward(const NeuralNet& net, std::span<const double> x) {
  ForwardTrace trace;
  forward_dense(net, x, trace);
  return trace.result;
}

inline constexpr double kProbabilityClip = 1e-12;

inline double loss_cross_entropy(std::span<const double> probs, std::size_t label) {
  const double p = std::clamp(probs[label], kProbabilityClip, 1.0 - kProbabilityClip);
  return -std::log(p);
}

inline double loss_rmse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw Error(ErrorCode::DimensionMismatch, "neural-net", "prediction/target size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

/// Training data for one network. Classification uses `labels`;
/// regression uses `targets` in original units.
struct NetDataset {
  std::vector<IndexedRow> rows;
  std::vector<std::size_t> labels;
  std::vector<double> targets;
  std::size_t n_classes = 0;  // 0 means regression

  bool classification() const { return n_classes > 0; }
  std::size_t size() const { return rows.size(); }
};

/// Gradients with the same shapes as the network parameters.
struct NetGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
  std::vector<std::vector<double>> embeddings;
};

inline NetGradients zero_gradients(const NeuralNet& net) {
  NetGradients g;
  for (const auto& l : net.layers) {
    g.weights.emplace_back(l.weights.size(), 0.0);
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  for (const auto& t : net.embeddings.tables) g.embeddings.emplace_back(t.values.size(), 0.0);
  return g;
}

namespace detail {

inline LossKind loss_for(const NeuralNet& net) {
  return net.head == Head::Softmax ? LossKind::CrossEntropy : LossKind::Rmse;
}

/// Loss of one example; the implemented regression loss is the squared
/// error (RMSE is reported from its mean).
inline double example_loss(const NeuralNet& net, const ForwardTrace& trace, const NetDataset& data, std::size_t i) {
  if (net.head == Head::Softmax) return loss_cross_entropy(trace.result, data.labels[i]);
  const double t = (data.targets[i] - net.target_mean) / net.target_scale;
  double s = 0.0;
  for (double f : trace.result) s += (f - t) * (f - t);
  return s / static_cast<double>(trace.result.size());
}

/// Accumulates d(example loss)/d(params) * scale into g.
inline void backprop(const NeuralNet& net, const ForwardTrace& trace, const NetDataset& data, std::size_t i,
                     double scale, NetGradients& g, std::vector<double>& delta, std::vector<double>& next) {
  const std::size_t L = net.layers.size();
  const auto& out = trace.result;
  delta.assign(out.size(), 0.0);
  if (net.head == Head::Softmax) {
    for (std::size_t k = 0; k < out.size(); ++k) delta[k] = out[k];
    delta[data.labels[i]] -= 1.0;
  } else {
    const double t = (data.targets[i] - net.target_mean) / net.target_scale;
    for (std::size_t k = 0; k < out.size(); ++k) delta[k] = 2.0 * (out[k] - t) / static_cast<double>(out.size());
  }
  for (double& d : delta) d *= scale;

  for (std::size_t l = L; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    const std::vector<double>& a = trace.outputs[l];
    // delta currently holds dLoss/d(a_l); fold in the activation slope
    if (l + 1 < L || layer.activation != Activation::Identity)
      for (std::size_t j = 0; j < layer.out; ++j) delta[j] *= activation_slope(layer.activation, a[j]);
    const std::vector<double>& prev = l == 0 ? trace.input : trace.outputs[l - 1];
    auto& gw = g.weights[l];
    auto& gb = g.bias[l];
    for (std::size_t j = 0; j < layer.out; ++j) gb[j] += delta[j];
    const bool need_input_grad = l > 0 || net.embedded;
    if (need_input_grad) next.assign(layer.in, 0.0);
    auto visit = [&](std::size_t k) {
      const double pk = prev[k];
      double* gwrow = &gw[k * layer.out];
      const double* wrow = &layer.weights[k * layer.out];
      double acc = 0.0;
      for (std::size_t j = 0; j < layer.out; ++j) {
        gwrow[j] += pk * delta[j];
        acc += wrow[j] * delta[j];
      }
      if (need_input_grad) next[k] = acc;
    };
    if (l == 0 && !net.embedded) {
      for (std::size_t k : trace.active) visit(k);
    } else {
      for (std::size_t k = 0; k < layer.in; ++k) visit(k);
    }
    if (l > 0) delta.swap(next);
  }

  if (net.embedded) {
    // `next` holds dLoss/d(input); scatter the embedded spans to table rows
    const auto layout = encoded_layout(net.schema, net.encoder_mode());
    std::size_t cat = 0;
    const IndexedRow* row = &data.rows[i];
    for (std::size_t c = 0; c < net.schema.size(); ++c) {
      if (!net.schema.columns()[c].categorical()) continue;
      const EmbeddingTable& t = net.embeddings.tables[cat];
      const std::size_t slot = row->categories[cat];
      double* gt = &g.embeddings[cat][slot * t.dim];
      for (std::size_t d = 0; d < t.dim; ++d) gt[d] += next[layout[c].offset + d];
      ++cat;
    }
  }
}

}  // namespace detail

/// Mean loss over `indices` (cross entropy, or mean squared error on
/// standardized targets for regression).
inline double batch_loss(const NeuralNet& net, const NetDataset& data, std::span<const std::size_t> indices) {
  ForwardTrace trace;
  double total = 0.0;
  for (std::size_t i : indices) {
    forward_dense(net, input_vector(net, data.rows[i]), trace);
    total += detail::example_loss(net, trace, data, i);
  }
  return total / static_cast<double>(indices.size());
}

/// Exact gradients of batch_loss with respect to every parameter.
inline NetGradients gradients(const NeuralNet& net, const NetDataset& data, std::span<const std::size_t> indices) {
  NetGradients g = zero_gradients(net);
  ForwardTrace trace;
  std::vector<double> delta, next;
  const double scale = 1.0 / static_cast<double>(indices.size());
  for (std::size_t i : indices) {
    forward_dense(net, input_vector(net, data.rows[i]), trace);
    detail::backprop(net, trace, data, i, scale, g, delta, next);
  }
  return g;
}

/// Calls f(params, grads, n) for every parameter block in a fixed order.
template <typename F>
void for_each_parameter(NeuralNet& net, NetGradients& g, F&& f) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    f(net.layers[l].weights.data(), g.weights[l].data(), net.layers[l].weights.size());
    f(net.layers[l].bias.data(), g.bias[l].data(), net.layers[l].bias.size());
  }
  for (std::size_t t = 0; t < net.embeddings.tables.size(); ++t)
    f(net.embeddings.tables[t].values.data(), g.embeddings[t].data(), net.embeddings.tables[t].values.size());
}

struct TrainConfig {
  std::size_t hidden_layers = 2;
  std::vector<std::size_t> widths;  // empty: geometric taper
  double learning_rate = 1e-3;
  Activation activation = Activation::ReLU;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::size_t batch_size = 256;
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
  bool standardize_target = true;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  std::vector<std::size_t> hidden_widths(std::size_t in, std::size_t out) const {
    if (!widths.empty()) return widths;
    return taper_widths(in, out, hidden_layers);
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"hidden_layers", c.hidden_layers}, {"widths", c.widths},
          {"learning_rate", c.learning_rate}, {"activation", to_string(c.activation)},
          {"optimizer", to_string(c.optimizer)}, {"batch_size", c.batch_size},
          {"epochs", c.epochs}, {"seed", c.seed}, {"standardize_target", c.standardize_target}};
}

struct TrainResult {
  NeuralNet net;
  std::vector<double> loss_history;  // per-epoch mean loss (RMSE for regression)
};

/// Mini-batch training by backpropagation. Deterministic for a fixed seed.
inline TrainResult train(NeuralNet net, const NetDataset& data, const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "neural-net", "batch size must be positive");
  TrainResult result;
  if (data.size() == 0 || cfg.epochs == 0) {
    result.net = std::move(net);
    return result;
  }
  if (!data.classification() && cfg.standardize_target) {
    double sum = 0.0;
    for (double t : data.targets) sum += t;
    net.target_mean = sum / static_cast<double>(data.size());
    double ss = 0.0;
    for (double t : data.targets) ss += (t - net.target_mean) * (t - net.target_mean);
    const double sd = std::sqrt(ss / static_cast<double>(data.size()));
    net.target_scale = sd > 1e-12 ? sd : 1.0;
  }

  Rng rng(derive_seed(cfg.seed, 0x7472616eULL));
  NetGradients g = zero_gradients(net);
  std::vector<std::vector<double>> m1, m2;
  for_each_parameter(net, g, [&](double*, double*, std::size_t n) {
    m1.emplace_back(n, 0.0);
    m2.emplace_back(n, 0.0);
  });

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  ForwardTrace trace;
  std::vector<double> delta, next;
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      g = zero_gradients(net);
      for (std::size_t k = begin; k < end; ++k) {
        const std::size_t i = order[k];
        forward_dense(net, input_vector(net, data.rows[i]), trace);
        epoch_loss += detail::example_loss(net, trace, data, i);
        detail::backprop(net, trace, data, i, scale, g, delta, next);
      }
      ++step;
      std::size_t block = 0;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for_each_parameter(net, g, [&](double* p, double* grad, std::size_t n) {
        auto& a = m1[block];
        auto& b = m2[block];
        ++block;
        if (cfg.optimizer == OptimizerKind::Sgd) {
          for (std::size_t k = 0; k < n; ++k) p[k] -= cfg.learning_rate * grad[k];
          return;
        }
        for (std::size_t k = 0; k < n; ++k) {
          a[k] = cfg.beta1 * a[k] + (1.0 - cfg.beta1) * grad[k];
          b[k] = cfg.beta2 * b[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
          p[k] -= cfg.learning_rate * (a[k] / bc1) / (std::sqrt(b[k] / bc2) + cfg.epsilon);
        }
      });
    }
    double mean = epoch_loss / static_cast<double>(data.size());
    if (!data.classification()) mean = std::sqrt(mean);
    if (!std::isfinite(mean))
      throw Error(ErrorCode::DivergenceDetected, "neural-net", "loss became non-finite in epoch " + std::to_string(epoch));
    result.loss_history.push_back(mean);
  }
  result.net = std::move(net);
  return result;
}

/// Builds a network sized for `data` and trains it.
inline TrainResult fit_net(const FeatureSchema& schema, bool embedded, const NetDataset& data, const TrainConfig& cfg) {
  const std::size_t outputs = data.classification() ? data.n_classes : 1;
  const EncoderMode probe = embedded ? EncoderMode{EmbeddingMode{}} : EncoderMode{OneHotMode{}};
  std::size_t in = 0;
  if (embedded) {
    for (const auto& col : schema.columns())
      in += col.categorical() ? embedding_dim(std::max<std::size_t>(col.cardinality(), 1)) : 1;
  } else {
    in = encoded_width(schema, probe);
  }
  NeuralNet net = make_net(schema, embedded, cfg.hidden_widths(in, outputs), cfg.activation, outputs,
                           data.classification() ? Head::Softmax : Head::Identity, derive_seed(cfg.seed, 0x696e6974ULL));
  return train(std::move(net), data, cfg);
}

inline std::vector<double> predict_proba(const NeuralNet& net, const IndexedRow& row) { return forward(net, row); }

/// Regression prediction in original target units.
inline double predict_value(const NeuralNet& net, const IndexedRow& row) {
  return forward(net, row).front() * net.target_scale + net.target_mean;
}

inline std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Accuracy (classification) or RMSE in target units (regression).
inline double net_metric(const NeuralNet& net, const NetDataset& data, std::span<const std::size_t> indices) {
  if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  for (std::size_t i : indices) {
    if (data.classification()) {
      acc += argmax(predict_proba(net, data.rows[i])) == data.labels[i] ? 1.0 : 0.0;
    } else {
      const double e = predict_value(net, data.rows[i]) - data.targets[i];
      acc += e * e;
    }
  }
  acc /= static_cast<double>(indices.size());
  return data.classification() ? acc : std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

struct DlGrid {
  std::vector<std::size_t> hidden_layers{2};
  std::vector<double> learning_rates{1e-3};
  std::vector<Activation> activations{Activation::ReLU};
  std::vector<OptimizerKind> optimizers{OptimizerKind::Adam};

  std::size_t size() const {
    return hidden_layers.size() * learning_rates.size() * activations.size() * optimizers.size();
  }

  /// Expands the grid around `base` (epochs, batch size and seed come from base).
  std::vector<TrainConfig> expand(const TrainConfig& base) const {
    std::vector<TrainConfig> out;
    for (auto depth : hidden_layers)
      for (auto lr : learning_rates)
        for (auto act : activations)
          for (auto opt : optimizers) {
            TrainConfig c = base;
            c.hidden_layers = depth;
            c.widths.clear();
            c.learning_rate = lr;
            c.activation = act;
            c.optimizer = opt;
            out.push_back(c);
          }
    return out;
  }
};

/// Depth 1-6, learning rate 1e-5..1e-1, sigmoid/ReLU, SGD/Adam: 120 points.
inline DlGrid full_dl_grid() {
  return DlGrid{{1, 2, 3, 4, 5, 6},
                {1e-5, 1e-4, 1e-3, 1e-2, 1e-1},
                {Activation::Sigmoid, Activation::ReLU},
                {OptimizerKind::Sgd, OptimizerKind::Adam}};
}

struct DlGridRow {
  TrainConfig config;
  double train_metric = 0.0;
  double valid_metric = 0.0;
  bool diverged = false;
};

struct DlGridResult {
  std::vector<DlGridRow> rows;
  std::size_t best = 0;
  NeuralNet best_net;
};

/// Seeded split of [0, n) into (train, holdout).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(std::size_t n, double fraction,
                                                                                    std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  std::size_t n_hold = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  if (n >= 2) n_hold = std::clamp<std::size_t>(n_hold, 1, n - 1);
  else n_hold = 0;
  std::vector<std::size_t> hold(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_hold), idx.end());
  std::sort(hold.begin(), hold.end());
  std::sort(train.begin(), train.end());
  return {train, hold};
}

inline NetDataset subset(const NetDataset& data, std::span<const std::size_t> idx) {
  NetDataset out;
  out.n_classes = data.n_classes;
  for (std::size_t i : idx) {
    out.rows.push_back(data.rows[i]);
    if (data.classification())
      out.labels.push_back(data.labels[i]);
    else
      out.targets.push_back(data.targets[i]);
  }
  return out;
}

/// Trains every grid point on the training part and scores the held-out
/// part. Best is highest accuracy or lowest RMSE; diverged points rank last.
inline DlGridResult grid_search_dl(const FeatureSchema& schema, bool embedded, const NetDataset& data,
                                   const std::vector<TrainConfig>& grid, double holdout_fraction = 0.2,
                                   std::uint64_t split_seed = 1) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "neural-net", "empty grid");
  auto [train_idx, hold_idx] = holdout_split(data.size(), holdout_fraction, split_seed);
  const NetDataset train_part = subset(data, train_idx);
  std::vector<std::size_t> all_train(train_part.size()), all_hold;
  for (std::size_t i = 0; i < all_train.size(); ++i) all_train[i] = i;
  DlGridResult result;
  bool have_best = false;
  for (const auto& cfg : grid) {
    DlGridRow row{cfg};
    try {
      TrainResult tr = fit_net(schema, embedded, train_part, cfg);
      row.train_metric = net_metric(tr.net, train_part, all_train);
      row.valid_metric = net_metric(tr.net, data, hold_idx);
      if (!std::isfinite(row.train_metric) && !hold_idx.empty()) row.diverged = true;
      const double score = data.classification() ? row.valid_metric : -row.valid_metric;
      const double best_score = have_best ? (data.classification() ? result.rows[result.best].valid_metric
                                                                   : -result.rows[result.best].valid_metric)
                                          : 0.0;
      const bool finite = std::isfinite(score) || hold_idx.empty();
      if (finite && !row.diverged && (!have_best || score > best_score)) {
        result.best = result.rows.size();
        result.best_net = std::move(tr.net);
        have_best = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DivergenceDetected) throw;
      row.diverged = true;
      row.train_metric = row.valid_metric = std::numeric_limits<double>::quiet_NaN();
    }
    result.rows.push_back(row);
  }
  if (!have_best) throw Error(ErrorCode::DivergenceDetected, "neural-net", "every grid configuration diverged");
  return result;
}

// ---------------------------------------------------------------------------
// Embedding transfer and persistence
// ---------------------------------------------------------------------------

/// Value copy of the network's embedding tables as an encoder mode for
/// `schema`. Later training of the network does not touch the copy.
inline EmbeddingMode transfer_embeddings(const NeuralNet& net, const FeatureSchema& schema) {
  if (!net.embedded) throw Error(ErrorCode::SchemaMismatch, "encoding", "network has no embedding layer");
  EmbeddingMode mode;
  for (const auto& col : schema.columns()) {
    if (!col.categorical()) continue;
    const EmbeddingTable* found = nullptr;
    for (const auto& t : net.embeddings.tables)
      if (t.column == col.name) found = &t;
    if (!found) throw Error(ErrorCode::SchemaMismatch, "encoding", "network has no embedding for " + col.name);
    if (found->rows != col.slots())
      throw Error(ErrorCode::SchemaMismatch, "encoding", "embedding rows for " + col.name + " do not match the schema");
    mode.tables.push_back(*found);
  }
  return mode;
}

inline nlohmann::json net_to_json(const NeuralNet& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers)
    layers.push_back({{"in", l.in}, {"out", l.out}, {"activation", to_string(l.activation)},
                      {"weights", l.weights}, {"bias", l.bias}});
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : net.embeddings.tables) tables.push_back(embedding_to_json(t));
  return {{"schema", schema_to_json(net.schema)},
          {"embedded", net.embedded},
          {"embeddings", std::move(tables)},
          {"layers", std::move(layers)},
          {"head", net.head == Head::Softmax ? "softmax" : "identity"},
          {"target_mean", net.target_mean},
          {"target_scale", net.target_scale}};
}

inline NeuralNet net_from_json(const nlohmann::json& j) {
  NeuralNet net;
  net.schema = schema_from_json(j.at("schema"));
  net.embedded = j.at("embedded");
  for (const auto& t : j.at("embeddings")) net.embeddings.tables.push_back(embedding_from_json(t));
  for (const auto& l : j.at("layers")) {
    DenseLayer layer;
    layer.in = l.at("in");
    layer.out = l.at("out");
    layer.activation = activation_from_string(l.at("activation").get<std::string>());
    layer.weights = l.at("weights").get<std::vector<double>>();
    layer.bias = l.at("bias").get<std::vector<double>>();
    net.layers.push_back(std::move(layer));
  }
  net.head = j.at("head") == "softmax" ? Head::Softmax : Head::Identity;
  net.target_mean = j.at("target_mean");
  net.target_scale = j.at("target_scale");
  return net;
}

}  // namespace actgen
