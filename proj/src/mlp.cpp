#include "hvac/mlp.hpp"

#include "hvac/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hvac {

std::vector<int> MlpParams::architecture() const {
  std::vector<int> sizes;
  if (layers.empty())
    return sizes;
  sizes.push_back(layers.front().in);
  for (const auto &l : layers)
    sizes.push_back(l.out);
  return sizes;
}

MlpParams init_mlp(const std::vector<int> &sizes, std::uint64_t seed) {
  if (sizes.size() < 2)
    throw std::invalid_argument("an MLP needs at least input and output widths");
  for (int s : sizes)
    if (s < 1)
      throw std::invalid_argument("layer widths must be positive");
  MlpParams params;
  params.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    DenseLayer layer;
    layer.in = sizes[k];
    layer.out = sizes[k + 1];
    const bool output = k + 2 == sizes.size();
    const double limit = std::sqrt((output ? 3.0 : 6.0) / layer.in);
    layer.weights.resize(static_cast<std::size_t>(layer.in) * layer.out);
    for (auto &w : layer.weights)
      w = limit * unit(rng);
    layer.bias.assign(layer.out, 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

// Activations of every layer for one input; acts[0] is the input.
void run_forward(const MlpParams &params, std::span<const double> x,
                 std::vector<std::vector<double>> &acts) {
  acts.resize(params.layers.size() + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto &layer = params.layers[k];
    const auto &in = acts[k];
    auto &out = acts[k + 1];
    out.resize(layer.out);
    const bool hidden = k + 1 < params.layers.size();
    for (int o = 0; o < layer.out; ++o) {
      const double *row = &layer.weights[static_cast<std::size_t>(o) * layer.in];
      double s = layer.bias[o];
      for (int i = 0; i < layer.in; ++i)
        s += row[i] * in[i];
      out[o] = hidden ? std::max(s, 0.0) : s;
    }
  }
}

} // namespace

double forward(const MlpParams &params, std::span<const double> features) {
  if (params.layers.empty())
    throw std::invalid_argument("empty network");
  if (static_cast<int>(features.size()) != params.layers.front().in)
    throw std::invalid_argument("feature count does not match the network input");
  for (double f : features)
    if (!std::isfinite(f))
      throw std::domain_error("non-finite network input");
  std::vector<std::vector<double>> acts;
  run_forward(params, features, acts);
  return acts.back()[0];
}

Gradients zero_gradients(const MlpParams &params) {
  Gradients g;
  for (const auto &l : params.layers) {
    DenseLayer z;
    z.in = l.in;
    z.out = l.out;
    z.weights.assign(l.weights.size(), 0.0);
    z.bias.assign(l.bias.size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  return g;
}

double loss_and_gradients(const MlpParams &params, std::span<const Sample> batch,
                          Gradients &grads) {
  grads = zero_gradients(params);
  if (batch.empty())
    throw std::invalid_argument("empty batch");
  const std::size_t n_layers = params.layers.size();
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, prev_delta;
  double loss = 0.0;
  const double scale = 2.0 / static_cast<double>(batch.size());

  for (const auto &sample : batch) {
    run_forward(params, sample.x, acts);
    const double err = acts.back()[0] - sample.y;
    loss += err * err;

    delta.assign(1, scale * err);
    for (std::size_t k = n_layers; k-- > 0;) {
      const auto &layer = params.layers[k];
      auto &g = grads.layers[k];
      const auto &in = acts[k];
      for (int o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        g.bias[o] += d;
        if (d == 0.0)
          continue;
        double *grow = &g.weights[static_cast<std::size_t>(o) * layer.in];
        for (int i = 0; i < layer.in; ++i)
          grow[i] += d * in[i];
      }
      if (k == 0)
        break;
      prev_delta.assign(layer.in, 0.0);
      for (int o = 0; o < layer.out; ++o) {
        const double d = delta[o];
        if (d == 0.0)
          continue;
        const double *row = &layer.weights[static_cast<std::size_t>(o) * layer.in];
        for (int i = 0; i < layer.in; ++i)
          prev_delta[i] += row[i] * d;
      }
      // ReLU derivative of the layer below.
      for (int i = 0; i < layer.in; ++i)
        if (in[i] <= 0.0)
          prev_delta[i] = 0.0;
      std::swap(delta, prev_delta);
    }
  }
  return loss / static_cast<double>(batch.size());
}

double mean_squared_error(const MlpParams &params, std::span<const Sample> samples) {
  if (samples.empty())
    return 0.0;
  std::vector<std::vector<double>> acts;
  double loss = 0.0;
  for (const auto &s : samples) {
    run_forward(params, s.x, acts);
    const double err = acts.back()[0] - s.y;
    loss += err * err;
  }
  return loss / static_cast<double>(samples.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("Adam betas must lie in [0,1)");
  if (!(adam_epsilon > 0.0))
    throw std::invalid_argument("adam_epsilon must be positive");
  if (batch_size < 1)
    throw std::invalid_argument("batch_size must be at least 1");
  if (epochs < 0)
    throw std::invalid_argument("epochs must be non-negative");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation_fraction must lie in [0,1)");
}

AdamState init_adam(const MlpParams &params) {
  return AdamState{zero_gradients(params), zero_gradients(params), 0};
}

namespace {

void adam_update(std::vector<double> &p, const std::vector<double> &g,
                 std::vector<double> &m, std::vector<double> &v,
                 const TrainConfig &config, double c1, double c2) {
  const double b1 = config.beta1, b2 = config.beta2;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    p[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.adam_epsilon);
  }
}

} // namespace

void adam_step(MlpParams &params, const Gradients &grads, AdamState &state,
               const TrainConfig &config) {
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto &layer = params.layers[k];
    adam_update(layer.weights, grads.layers[k].weights, state.m.layers[k].weights,
                state.v.layers[k].weights, config, c1, c2);
    adam_update(layer.bias, grads.layers[k].bias, state.m.layers[k].bias,
                state.v.layers[k].bias, config, c1, c2);
  }
}

TrainResult train(const Dataset &dataset, const TrainConfig &config, double p_max) {
  config.validate();
  if (dataset.examples.empty())
    throw std::invalid_argument("cannot train on an empty dataset");

  // Hold out whole days.
  const int n_days = static_cast<int>(dataset.day_ids.size());
  std::vector<int> day_order(n_days);
  std::iota(day_order.begin(), day_order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(day_order.begin(), day_order.end(), rng);
  int n_val = static_cast<int>(std::lround(config.validation_fraction * n_days));
  if (config.validation_fraction > 0.0 && n_val == 0 && n_days >= 2)
    n_val = 1;
  n_val = std::min(n_val, n_days - 1);
  std::vector<bool> is_val(n_days, false);
  for (int k = 0; k < n_val; ++k)
    is_val[day_order[k]] = true;

  TrainResult result;
  for (int d = 0; d < n_days; ++d)
    if (is_val[d])
      result.validation_days.push_back(dataset.day_ids[d]);

  NormalizationStats stats = dataset.stats;
  if (stats.label_scale <= 0.0)
    stats.label_scale = p_max;
  std::vector<Sample> train_set, val_set;
  for (const auto &ex : dataset.examples) {
    Sample s{normalize_features(ex.features, stats, Direction::Forward),
             normalize_label(ex.label, stats, Direction::Forward)};
    (is_val[ex.day] ? val_set : train_set).push_back(s);
  }

  std::vector<int> sizes{kFeatureCount};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  MlpParams params = init_mlp(sizes, config.seed);
  params.stats = stats;
  params.has_stats = true;
  params.p_max = p_max;

  const bool have_val = !val_set.empty();

  result.train_loss.push_back(mean_squared_error(params, train_set));
  if (have_val)
    result.val_loss.push_back(mean_squared_error(params, val_set));
  result.best_loss = have_val ? result.val_loss.back() : result.train_loss.back();
  result.best_epoch = 0;
  result.params = params;

  AdamState adam = init_adam(params);
  Gradients grads;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = start; k < stop; ++k)
        batch.push_back(train_set[order[k]]);
      loss_and_gradients(params, batch, grads);
      adam_step(params, grads, adam, config);
    }
    result.train_loss.push_back(mean_squared_error(params, train_set));
    double current;
    if (have_val) {
      result.val_loss.push_back(mean_squared_error(params, val_set));
      current = result.val_loss.back();
    } else {
      current = result.train_loss.back();
    }
    if (current < result.best_loss) {
      result.best_loss = current;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

double predict_power(const MlpParams &params, double t_out, double t_in,
                     double price, int slot) {
  if (!params.has_stats)
    throw std::logic_error("model has no normalisation statistics");
  const Features raw{t_out, t_in, price, static_cast<double>(slot)};
  const auto x = normalize_features(raw, params.stats, Direction::Forward);
  const double y = forward(params, x);
  const double kw = normalize_label(y, params.stats, Direction::Inverse);
  return std::clamp(kw, 0.0, params.p_max);
}

namespace {

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_vector(std::ostream &out, const char *key, const std::vector<double> &v) {
  out << key;
  for (std::size_t i = 0; i < v.size(); ++i)
    out << ((i % 8 == 0) ? "\n " : " ") << hex(v[i]);
  out << '\n';
}

class TokenReader {
public:
  TokenReader(std::istream &in, std::string source) : source_(std::move(source)) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok)
        tokens_.push_back({tok, lineno});
    }
  }

  std::string word() {
    if (pos_ >= tokens_.size())
      throw ParseError(source_, last_line(), "unexpected end of model file");
    return tokens_[pos_++].text;
  }

  void expect(const std::string &w) {
    const int line = pos_ < tokens_.size() ? tokens_[pos_].line : last_line();
    if (word() != w)
      throw ParseError(source_, line, "expected '" + w + "'");
  }

  double number() {
    const int line = pos_ < tokens_.size() ? tokens_[pos_].line : last_line();
    const auto v = parse_double(word());
    if (!v || !std::isfinite(*v))
      throw ParseError(source_, line, "bad number");
    return *v;
  }

  long integer() {
    const double v = number();
    if (v != std::floor(v))
      throw ParseError(source_, last_line(), "expected an integer");
    return static_cast<long>(v);
  }

private:
  int last_line() const { return tokens_.empty() ? 0 : tokens_.back().line; }

  struct Token {
    std::string text;
    int line;
  };
  std::string source_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

} // namespace

void save_model(std::ostream &out, const MlpParams &params) {
  out << "hvac-mlp 1\n";
  out << "architecture";
  for (int s : params.architecture())
    out << ' ' << s;
  out << "\nactivation relu linear\n";
  out << "seed " << params.seed << '\n';
  out << "p_max " << hex(params.p_max) << '\n';
  out << "feature_min";
  for (double v : params.stats.min)
    out << ' ' << hex(v);
  out << "\nfeature_max";
  for (double v : params.stats.max)
    out << ' ' << hex(v);
  out << "\nlabel_scale " << hex(params.stats.label_scale) << '\n';
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const auto &l = params.layers[k];
    out << "layer " << k << ' ' << l.in << ' ' << l.out << '\n';
    write_vector(out, "weights", l.weights);
    write_vector(out, "bias", l.bias);
  }
  out << "end\n";
}

MlpParams load_model(std::istream &in, const std::string &source) {
  TokenReader r(in, source);
  r.expect("hvac-mlp");
  if (r.integer() != 1)
    throw ParseError(source, 1, "unsupported model version");
  r.expect("architecture");
  std::vector<int> sizes;
  std::string tok;
  while ((tok = r.word()) != "activation") {
    const auto v = parse_double(tok);
    if (!v || *v < 1)
      throw ParseError(source, 2, "bad architecture");
    sizes.push_back(static_cast<int>(*v));
  }
  if (sizes.size() < 2 || sizes.front() != kFeatureCount || sizes.back() != 1)
    throw ParseError(source, 2, "architecture must map 4 features to 1 output");
  r.expect("relu");
  r.expect("linear");
  MlpParams params = init_mlp(sizes, 0);
  r.expect("seed");
  params.seed = static_cast<std::uint64_t>(r.integer());
  r.expect("p_max");
  params.p_max = r.number();
  r.expect("feature_min");
  for (auto &v : params.stats.min)
    v = r.number();
  r.expect("feature_max");
  for (auto &v : params.stats.max)
    v = r.number();
  r.expect("label_scale");
  params.stats.label_scale = r.number();
  params.has_stats = true;
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    auto &l = params.layers[k];
    r.expect("layer");
    if (r.integer() != static_cast<long>(k) || r.integer() != l.in ||
        r.integer() != l.out)
      throw ParseError(source, 0, "layer header mismatch");
    r.expect("weights");
    for (auto &w : l.weights)
      w = r.number();
    r.expect("bias");
    for (auto &b : l.bias)
      b = r.number();
  }
  r.expect("end");
  return params;
}

} // namespace hvac
