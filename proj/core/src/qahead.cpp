#include "qfsum/qahead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "qfsum/error.hpp"
#include "qfsum/textproc.hpp"
#include "qfsum/vecspace.hpp"

namespace qfsum {
namespace {

constexpr std::string_view kHeadMagic = "QHD1";

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const HeadParams& params, std::span<const double> x) {
  if (x.size() != params.input_dim) {
    throw Error(ErrorKind::dimension_mismatch, "head expects input of size " + std::to_string(params.input_dim) +
                                                   ", got " + std::to_string(x.size()));
  }
}

void check_batch(std::span<const LabeledInstance> batch) {
  if (batch.empty()) throw Error(ErrorKind::invalid_argument, "empty batch");
}

// Forward pass that keeps the hidden pre-activations for backprop.
double forward_cached(const HeadParams& p, std::span<const double> x, std::span<const double> mask,
                      std::vector<double>& pre, std::vector<double>& act) {
  pre.assign(p.hidden, 0.0);
  act.assign(p.hidden, 0.0);
  double z = p.b2;
  for (std::size_t j = 0; j < p.hidden; ++j) {
    double a = p.b1[j];
    const double* row = p.w1.data() + j * p.input_dim;
    for (std::size_t i = 0; i < p.input_dim; ++i) a += row[i] * x[i];
    pre[j] = a;
    double h = a > 0.0 ? a : 0.0;
    if (!mask.empty()) h *= mask[j];
    act[j] = h;
    z += p.w2[j] * h;
  }
  return sigmoid(z);
}

double clamp_score(double s) { return std::clamp(s, kLossEpsilon, 1.0 - kLossEpsilon); }

struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;

  void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

nlohmann::ordered_json config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["dropout"] = c.dropout;
  j["epochs"] = c.epochs;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["hidden"] = c.hidden;
  j["normalize_position"] = c.normalize_position;
  return j;
}

}  // namespace

HeadParams HeadParams::zeros(std::size_t embedding_dim, std::size_t hidden) {
  if (hidden < 1) throw Error(ErrorKind::invalid_argument, "hidden size must be >= 1");
  HeadParams p;
  p.input_dim = embedding_dim + 1;
  p.hidden = hidden;
  p.w1.assign(hidden * p.input_dim, 0.0);
  p.b1.assign(hidden, 0.0);
  p.w2.assign(hidden, 0.0);
  return p;
}

std::vector<double> HeadParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  out.insert(out.end(), w1.begin(), w1.end());
  out.insert(out.end(), b1.begin(), b1.end());
  out.insert(out.end(), w2.begin(), w2.end());
  out.push_back(b2);
  return out;
}

void HeadParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw Error(ErrorKind::dimension_mismatch, "flat parameter vector has the wrong size");
  }
  auto it = flat.begin();
  std::copy_n(it, w1.size(), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy_n(it, b1.size(), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy_n(it, w2.size(), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

void TrainConfig::validate() const {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorKind::invalid_argument, "dropout must lie in [0, 1)");
  if (epochs < 1) throw Error(ErrorKind::invalid_argument, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::invalid_argument, "learning_rate must be > 0");
  if (batch_size < 1) throw Error(ErrorKind::invalid_argument, "batch_size must be >= 1");
  if (hidden < 1) throw Error(ErrorKind::invalid_argument, "hidden size must be >= 1");
}

std::vector<int> make_labels(const TrainingExample& example, std::size_t k, const RougeConfig& rouge) {
  if (example.snippets.empty()) {
    throw Error(ErrorKind::invalid_argument, "question '" + example.question.id + "' has no snippets");
  }
  if (example.ideal_answers.empty()) {
    throw Error(ErrorKind::invalid_argument, "question '" + example.question.id + "' has no ideal answers");
  }
  std::vector<TokenList> refs;
  refs.reserve(example.ideal_answers.size());
  for (const auto& a : example.ideal_answers) refs.push_back(tokenize(a));

  const std::size_t n = example.snippets.size();
  std::vector<double> f1(n);
  for (std::size_t i = 0; i < n; ++i) f1[i] = rouge_su4_multi(tokenize(example.snippets[i].text), refs, rouge);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f1[a] != f1[b]) return f1[a] > f1[b];
    return example.snippets[a].list_position < example.snippets[b].list_position;
  });
  std::vector<int> labels(n, 0);
  for (std::size_t r = 0; r < std::min(k, n); ++r) labels[order[r]] = 1;
  return labels;
}

std::vector<double> build_feature(std::span<const double> embedding, int position, double position_scale) {
  if (position < 1) throw Error(ErrorKind::invalid_argument, "snippet position must be >= 1");
  std::vector<double> x(embedding.begin(), embedding.end());
  x.push_back(static_cast<double>(position) * position_scale);
  return x;
}

std::vector<double> build_feature(const PairFeature& feature, double position_scale) {
  return build_feature(feature.embedding, feature.position, position_scale);
}

double forward(const HeadParams& params, std::span<const double> x, std::span<const double> dropout_mask) {
  check_input(params, x);
  if (!dropout_mask.empty() && dropout_mask.size() != params.hidden) {
    throw Error(ErrorKind::dimension_mismatch, "dropout mask size differs from hidden size");
  }
  std::vector<double> pre;
  std::vector<double> act;
  return forward_cached(params, x, dropout_mask, pre, act);
}

double loss(const HeadParams& params, std::span<const LabeledInstance> batch) {
  check_batch(batch);
  double total = 0.0;
  for (const auto& inst : batch) {
    const double s = clamp_score(forward(params, inst.input));
    total -= inst.label == 1 ? std::log(s) : std::log(1.0 - s);
  }
  return total / static_cast<double>(batch.size());
}

HeadParams gradients(const HeadParams& params, std::span<const LabeledInstance> batch,
                     std::span<const std::vector<double>> dropout_masks) {
  check_batch(batch);
  if (!dropout_masks.empty() && dropout_masks.size() != batch.size()) {
    throw Error(ErrorKind::dimension_mismatch, "one dropout mask per instance is required");
  }
  HeadParams g = HeadParams::zeros(params.embedding_dim(), params.hidden);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> pre;
  std::vector<double> act;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& inst = batch[b];
    check_input(params, inst.input);
    const std::span<const double> mask =
        dropout_masks.empty() ? std::span<const double>{} : std::span<const double>(dropout_masks[b]);
    const double s = forward_cached(params, inst.input, mask, pre, act);
    // d(-y ln s - (1-y) ln(1-s))/dz = s - y, zero where the clamp is active.
    const bool clamped = s < kLossEpsilon || s > 1.0 - kLossEpsilon;
    const double dz = clamped ? 0.0 : (s - static_cast<double>(inst.label)) * inv_n;
    if (dz == 0.0) continue;
    g.b2 += dz;
    for (std::size_t j = 0; j < params.hidden; ++j) {
      g.w2[j] += dz * act[j];
      if (pre[j] <= 0.0) continue;
      double da = dz * params.w2[j];
      if (!mask.empty()) da *= mask[j];
      g.b1[j] += da;
      double* row = g.w1.data() + j * params.input_dim;
      for (std::size_t i = 0; i < params.input_dim; ++i) row[i] += da * inst.input[i];
    }
  }
  return g;
}

HeadParams init_params(std::size_t embedding_dim, std::size_t hidden, std::uint64_t seed) {
  HeadParams p = HeadParams::zeros(embedding_dim, hidden);
  SeededRng rng(seed);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(p.input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : p.w1) w = rng.uniform(-r1, r1);
  for (double& b : p.b1) b = rng.uniform(-r1, r1);
  for (double& w : p.w2) w = rng.uniform(-r2, r2);
  p.b2 = rng.uniform(-r2, r2);
  return p;
}

HeadParams train(std::span<const LabeledInstance> data, const TrainConfig& config, const TrainObserver& observer) {
  config.validate();
  if (data.empty()) throw Error(ErrorKind::invalid_argument, "training data is empty");
  const std::size_t input_dim = data.front().input.size();
  if (input_dim < 1) throw Error(ErrorKind::dimension_mismatch, "empty input vectors");
  for (const auto& inst : data) {
    if (inst.input.size() != input_dim) throw Error(ErrorKind::dimension_mismatch, "inconsistent input dimensions");
    if (inst.label != 0 && inst.label != 1) throw Error(ErrorKind::invalid_argument, "labels must be 0 or 1");
  }

  HeadParams params = init_params(input_dim - 1, config.hidden, config.seed);
  // Separate streams for initialization and for shuffling/dropout.
  SeededRng rng(splitmix64(config.seed ^ 0x5eedULL));
  Adam adam;
  std::vector<double> flat = params.flatten();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const double keep = 1.0 - config.dropout;
  std::vector<LabeledInstance> batch;
  std::vector<std::vector<double>> masks;
  std::size_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(data[order[i]]);
        if (config.dropout > 0.0) {
          std::vector<double> mask(config.hidden);
          for (double& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
          masks.push_back(std::move(mask));
        }
      }
      const HeadParams grad = gradients(params, batch, masks);
      adam.step(flat, grad.flatten(), config.learning_rate);
      params.assign(flat);
      ++step;
      if (observer) {
        observer(TrainProgress{epoch, step, loss(params, batch), &params});
      }
    }
  }
  return params;
}

std::vector<double> score_candidates(const HeadParams& params, std::span<const std::vector<double>> inputs) {
  std::vector<double> scores;
  scores.reserve(inputs.size());
  for (const auto& x : inputs) scores.push_back(forward(params, x));
  return scores;
}

std::string write_head_model(const HeadModel& model) {
  const HeadParams& p = model.params;
  nlohmann::ordered_json header;
  header["format"] = "qfsum-head";
  header["version"] = 1;
  header["embedding_dim"] = p.embedding_dim();
  header["input_dim"] = p.input_dim;
  header["hidden"] = p.hidden;
  header["seed"] = model.config.seed;
  header["config"] = config_json(model.config);
  header["blocks"] = {"w1", "b1", "w2", "b2"};
  const std::string text = header.dump();

  std::string out(kHeadMagic);
  append_u32_le(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const double x : p.flatten()) append_f32_le(out, static_cast<float>(x));
  return out;
}

HeadModel read_head_model(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != kHeadMagic) {
    throw Error(ErrorKind::bad_magic, "not a head model file");
  }
  const std::uint32_t header_len = read_u32_le(bytes, 4);
  if (8 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw Error(ErrorKind::truncated_record, "head model header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::malformed_input, std::string("head model header: ") + e.what());
  }
  HeadModel model;
  try {
    const auto& c = header.at("config");
    model.config.dropout = c.at("dropout").get<double>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.batch_size = c.at("batch_size").get<std::size_t>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.hidden = c.at("hidden").get<std::size_t>();
    model.config.normalize_position = c.at("normalize_position").get<bool>();
    model.params = HeadParams::zeros(header.at("embedding_dim").get<std::size_t>(), header.at("hidden").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::missing_field, std::string("head model header: ") + e.what());
  }
  const std::size_t count = model.params.parameter_count();
  const std::size_t offset = 8 + header_len;
  if (bytes.size() != offset + 4 * count) {
    throw Error(ErrorKind::truncated_record, "head model expects " + std::to_string(count) + " floats");
  }
  std::vector<double> flat(count);
  for (std::size_t i = 0; i < count; ++i) flat[i] = read_f32_le(bytes, offset + 4 * i);
  model.params.assign(flat);
  return model;
}

std::uint64_t SeededRng::next() {
  const std::uint64_t r = splitmix64(state_);
  state_ += 0x9e3779b97f4a7c15ULL;
  return r;
}

double SeededRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t SeededRng::below(std::size_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t b = bound;
  const std::uint64_t threshold = (0 - b) % b;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return static_cast<std::size_t>(r % b);
  }
}

}  // namespace qfsum
