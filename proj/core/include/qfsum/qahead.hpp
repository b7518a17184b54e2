#pragma once

// Trainable sentence-scoring head over frozen pair embeddings.
//
//   x      = [embedding ; position]
//   hidden = relu(W1 x + b1)            (inverted dropout while training)
//   score  = sigmoid(w2 . hidden + b2)
//
// Trained with mean binary cross-entropy and Adam. Labels mark the top-k
// snippets of each question by ROUGE-SU4 F1 against its ideal answers.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qfsum/corpus.hpp"
#include "qfsum/rouge.hpp"

namespace qfsum {

struct PairFeature {
  std::vector<double> embedding;
  int position = 1;  // 1-based snippet list position
};

struct HeadParams {
  std::size_t input_dim = 0;  // embedding dimension + 1
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x input_dim, row-major
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;

  static HeadParams zeros(std::size_t embedding_dim, std::size_t hidden);

  std::size_t embedding_dim() const { return input_dim - 1; }
  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
  double& w1_at(std::size_t row, std::size_t col) { return w1[row * input_dim + col]; }
  double w1_at(std::size_t row, std::size_t col) const { return w1[row * input_dim + col]; }

  // All parameters in w1, b1, w2, b2 order.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const HeadParams&) const = default;
};

struct TrainConfig {
  double dropout = 0.6;
  int epochs = 1;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t hidden = 50;
  // Divide the position coordinate by the snippet-list length.
  bool normalize_position = false;

  void validate() const;
};

struct LabeledInstance {
  std::vector<double> input;  // output of build_feature
  int label = 0;
};

constexpr double kLossEpsilon = 1e-7;

// Exactly min(k, n) ones, chosen by ROUGE-SU4 F1 against the ideal answers;
// ties go to the lower list position.
std::vector<int> make_labels(const TrainingExample& example, std::size_t k = 5,
                             const RougeConfig& rouge = {});

// [embedding ; position * position_scale]. Throws on position < 1.
std::vector<double> build_feature(std::span<const double> embedding, int position,
                                  double position_scale = 1.0);
std::vector<double> build_feature(const PairFeature& feature, double position_scale = 1.0);

// `dropout_mask`, when given, multiplies the hidden activations (entries are
// 0 or 1/(1-p)).
double forward(const HeadParams& params, std::span<const double> x,
               std::span<const double> dropout_mask = {});

double loss(const HeadParams& params, std::span<const LabeledInstance> batch);

// Exact gradient of `loss`; relu'(0) = 0 and the clamp zeroes the gradient
// of saturated predictions. Optional masks are per instance, hidden-sized.
HeadParams gradients(const HeadParams& params, std::span<const LabeledInstance> batch,
                     std::span<const std::vector<double>> dropout_masks = {});

struct TrainProgress {
  int epoch = 0;
  std::size_t step = 0;  // optimizer steps so far, 1-based
  double batch_loss = 0.0;
  const HeadParams* params = nullptr;
};
using TrainObserver = std::function<void(const TrainProgress&)>;

HeadParams init_params(std::size_t embedding_dim, std::size_t hidden, std::uint64_t seed);

HeadParams train(std::span<const LabeledInstance> data, const TrainConfig& config,
                 const TrainObserver& observer = {});

std::vector<double> score_candidates(const HeadParams& params,
                                     std::span<const std::vector<double>> inputs);

struct HeadModel {
  HeadParams params;
  TrainConfig config;
};

// "QHD1", u32 LE header length, JSON header, then f32 LE blocks for
// W1, b1, w2, b2.
std::string write_head_model(const HeadModel& model);
HeadModel read_head_model(std::string_view bytes);

// Deterministic uniform draws shared by training and cross-validation.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  double uniform();                               // [0, 1)
  double uniform(double lo, double hi);           // [lo, hi)
  std::size_t below(std::size_t bound);           // [0, bound)

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::uint64_t state_;
};

}  // namespace qfsum
