#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sdg/annotate.hpp"
#include "sdg/image.hpp"
#include "sdg/rng.hpp"

namespace sdg {

// Crop preprocessing: bbox crop -> bilinear resize -> (train only) flip and
// color jitter -> per-channel normalization -> CHW flatten.
struct PreprocessSpec {
  int crop_size = 32;
  std::array<double, 3> channel_mean{0.485, 0.456, 0.406};
  std::array<double, 3> channel_std{0.229, 0.224, 0.225};
  double flip_prob = 0.5;
  double jitter_brightness = 0.1;  // multiplicative factor in [1-b, 1+b]
  double jitter_contrast = 0.1;    // blend toward the crop mean, factor in [1-c, 1+c]

  void validate() const;
  int feature_dim() const { return crop_size * crop_size * 3; }
};

// input -> hidden ReLU -> 2-way softmax, 64-bit floats throughout.
struct ModelParams {
  int input_dim = 0;
  int hidden_dim = 0;
  int num_classes = 2;
  std::vector<double> w1;  // hidden x input, row-major
  std::vector<double> b1;
  std::vector<double> w2;  // classes x hidden
  std::vector<double> b2;

  // Per-layer uniform +-sqrt(6/(fan_in+fan_out)), seeded.
  static ModelParams init(int input_dim, int hidden_dim, int num_classes, std::uint64_t seed);
  void validate() const;
};

struct Gradients {
  std::vector<double> w1, b1, w2, b2;
  double loss = 0.0;  // mean cross-entropy over the batch
};

struct TrainConfig {
  int batch_size = 4;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
  int epochs = 30;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AdamWState {
  std::vector<double> m_w1, v_w1, m_b1, v_b1, m_w2, v_w2, m_b2, v_b2;

  static AdamWState zeros_like(const ModelParams& params);
};

struct LearnerSample {
  ImageU8 crop;  // already resized to crop_size x crop_size, 3 channels
  Label label = Label::pass;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;
};

// Bbox crop resized to the spec's crop size (the cacheable part of
// preprocessing).
ImageU8 extract_crop(const ImageU8& image, const BBox& bbox, const PreprocessSpec& spec);

// Augmentation + normalization on an already-resized crop. rng is consumed
// only in train mode (draw order: flip, brightness, contrast).
std::vector<double> preprocess_crop(const ImageU8& crop, const PreprocessSpec& spec, Rng* rng,
                                    bool train_mode);

// Full per-spec preprocessing from an image + bbox.
std::vector<double> preprocess(const ImageU8& image, const BBox& bbox, const PreprocessSpec& spec,
                               Rng* rng, bool train_mode);

// Softmax class probabilities; numerically shift-by-max stable.
std::vector<double> forward(const ModelParams& params, std::span<const double> features);

// Analytic gradients of the mean cross-entropy over the batch.
Gradients backward(const ModelParams& params, const std::vector<std::vector<double>>& batch_features,
                   const std::vector<int>& batch_labels);

// Decoupled AdamW: m/v moments, bias correction, weight decay applied
// directly to the parameters. t is the 1-based step count.
void adamw_step(ModelParams& params, const Gradients& grads, AdamWState& state, int t,
                const TrainConfig& config);

// Seeded minibatch training. Requires both classes present.
TrainResult train(const std::vector<LearnerSample>& dataset, const PreprocessSpec& spec,
                  const TrainConfig& config, int hidden_dim = 64);

struct Prediction {
  Label label = Label::fail;
  double probability = 0.0;
};

// Argmax class; exact ties resolve to fail (conservative for QC).
Prediction predict_features(const ModelParams& params, std::span<const double> features);
Prediction predict(const ModelParams& params, const ImageU8& image, const BBox& bbox,
                   const PreprocessSpec& spec);

// Flat little-endian doubles after a one-line JSON shape header.
void save_model(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace sdg
