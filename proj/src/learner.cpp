#include "sdg/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sdg/imgproc.hpp"

namespace sdg {

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values)
    require(std::isfinite(v), Errc::numeric, std::string("non-finite value in ") + what);
}

void adamw_block(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                 std::vector<double>& v, int t, const TrainConfig& c) {
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    p[i] -= c.learning_rate * (m_hat / (std::sqrt(v_hat) + c.epsilon) + c.weight_decay * p[i]);
  }
}

}  // namespace

void PreprocessSpec::validate() const {
  require(crop_size >= 4 && crop_size <= 1024, Errc::domain, "crop size out of range");
  for (double s : channel_std) require(s > 0.0, Errc::domain, "channel std must be positive");
  require(flip_prob >= 0.0 && flip_prob <= 1.0, Errc::domain, "flip probability out of [0,1]");
  require(jitter_brightness >= 0.0 && jitter_contrast >= 0.0, Errc::domain,
          "jitter factors must be non-negative");
}

void TrainConfig::validate() const {
  require(batch_size >= 1, Errc::domain, "batch size must be >= 1");
  require(learning_rate > 0.0, Errc::domain, "learning rate must be positive");
  require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, Errc::domain,
          "AdamW betas must lie in (0,1)");
  require(epsilon > 0.0, Errc::domain, "epsilon must be positive");
  require(weight_decay >= 0.0, Errc::domain, "weight decay must be non-negative");
  require(epochs >= 0, Errc::domain, "epoch count must be non-negative");
}

ModelParams ModelParams::init(int input_dim, int hidden_dim, int num_classes, std::uint64_t seed) {
  require(input_dim >= 1 && hidden_dim >= 1 && num_classes >= 2, Errc::domain, "bad model shape");
  ModelParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.num_classes = num_classes;
  p.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
  p.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  p.w2.resize(static_cast<std::size_t>(num_classes) * hidden_dim);
  p.b2.assign(static_cast<std::size_t>(num_classes), 0.0);

  Rng rng(derive_seed(seed, {0x1417u}));
  const double lim1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  for (double& w : p.w1) w = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / (hidden_dim + num_classes));
  for (double& w : p.w2) w = rng.uniform(-lim2, lim2);
  return p;
}

void ModelParams::validate() const {
  require(w1.size() == static_cast<std::size_t>(hidden_dim) * input_dim &&
              b1.size() == static_cast<std::size_t>(hidden_dim) &&
              w2.size() == static_cast<std::size_t>(num_classes) * hidden_dim &&
              b2.size() == static_cast<std::size_t>(num_classes),
          Errc::domain, "model parameter shapes are inconsistent");
  check_finite(w1, "w1");
  check_finite(b1, "b1");
  check_finite(w2, "w2");
  check_finite(b2, "b2");
}

ImageU8 extract_crop(const ImageU8& image, const BBox& bbox, const PreprocessSpec& spec) {
  spec.validate();
  require(image.channels == 3, Errc::domain, "preprocess expects an RGB image");
  bbox.validate(image.width, image.height);
  return resize_bilinear(crop(image, bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max), spec.crop_size,
                         spec.crop_size);
}

std::vector<double> preprocess_crop(const ImageU8& crop_img, const PreprocessSpec& spec, Rng* rng,
                                    bool train_mode) {
  spec.validate();
  require(crop_img.width == spec.crop_size && crop_img.height == spec.crop_size && crop_img.channels == 3,
          Errc::domain, "crop has the wrong shape for this preprocess spec");

  const int s = spec.crop_size;
  std::vector<double> pixels(static_cast<std::size_t>(s) * s * 3);
  for (int y = 0; y < s; ++y)
    for (int x = 0; x < s; ++x) {
      const std::uint8_t* p = crop_img.px(x, y);
      for (int c = 0; c < 3; ++c) pixels[(static_cast<std::size_t>(y) * s + x) * 3 + c] = p[c];
    }

  if (train_mode) {
    require(rng != nullptr, Errc::domain, "train-mode preprocessing needs an RNG");
    if (rng->bernoulli(spec.flip_prob)) {
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s / 2; ++x)
          for (int c = 0; c < 3; ++c)
            std::swap(pixels[(static_cast<std::size_t>(y) * s + x) * 3 + c],
                      pixels[(static_cast<std::size_t>(y) * s + (s - 1 - x)) * 3 + c]);
    }
    const double brightness = rng->uniform(1.0 - spec.jitter_brightness, 1.0 + spec.jitter_brightness);
    for (double& v : pixels) v = std::clamp(v * brightness, 0.0, 255.0);
    const double contrast = rng->uniform(1.0 - spec.jitter_contrast, 1.0 + spec.jitter_contrast);
    double mean = 0.0;
    for (double v : pixels) mean += v;
    mean /= static_cast<double>(pixels.size());
    for (double& v : pixels) v = std::clamp(mean + (v - mean) * contrast, 0.0, 255.0);
  }

  // CHW planes.
  std::vector<double> features(pixels.size());
  const std::size_t plane = static_cast<std::size_t>(s) * s;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < plane; ++i)
      features[static_cast<std::size_t>(c) * plane + i] =
          (pixels[i * 3 + static_cast<std::size_t>(c)] / 255.0 - spec.channel_mean[static_cast<std::size_t>(c)]) /
          spec.channel_std[static_cast<std::size_t>(c)];
  return features;
}

std::vector<double> preprocess(const ImageU8& image, const BBox& bbox, const PreprocessSpec& spec,
                               Rng* rng, bool train_mode) {
  return preprocess_crop(extract_crop(image, bbox, spec), spec, rng, train_mode);
}

std::vector<double> forward(const ModelParams& params, std::span<const double> features) {
  require(static_cast<int>(features.size()) == params.input_dim, Errc::domain,
          "feature dimension mismatch");
  check_finite(features, "features");

  std::vector<double> hidden(static_cast<std::size_t>(params.hidden_dim));
  for (int h = 0; h < params.hidden_dim; ++h) {
    const double* row = params.w1.data() + static_cast<std::size_t>(h) * params.input_dim;
    double acc = params.b1[static_cast<std::size_t>(h)];
    for (int i = 0; i < params.input_dim; ++i) acc += row[i] * features[static_cast<std::size_t>(i)];
    hidden[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
  }

  std::vector<double> logits(static_cast<std::size_t>(params.num_classes));
  for (int c = 0; c < params.num_classes; ++c) {
    const double* row = params.w2.data() + static_cast<std::size_t>(c) * params.hidden_dim;
    double acc = params.b2[static_cast<std::size_t>(c)];
    for (int h = 0; h < params.hidden_dim; ++h) acc += row[h] * hidden[static_cast<std::size_t>(h)];
    logits[static_cast<std::size_t>(c)] = acc;
  }

  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double& l : logits) {
    l = std::exp(l - max_logit);
    denom += l;
  }
  for (double& l : logits) l /= denom;
  return logits;
}

Gradients backward(const ModelParams& params, const std::vector<std::vector<double>>& batch_features,
                   const std::vector<int>& batch_labels) {
  require(!batch_features.empty() && batch_features.size() == batch_labels.size(), Errc::domain,
          "empty or misaligned batch");
  Gradients g;
  g.w1.assign(params.w1.size(), 0.0);
  g.b1.assign(params.b1.size(), 0.0);
  g.w2.assign(params.w2.size(), 0.0);
  g.b2.assign(params.b2.size(), 0.0);

  const double inv_n = 1.0 / static_cast<double>(batch_features.size());
  std::vector<double> z1(static_cast<std::size_t>(params.hidden_dim));
  std::vector<double> a1(static_cast<std::size_t>(params.hidden_dim));
  std::vector<double> dz1(static_cast<std::size_t>(params.hidden_dim));

  for (std::size_t n = 0; n < batch_features.size(); ++n) {
    const std::vector<double>& x = batch_features[n];
    require(static_cast<int>(x.size()) == params.input_dim, Errc::domain, "feature dimension mismatch");
    const int label = batch_labels[n];
    require(label >= 0 && label < params.num_classes, Errc::domain, "label out of range");

    for (int h = 0; h < params.hidden_dim; ++h) {
      const double* row = params.w1.data() + static_cast<std::size_t>(h) * params.input_dim;
      double acc = params.b1[static_cast<std::size_t>(h)];
      for (int i = 0; i < params.input_dim; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
      z1[static_cast<std::size_t>(h)] = acc;
      a1[static_cast<std::size_t>(h)] = acc > 0.0 ? acc : 0.0;
    }

    std::vector<double> probs(static_cast<std::size_t>(params.num_classes));
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < params.num_classes; ++c) {
      const double* row = params.w2.data() + static_cast<std::size_t>(c) * params.hidden_dim;
      double acc = params.b2[static_cast<std::size_t>(c)];
      for (int h = 0; h < params.hidden_dim; ++h) acc += row[h] * a1[static_cast<std::size_t>(h)];
      probs[static_cast<std::size_t>(c)] = acc;
      max_logit = std::max(max_logit, acc);
    }
    double denom = 0.0;
    for (double& p : probs) {
      p = std::exp(p - max_logit);
      denom += p;
    }
    for (double& p : probs) p /= denom;
    require(std::isfinite(probs[0]), Errc::numeric, "non-finite forward pass");

    g.loss += -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-300)) * inv_n;

    // dz2 = p - onehot
    for (int c = 0; c < params.num_classes; ++c) {
      const double dz2 = (probs[static_cast<std::size_t>(c)] - (c == label ? 1.0 : 0.0)) * inv_n;
      g.b2[static_cast<std::size_t>(c)] += dz2;
      double* w2_row = g.w2.data() + static_cast<std::size_t>(c) * params.hidden_dim;
      for (int h = 0; h < params.hidden_dim; ++h) w2_row[h] += dz2 * a1[static_cast<std::size_t>(h)];
    }
    for (int h = 0; h < params.hidden_dim; ++h) {
      if (z1[static_cast<std::size_t>(h)] <= 0.0) {
        dz1[static_cast<std::size_t>(h)] = 0.0;
        continue;
      }
      double acc = 0.0;
      for (int c = 0; c < params.num_classes; ++c)
        acc += params.w2[static_cast<std::size_t>(c) * params.hidden_dim + h] *
               (probs[static_cast<std::size_t>(c)] - (c == batch_labels[n] ? 1.0 : 0.0)) * inv_n;
      dz1[static_cast<std::size_t>(h)] = acc;
    }
    for (int h = 0; h < params.hidden_dim; ++h) {
      const double d = dz1[static_cast<std::size_t>(h)];
      if (d == 0.0) continue;
      g.b1[static_cast<std::size_t>(h)] += d;
      double* w1_row = g.w1.data() + static_cast<std::size_t>(h) * params.input_dim;
      for (int i = 0; i < params.input_dim; ++i) w1_row[i] += d * x[static_cast<std::size_t>(i)];
    }
  }
  return g;
}

AdamWState AdamWState::zeros_like(const ModelParams& p) {
  AdamWState s;
  s.m_w1.assign(p.w1.size(), 0.0);
  s.v_w1.assign(p.w1.size(), 0.0);
  s.m_b1.assign(p.b1.size(), 0.0);
  s.v_b1.assign(p.b1.size(), 0.0);
  s.m_w2.assign(p.w2.size(), 0.0);
  s.v_w2.assign(p.w2.size(), 0.0);
  s.m_b2.assign(p.b2.size(), 0.0);
  s.v_b2.assign(p.b2.size(), 0.0);
  return s;
}

void adamw_step(ModelParams& params, const Gradients& grads, AdamWState& state, int t,
                const TrainConfig& config) {
  config.validate();
  require(t >= 1, Errc::domain, "AdamW step count must be >= 1");
  require(grads.w1.size() == params.w1.size() && grads.w2.size() == params.w2.size() &&
              grads.b1.size() == params.b1.size() && grads.b2.size() == params.b2.size(),
          Errc::domain, "gradient shapes do not match the parameters");
  adamw_block(params.w1, grads.w1, state.m_w1, state.v_w1, t, config);
  adamw_block(params.b1, grads.b1, state.m_b1, state.v_b1, t, config);
  adamw_block(params.w2, grads.w2, state.m_w2, state.v_w2, t, config);
  adamw_block(params.b2, grads.b2, state.m_b2, state.v_b2, t, config);
}

TrainResult train(const std::vector<LearnerSample>& dataset, const PreprocessSpec& spec,
                  const TrainConfig& config, int hidden_dim) {
  spec.validate();
  config.validate();
  require(!dataset.empty(), Errc::training, "training set is empty");
  bool has_pass = false, has_fail = false;
  for (const auto& s : dataset) (s.label == Label::pass ? has_pass : has_fail) = true;
  require(has_pass && has_fail, Errc::training, "training set must contain both classes");

  TrainResult result;
  result.params = ModelParams::init(spec.feature_dim(), hidden_dim, 2, config.seed);
  AdamWState state = AdamWState::zeros_like(result.params);
  Rng rng(derive_seed(config.seed, {0x7124u}));

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);

    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::vector<double>> features;
      std::vector<int> labels;
      features.reserve(end - start);
      labels.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const LearnerSample& s = dataset[order[k]];
        features.push_back(preprocess_crop(s.crop, spec, &rng, true));
        labels.push_back(static_cast<int>(s.label));
      }
      const Gradients g = backward(result.params, features, labels);
      adamw_step(result.params, g, state, ++t, config);
      epoch_loss += g.loss;
      ++batches;
    }
    result.epoch_loss.push_back(batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0);
  }
  return result;
}

Prediction predict_features(const ModelParams& params, std::span<const double> features) {
  const std::vector<double> probs = forward(params, features);
  // Ties break toward fail: prefer the fail index unless pass is strictly larger.
  const std::size_t pass_idx = static_cast<std::size_t>(Label::pass);
  const std::size_t fail_idx = static_cast<std::size_t>(Label::fail);
  if (probs[pass_idx] > probs[fail_idx]) return {Label::pass, probs[pass_idx]};
  return {Label::fail, probs[fail_idx]};
}

Prediction predict(const ModelParams& params, const ImageU8& image, const BBox& bbox,
                   const PreprocessSpec& spec) {
  const std::vector<double> features = preprocess(image, bbox, spec, nullptr, false);
  return predict_features(params, features);
}

void save_model(const std::filesystem::path& path, const ModelParams& params) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Errc::io, "cannot open for writing: " + path.string());
  nlohmann::ordered_json header;
  header["format"] = "sdg-model";
  header["version"] = 1;
  header["input_dim"] = params.input_dim;
  header["hidden_dim"] = params.hidden_dim;
  header["num_classes"] = params.num_classes;
  out << header.dump() << "\n";
  for (const std::vector<double>* block : {&params.w1, &params.b1, &params.w2, &params.b2})
    out.write(reinterpret_cast<const char*>(block->data()),
              static_cast<std::streamsize>(block->size() * sizeof(double)));
  out.flush();
  require(out.good(), Errc::io, "write failed: " + path.string());
}

ModelParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open model: " + path.string());
  std::string header_line;
  require(static_cast<bool>(std::getline(in, header_line)), Errc::io, "missing model header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::io, "bad model header in " + path.string() + ": " + e.what());
  }
  require(header.value("format", "") == "sdg-model", Errc::io, "not a model file: " + path.string());
  require(header.value("version", 0) == 1, Errc::io, "unsupported model version");

  ModelParams p;
  p.input_dim = header.at("input_dim").get<int>();
  p.hidden_dim = header.at("hidden_dim").get<int>();
  p.num_classes = header.at("num_classes").get<int>();
  p.w1.resize(static_cast<std::size_t>(p.hidden_dim) * p.input_dim);
  p.b1.resize(static_cast<std::size_t>(p.hidden_dim));
  p.w2.resize(static_cast<std::size_t>(p.num_classes) * p.hidden_dim);
  p.b2.resize(static_cast<std::size_t>(p.num_classes));
  for (std::vector<double>* block : {&p.w1, &p.b1, &p.w2, &p.b2}) {
    in.read(reinterpret_cast<char*>(block->data()),
            static_cast<std::streamsize>(block->size() * sizeof(double)));
    require(in.good(), Errc::io, "truncated model file: " + path.string());
  }
  p.validate();
  return p;
}

}  // namespace sdg
