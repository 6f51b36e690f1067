#ifndef BANDEX_PREDICTORS_HPP
#define BANDEX_PREDICTORS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace bandex {

using Matrix = std::vector<std::vector<double>>;  // rows = examples

// Per-dimension zero-mean/unit-variance mapping.  Near-constant
// dimensions keep scale 1 so they pass through unchanged.
struct Standardizer {
  std::vector<double> mean, scale;
  void fit(const Matrix& x);
  std::vector<double> apply(std::span<const double> x) const;
  bool empty() const { return mean.empty(); }
};

// Linear map y = W x fitted by least squares with a trace-scaled ridge
// ((X^T X + lambda I) W^T = X^T Y, lambda = ridge * trace / dim).
struct RegressionModel {
  int in_dim = 0, out_dim = 0;
  std::vector<double> w;  // row-major out_dim x in_dim
  double train_rms = 0.0; // per-example RMS of ||y - Wx||
  std::vector<double> predict(std::span<const double> x) const;
};

RegressionModel regression_fit(const Matrix& x, const Matrix& y,
                               double ridge = 1e-8);

// --- vector quantization ---------------------------------------------------

struct Codebook {
  Matrix centroids;
  int dim() const { return centroids.empty() ? 0 : int(centroids[0].size()); }
};

struct LbgOptions {
  int max_lloyd_iters = 50;
  double rel_distortion_eps = 1e-5;
  double split_scale = 1e-3;  // perturbation = split_scale * per-dim std
};

// Binary-splitting LBG: 1 -> 2 -> 4 ... -> size centroids, Lloyd
// refinement at each stage.  size must be a power of two; throws
// TrainingError when there are fewer samples than centroids.  Empty
// cells are re-seeded from the most populous cell's farthest member.
Codebook lbg_train(const Matrix& x, int size, const LbgOptions& opts = {});

// Index of the closest centroid (squared distance, ties -> lowest index).
int nearest_centroid(const Codebook& cb, std::span<const double> x);

// Mean squared distance of samples to their nearest centroid.
double quantizer_distortion(const Codebook& cb, const Matrix& x);

// Codebook mapping: quantize the (standardized) masked features, emit
// the per-cell mean of the training targets.
struct AssociativeCodebook {
  Codebook input_cb;
  Matrix outputs;  // one target vector per centroid
  std::vector<double> predict(std::span<const double> x) const;
};

AssociativeCodebook codebook_associate(const Matrix& x, const Matrix& y,
                                       int size, const LbgOptions& opts = {});

// Residual quantizer: plain LBG codebook over prediction residuals.
struct ResidualVq {
  int bits = 0;
  Codebook cb;
  int encode(std::span<const double> residual) const;
  const std::vector<double>& decode(int index) const;
};

ResidualVq residual_vq_train(const Matrix& residuals, int bits,
                             const LbgOptions& opts = {});

// --- multilayer perceptron -------------------------------------------------

// Hidden layers use tanh, the output layer is linear.
struct MlpLayer {
  int in = 0, out = 0;
  std::vector<double> w;  // row-major out x in
  std::vector<double> b;
  bool tanh_act = true;
};

struct MlpModel {
  std::vector<MlpLayer> layers;
  std::vector<double> forward(std::span<const double> x) const;
  int in_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().out; }
  std::size_t param_count() const;
};

// Fresh network with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights.
MlpModel mlp_init(int in_dim, const std::vector<int>& hidden, int out_dim,
                  std::uint64_t seed);

// Squared-error loss E = sum_j (yhat_j - y_j)^2 for one example.
double mlp_loss(const MlpModel& m, std::span<const double> x,
                std::span<const double> y);

// Backpropagated gradient of mlp_loss w.r.t. every parameter, flattened
// layer by layer (weights row-major, then biases).
std::vector<double> mlp_gradient(const MlpModel& m, std::span<const double> x,
                                 std::span<const double> y);

struct MlpTrainOptions {
  std::uint64_t seed = 1;
  int batch = 32;
  int max_epochs = 500;
  int patience = 20;          // epochs without validation improvement
  double val_fraction = 0.1;
  double kappa = 1e-4;        // additive learning-rate increment
  double decay = 0.7;         // gradient trace decay
  double eta0 = 1e-3;
  double eta_min = 1e-6;
  double eta_max = 0.1;
};

struct MlpTrainResult {
  MlpModel model;
  double train_mse = 0.0;  // mean over examples of sum-squared output error
  double val_mse = 0.0;
  int epochs_run = 0;
};

// Mini-batch gradient descent with per-weight adaptive learning rates
// (delta-bar-delta: agreement with the decayed gradient trace adds
// kappa, disagreement halves the rate).  Keeps the best-validation
// snapshot; throws TrainingError on divergence (error > 10x initial).
MlpTrainResult mlp_train(const Matrix& x, const Matrix& y,
                         const std::vector<int>& hidden,
                         const MlpTrainOptions& opts);

// Mean over examples of the summed squared output error.
double mlp_dataset_mse(const MlpModel& m, const Matrix& x, const Matrix& y);

}  // namespace bandex

#endif
