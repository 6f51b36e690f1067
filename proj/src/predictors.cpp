#include "bandex/predictors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bandex/errors.hpp"

namespace bandex {

namespace {

void check_matrix(const Matrix& x, const char* what) {
  if (x.empty()) throw DataError(std::string(what) + ": no rows");
  std::size_t d = x[0].size();
  if (d == 0) throw DataError(std::string(what) + ": zero-width rows");
  for (const auto& row : x)
    if (row.size() != d)
      throw DataError(std::string(what) + ": ragged rows");
}

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); i++) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

void Standardizer::fit(const Matrix& x) {
  check_matrix(x, "standardizer input");
  const std::size_t n = x.size(), d = x[0].size();
  mean.assign(d, 0.0);
  scale.assign(d, 1.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; j++) mean[j] += row[j];
  for (std::size_t j = 0; j < d; j++) mean[j] /= double(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; j++) {
      double c = row[j] - mean[j];
      var[j] += c * c;
    }
  for (std::size_t j = 0; j < d; j++) {
    double s = std::sqrt(var[j] / double(n));
    scale[j] = s > 1e-12 ? s : 1.0;
  }
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  if (x.size() != mean.size()) throw DataError("standardizer dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); j++) out[j] = (x[j] - mean[j]) / scale[j];
  return out;
}

std::vector<double> RegressionModel::predict(std::span<const double> x) const {
  if (int(x.size()) != in_dim) throw DataError("regression input dimension mismatch");
  std::vector<double> y(std::size_t(out_dim), 0.0);
  for (int o = 0; o < out_dim; o++) {
    double acc = 0.0;
    const double* row = &w[std::size_t(o) * std::size_t(in_dim)];
    for (int i = 0; i < in_dim; i++) acc += row[std::size_t(i)] * x[std::size_t(i)];
    y[std::size_t(o)] = acc;
  }
  return y;
}

RegressionModel regression_fit(const Matrix& x, const Matrix& y, double ridge) {
  check_matrix(x, "regression inputs");
  check_matrix(y, "regression targets");
  if (x.size() != y.size())
    throw DataError("regression inputs/targets row count mismatch");
  const int n = int(x.size());
  const int din = int(x[0].size());
  const int dout = int(y[0].size());

  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(din, din);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(din, dout);
  Eigen::VectorXd xi(din);
  for (int r = 0; r < n; r++) {
    for (int j = 0; j < din; j++) xi(j) = x[std::size_t(r)][std::size_t(j)];
    xtx.noalias() += xi * xi.transpose();
    for (int o = 0; o < dout; o++)
      xty.col(o).noalias() += xi * y[std::size_t(r)][std::size_t(o)];
  }
  double lambda = ridge * xtx.trace() / double(din);
  for (int j = 0; j < din; j++) xtx(j, j) += lambda;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("regression normal equations not positive definite");
  Eigen::MatrixXd wt = ldlt.solve(xty);  // din x dout

  RegressionModel m;
  m.in_dim = din;
  m.out_dim = dout;
  m.w.resize(std::size_t(din) * std::size_t(dout));
  for (int o = 0; o < dout; o++)
    for (int j = 0; j < din; j++)
      m.w[std::size_t(o) * std::size_t(din) + std::size_t(j)] = wt(j, o);

  double acc = 0.0;
  for (int r = 0; r < n; r++) {
    std::vector<double> p = m.predict(x[std::size_t(r)]);
    for (int o = 0; o < dout; o++) {
      double d = p[std::size_t(o)] - y[std::size_t(r)][std::size_t(o)];
      acc += d * d;
    }
  }
  m.train_rms = std::sqrt(acc / double(n));
  return m;
}

// --- vector quantization ---------------------------------------------------

int nearest_centroid(const Codebook& cb, std::span<const double> x) {
  if (cb.centroids.empty()) throw DataError("empty codebook");
  if (int(x.size()) != cb.dim()) throw DataError("codebook dimension mismatch");
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < int(cb.centroids.size()); i++) {
    double d = sq_dist(x, cb.centroids[std::size_t(i)]);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = i;
    }
  }
  return best;
}

double quantizer_distortion(const Codebook& cb, const Matrix& x) {
  check_matrix(x, "quantizer input");
  double acc = 0.0;
  for (const auto& row : x)
    acc += sq_dist(row, cb.centroids[std::size_t(nearest_centroid(cb, row))]);
  return acc / double(x.size());
}

namespace {

// One Lloyd pass: assign, recompute, re-seed empties.  Returns the
// distortion of the assignment it started from.
double lloyd_step(const Matrix& x, Codebook& cb, std::vector<int>& assign,
                  bool& reseeded) {
  const std::size_t n = x.size();
  const int m = int(cb.centroids.size());
  const int d = cb.dim();
  double dist = 0.0;
  std::vector<int> count(std::size_t(m), 0);
  Matrix sums(std::size_t(m), std::vector<double>(std::size_t(d), 0.0));
  for (std::size_t r = 0; r < n; r++) {
    int c = nearest_centroid(cb, x[r]);
    assign[r] = c;
    dist += sq_dist(x[r], cb.centroids[std::size_t(c)]);
    count[std::size_t(c)]++;
    for (int j = 0; j < d; j++) sums[std::size_t(c)][std::size_t(j)] += x[r][std::size_t(j)];
  }
  dist /= double(n);

  reseeded = false;
  for (int c = 0; c < m; c++) {
    if (count[std::size_t(c)] > 0) {
      for (int j = 0; j < d; j++)
        cb.centroids[std::size_t(c)][std::size_t(j)] =
            sums[std::size_t(c)][std::size_t(j)] / double(count[std::size_t(c)]);
    }
  }
  for (int c = 0; c < m; c++) {
    if (count[std::size_t(c)] > 0) continue;
    // farthest member of the most populous cell becomes the new seed
    int big = int(std::max_element(count.begin(), count.end()) - count.begin());
    std::size_t far_row = 0;
    double far_d = -1.0;
    for (std::size_t r = 0; r < n; r++) {
      if (assign[r] != big) continue;
      double dd = sq_dist(x[r], cb.centroids[std::size_t(big)]);
      if (dd > far_d) {
        far_d = dd;
        far_row = r;
      }
    }
    cb.centroids[std::size_t(c)] = x[far_row];
    assign[far_row] = c;
    count[std::size_t(c)]++;
    count[std::size_t(big)]--;
    reseeded = true;
  }
  return dist;
}

}  // namespace

Codebook lbg_train(const Matrix& x, int size, const LbgOptions& opts) {
  check_matrix(x, "lbg input");
  if (size < 1 || (size & (size - 1)) != 0)
    throw DataError("codebook size must be a power of two");
  if (int(x.size()) < size) {
    std::ostringstream msg;
    msg << "lbg: " << x.size() << " samples cannot fill " << size << " cells";
    throw TrainingError(msg.str());
  }
  const std::size_t n = x.size();
  const std::size_t d = x[0].size();

  // per-dimension spread drives the split perturbation
  Standardizer st;
  st.fit(x);

  Codebook cb;
  cb.centroids.assign(1, st.mean);

  std::vector<int> assign(n, 0);
  while (int(cb.centroids.size()) < size) {
    Matrix split;
    split.reserve(cb.centroids.size() * 2);
    for (const auto& c : cb.centroids) {
      std::vector<double> lo = c, hi = c;
      for (std::size_t j = 0; j < d; j++) {
        double eps = opts.split_scale * st.scale[j];
        lo[j] -= eps;
        hi[j] += eps;
      }
      split.push_back(std::move(lo));
      split.push_back(std::move(hi));
    }
    cb.centroids = std::move(split);

    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_lloyd_iters; it++) {
      bool reseeded = false;
      double dist = lloyd_step(x, cb, assign, reseeded);
      if (!reseeded && dist > prev * (1.0 + 1e-12))
        throw NumericalError("lloyd distortion increased without re-seeding");
      if (!reseeded && prev < std::numeric_limits<double>::infinity() &&
          prev - dist <= opts.rel_distortion_eps * std::max(prev, 1e-300))
        break;
      prev = dist;
    }
  }
  return cb;
}

std::vector<double> AssociativeCodebook::predict(std::span<const double> x) const {
  int c = nearest_centroid(input_cb, x);
  return outputs[std::size_t(c)];
}

AssociativeCodebook codebook_associate(const Matrix& x, const Matrix& y,
                                       int size, const LbgOptions& opts) {
  check_matrix(y, "codebook targets");
  if (x.size() != y.size())
    throw DataError("codebook inputs/targets row count mismatch");
  AssociativeCodebook ac;
  ac.input_cb = lbg_train(x, size, opts);
  const std::size_t dout = y[0].size();
  const int m = int(ac.input_cb.centroids.size());

  std::vector<double> global(dout, 0.0);
  for (const auto& row : y)
    for (std::size_t j = 0; j < dout; j++) global[j] += row[j];
  for (std::size_t j = 0; j < dout; j++) global[j] /= double(y.size());

  Matrix sums(std::size_t(m), std::vector<double>(dout, 0.0));
  std::vector<int> count(std::size_t(m), 0);
  for (std::size_t r = 0; r < x.size(); r++) {
    int c = nearest_centroid(ac.input_cb, x[r]);
    count[std::size_t(c)]++;
    for (std::size_t j = 0; j < dout; j++) sums[std::size_t(c)][j] += y[r][j];
  }
  ac.outputs.assign(std::size_t(m), global);  // empty cells keep the global mean
  for (int c = 0; c < m; c++)
    if (count[std::size_t(c)] > 0)
      for (std::size_t j = 0; j < dout; j++)
        ac.outputs[std::size_t(c)][j] = sums[std::size_t(c)][j] / double(count[std::size_t(c)]);
  return ac;
}

int ResidualVq::encode(std::span<const double> residual) const {
  return nearest_centroid(cb, residual);
}

const std::vector<double>& ResidualVq::decode(int index) const {
  if (index < 0 || index >= int(cb.centroids.size()))
    throw DataError("residual VQ index out of range");
  return cb.centroids[std::size_t(index)];
}

ResidualVq residual_vq_train(const Matrix& residuals, int bits,
                             const LbgOptions& opts) {
  if (bits < 4 || bits > 12)
    throw DataError("residual VQ bits must lie in [4, 12]");
  ResidualVq vq;
  vq.bits = bits;
  vq.cb = lbg_train(residuals, 1 << bits, opts);
  return vq;
}

// --- multilayer perceptron -------------------------------------------------

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  if (layers.empty()) throw DataError("uninitialized MLP");
  if (int(x.size()) != in_dim()) throw DataError("MLP input dimension mismatch");
  std::vector<double> cur(x.begin(), x.end()), next;
  for (const MlpLayer& l : layers) {
    next.assign(std::size_t(l.out), 0.0);
    for (int o = 0; o < l.out; o++) {
      double acc = l.b[std::size_t(o)];
      const double* row = &l.w[std::size_t(o) * std::size_t(l.in)];
      for (int i = 0; i < l.in; i++) acc += row[std::size_t(i)] * cur[std::size_t(i)];
      next[std::size_t(o)] = l.tanh_act ? std::tanh(acc) : acc;
    }
    cur.swap(next);
  }
  return cur;
}

std::size_t MlpModel::param_count() const {
  std::size_t n = 0;
  for (const MlpLayer& l : layers) n += l.w.size() + l.b.size();
  return n;
}

MlpModel mlp_init(int in_dim, const std::vector<int>& hidden, int out_dim,
                  std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1) throw DataError("MLP dimensions must be >= 1");
  for (int h : hidden)
    if (h < 1) throw DataError("MLP hidden sizes must be >= 1");
  std::mt19937_64 rng(seed);
  MlpModel m;
  int prev = in_dim;
  std::vector<int> outs(hidden);
  outs.push_back(out_dim);
  for (std::size_t li = 0; li < outs.size(); li++) {
    MlpLayer l;
    l.in = prev;
    l.out = outs[li];
    l.tanh_act = li + 1 < outs.size();
    double lim = 1.0 / std::sqrt(double(l.in));
    std::uniform_real_distribution<double> u(-lim, lim);
    l.w.resize(std::size_t(l.in) * std::size_t(l.out));
    l.b.resize(std::size_t(l.out));
    for (double& v : l.w) v = u(rng);
    for (double& v : l.b) v = u(rng);
    prev = l.out;
    m.layers.push_back(std::move(l));
  }
  return m;
}

namespace {

struct ForwardTrace {
  std::vector<std::vector<double>> act;  // act[0] = input, act.back() = output
};

std::vector<double> forward_traced(const MlpModel& m, std::span<const double> x,
                                   ForwardTrace& tr) {
  tr.act.clear();
  tr.act.emplace_back(x.begin(), x.end());
  for (const MlpLayer& l : m.layers) {
    const std::vector<double>& cur = tr.act.back();
    std::vector<double> next(std::size_t(l.out));
    for (int o = 0; o < l.out; o++) {
      double acc = l.b[std::size_t(o)];
      const double* row = &l.w[std::size_t(o) * std::size_t(l.in)];
      for (int i = 0; i < l.in; i++) acc += row[std::size_t(i)] * cur[std::size_t(i)];
      next[std::size_t(o)] = l.tanh_act ? std::tanh(acc) : acc;
    }
    tr.act.push_back(std::move(next));
  }
  return tr.act.back();
}

// accumulates d(loss)/d(params) into grad (flattened layout)
void backprop_accumulate(const MlpModel& m, const ForwardTrace& tr,
                         std::span<const double> y, std::vector<double>& grad) {
  const std::size_t nl = m.layers.size();
  const std::vector<double>& yhat = tr.act.back();
  std::vector<double> delta(yhat.size());
  for (std::size_t j = 0; j < yhat.size(); j++)
    delta[j] = 2.0 * (yhat[j] - y[j]);  // d/dyhat of sum (yhat-y)^2

  // per-layer parameter offsets in the flat vector
  std::vector<std::size_t> off(nl, 0);
  for (std::size_t li = 1; li < nl; li++)
    off[li] = off[li - 1] + m.layers[li - 1].w.size() + m.layers[li - 1].b.size();

  for (std::size_t li = nl; li-- > 0;) {
    const MlpLayer& l = m.layers[li];
    const std::vector<double>& in = tr.act[li];
    const std::vector<double>& out = tr.act[li + 1];
    // delta currently holds d(loss)/d(activation output); fold in the
    // tanh derivative to get d/d(pre-activation)
    if (l.tanh_act)
      for (int o = 0; o < l.out; o++)
        delta[std::size_t(o)] *= 1.0 - out[std::size_t(o)] * out[std::size_t(o)];

    double* gw = &grad[off[li]];
    double* gb = &grad[off[li] + l.w.size()];
    for (int o = 0; o < l.out; o++) {
      const double d = delta[std::size_t(o)];
      double* grow = gw + std::size_t(o) * std::size_t(l.in);
      for (int i = 0; i < l.in; i++) grow[std::size_t(i)] += d * in[std::size_t(i)];
      gb[std::size_t(o)] += d;
    }
    if (li > 0) {
      std::vector<double> prev_delta(std::size_t(l.in), 0.0);
      for (int o = 0; o < l.out; o++) {
        const double d = delta[std::size_t(o)];
        const double* row = &l.w[std::size_t(o) * std::size_t(l.in)];
        for (int i = 0; i < l.in; i++) prev_delta[std::size_t(i)] += d * row[std::size_t(i)];
      }
      delta.swap(prev_delta);
    }
  }
}

void apply_flat_update(MlpModel& m, const std::vector<double>& step) {
  std::size_t p = 0;
  for (MlpLayer& l : m.layers) {
    for (double& v : l.w) v -= step[p++];
    for (double& v : l.b) v -= step[p++];
  }
}

}  // namespace

double mlp_loss(const MlpModel& m, std::span<const double> x,
                std::span<const double> y) {
  std::vector<double> yhat = m.forward(x);
  if (y.size() != yhat.size()) throw DataError("MLP target dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < yhat.size(); j++) {
    double d = yhat[j] - y[j];
    acc += d * d;
  }
  return acc;
}

std::vector<double> mlp_gradient(const MlpModel& m, std::span<const double> x,
                                 std::span<const double> y) {
  if (int(y.size()) != m.out_dim()) throw DataError("MLP target dimension mismatch");
  std::vector<double> grad(m.param_count(), 0.0);
  ForwardTrace tr;
  forward_traced(m, x, tr);
  backprop_accumulate(m, tr, y, grad);
  return grad;
}

double mlp_dataset_mse(const MlpModel& m, const Matrix& x, const Matrix& y) {
  if (x.empty()) throw DataError("empty dataset");
  double acc = 0.0;
  for (std::size_t r = 0; r < x.size(); r++) acc += mlp_loss(m, x[r], y[r]);
  return acc / double(x.size());
}

MlpTrainResult mlp_train(const Matrix& x, const Matrix& y,
                         const std::vector<int>& hidden,
                         const MlpTrainOptions& opts) {
  check_matrix(x, "MLP inputs");
  check_matrix(y, "MLP targets");
  if (x.size() != y.size()) throw DataError("MLP inputs/targets row count mismatch");
  if (opts.batch < 1 || opts.max_epochs < 1 || opts.patience < 1)
    throw DataError("bad MLP training options");
  const std::size_t n = x.size();

  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; i++) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_val = std::size_t(double(n) * opts.val_fraction);
  if (n_val == 0 && n >= 10) n_val = 1;
  if (n_val >= n) throw DataError("validation fraction leaves no training data");
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + long(n_val));
  std::vector<std::size_t> train_idx(order.begin() + long(n_val), order.end());

  auto subset_mse = [&](const MlpModel& m, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t r : idx) acc += mlp_loss(m, x[r], y[r]);
    return acc / double(idx.size());
  };

  MlpModel model = mlp_init(int(x[0].size()), hidden, int(y[0].size()), rng());
  const std::size_t np = model.param_count();
  std::vector<double> eta(np, opts.eta0);
  std::vector<double> trace(np, 0.0);
  std::vector<double> grad(np, 0.0);
  std::vector<double> step(np, 0.0);

  double initial_train = subset_mse(model, train_idx);
  MlpTrainResult res;
  res.model = model;
  double best_val = n_val ? subset_mse(model, val_idx) : initial_train;
  res.val_mse = best_val;
  int since_best = 0;

  ForwardTrace tr;
  for (int epoch = 1; epoch <= opts.max_epochs; epoch++) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t start = 0; start < train_idx.size();
         start += std::size_t(opts.batch)) {
      std::size_t stop = std::min(train_idx.size(), start + std::size_t(opts.batch));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t r = start; r < stop; r++) {
        forward_traced(model, x[train_idx[r]], tr);
        backprop_accumulate(model, tr, y[train_idx[r]], grad);
      }
      for (std::size_t p = 0; p < np; p++) {
        double g = grad[p];
        double agree = g * trace[p];
        if (agree > 0.0)
          eta[p] = std::min(opts.eta_max, eta[p] + opts.kappa);
        else if (agree < 0.0)
          eta[p] = std::max(opts.eta_min, eta[p] * 0.5);
        trace[p] = opts.decay * trace[p] + (1.0 - opts.decay) * g;
        step[p] = eta[p] * g;
      }
      apply_flat_update(model, step);
    }

    double train_mse = subset_mse(model, train_idx);
    if (!std::isfinite(train_mse) || train_mse > 10.0 * initial_train) {
      std::ostringstream msg;
      msg << "MLP training diverged at epoch " << epoch << " (train error "
          << train_mse << " vs initial " << initial_train << ")";
      throw TrainingError(msg.str());
    }
    double val_mse = n_val ? subset_mse(model, val_idx) : train_mse;
    res.epochs_run = epoch;
    if (val_mse < best_val) {
      best_val = val_mse;
      res.model = model;
      res.val_mse = val_mse;
      since_best = 0;
    } else {
      since_best++;
      if (since_best >= opts.patience) break;
    }
  }

  res.train_mse = subset_mse(res.model, train_idx);
  return res;
}

}  // namespace bandex
