#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hullnet/activation.hpp"
#include "hullnet/geometry.hpp"
#include "hullnet/parallel.hpp"

namespace hullnet {

struct TrainConfig {
  std::size_t h1 = 4, h2 = 2;
  ActivationSpec activation = ActivationSpec::make_relu();
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::size_t runs = 1;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

struct TrainResult {
  double final_loss = 0.0;             // full-pass cross-entropy, mean over runs
  std::vector<double> loss_curve;      // per-epoch running means, mean over runs
  double train_accuracy = 0.0;
  bool diverged = false;
};

// input -> h1 -> h2 -> 2-way softmax, dense, with the activation on both
// hidden layers. Parameters live in one flat vector so finite-difference
// checks can walk them.
class MlpClassifier {
 public:
  MlpClassifier(std::size_t in_dim, std::size_t h1, std::size_t h2,
                ActivationSpec act)
      : in_(in_dim), h1_(h1), h2_(h2), act_(act) {
    if (h1 == 0 || h2 == 0)
      throw std::invalid_argument("MlpClassifier: hidden sizes must be >= 1");
    off_w1_ = 0;
    off_b1_ = off_w1_ + h1_ * in_;
    off_w2_ = off_b1_ + h1_;
    off_b2_ = off_w2_ + h2_ * h1_;
    off_w3_ = off_b2_ + h2_;
    off_b3_ = off_w3_ + 2 * h2_;
    params_.assign(off_b3_ + 2, 0.0);
  }

  void init(std::mt19937_64& rng) {
    auto glorot = [&](std::size_t off, std::size_t rows, std::size_t cols) {
      const double bound = std::sqrt(6.0 / double(rows + cols));
      std::uniform_real_distribution<double> uni(-bound, bound);
      for (std::size_t i = 0; i < rows * cols; ++i) params_[off + i] = uni(rng);
    };
    glorot(off_w1_, h1_, in_);
    glorot(off_w2_, h2_, h1_);
    glorot(off_w3_, 2, h2_);
    std::fill(params_.begin() + off_b1_, params_.begin() + off_b1_ + h1_, 0.0);
    std::fill(params_.begin() + off_b2_, params_.begin() + off_b2_ + h2_, 0.0);
    params_[off_b3_] = params_[off_b3_ + 1] = 0.0;
  }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  // Softmax probabilities for one sample.
  std::array<double, 2> predict_proba(std::span<const double> x) const {
    Scratch s(h1_, h2_);
    forward(x, s);
    return {s.p[0], s.p[1]};
  }

  // Mean cross-entropy over the index subset; gradient accumulated into grad
  // (same layout as params) when grad != nullptr.
  double loss(const PointSet& xs, const std::vector<int>& ys,
              std::span<const std::size_t> idx,
              std::vector<double>* grad = nullptr) const {
    if (grad) grad->assign(params_.size(), 0.0);
    Scratch s(h1_, h2_);
    double total = 0.0;
    const double inv_n = 1.0 / double(idx.size());
    for (std::size_t i : idx) {
      const auto x = xs[i];
      forward(x, s);
      const int y = ys[i];
      const double p_true = std::max(s.p[y], 1e-300);
      total += -std::log(p_true);
      if (!grad) continue;
      // dL/dlogits = p - onehot(y), averaged over the subset
      double dz3[2] = {s.p[0] * inv_n, s.p[1] * inv_n};
      dz3[y] -= inv_n;
      auto& g = *grad;
      for (int r = 0; r < 2; ++r) {
        for (std::size_t k = 0; k < h2_; ++k)
          g[off_w3_ + r * h2_ + k] += dz3[r] * s.a2[k];
        g[off_b3_ + r] += dz3[r];
      }
      for (std::size_t k = 0; k < h2_; ++k) {
        const double da2 = params_[off_w3_ + k] * dz3[0] +
                           params_[off_w3_ + h2_ + k] * dz3[1];
        s.d2[k] = da2 * act_.derivative(s.z2[k]);
      }
      for (std::size_t r = 0; r < h2_; ++r) {
        for (std::size_t k = 0; k < h1_; ++k)
          g[off_w2_ + r * h1_ + k] += s.d2[r] * s.a1[k];
        g[off_b2_ + r] += s.d2[r];
      }
      for (std::size_t k = 0; k < h1_; ++k) {
        double da1 = 0.0;
        for (std::size_t r = 0; r < h2_; ++r)
          da1 += params_[off_w2_ + r * h1_ + k] * s.d2[r];
        s.d1[k] = da1 * act_.derivative(s.z1[k]);
      }
      for (std::size_t r = 0; r < h1_; ++r) {
        for (std::size_t k = 0; k < in_; ++k)
          g[off_w1_ + r * in_ + k] += s.d1[r] * x[k];
        g[off_b1_ + r] += s.d1[r];
      }
    }
    return total * inv_n;
  }

  int predict(std::span<const double> x) const {
    const auto p = predict_proba(x);
    return p[1] > p[0] ? 1 : 0;
  }

 private:
  struct Scratch {
    std::vector<double> z1, a1, z2, a2, d1, d2;
    double p[2];
    Scratch(std::size_t h1, std::size_t h2)
        : z1(h1), a1(h1), z2(h2), a2(h2), d1(h1), d2(h2) {}
  };

  void forward(std::span<const double> x, Scratch& s) const {
    for (std::size_t r = 0; r < h1_; ++r) {
      const double* w = params_.data() + off_w1_ + r * in_;
      double v = params_[off_b1_ + r];
      for (std::size_t k = 0; k < in_; ++k) v += w[k] * x[k];
      s.z1[r] = v;
      s.a1[r] = act_.eval(v);
    }
    for (std::size_t r = 0; r < h2_; ++r) {
      const double* w = params_.data() + off_w2_ + r * h1_;
      double v = params_[off_b2_ + r];
      for (std::size_t k = 0; k < h1_; ++k) v += w[k] * s.a1[k];
      s.z2[r] = v;
      s.a2[r] = act_.eval(v);
    }
    double logits[2];
    for (int r = 0; r < 2; ++r) {
      const double* w = params_.data() + off_w3_ + r * h2_;
      double v = params_[off_b3_ + r];
      for (std::size_t k = 0; k < h2_; ++k) v += w[k] * s.a2[k];
      logits[r] = v;
    }
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    s.p[0] = e0 / z;
    s.p[1] = e1 / z;
  }

  std::size_t in_, h1_, h2_;
  ActivationSpec act_;
  std::size_t off_w1_, off_b1_, off_w2_, off_b2_, off_w3_, off_b3_;
  std::vector<double> params_;
};

// Plain SGD on shuffled minibatches. Deterministic given the config; each run
// r uses seed + r. Divergence (non-finite loss) is reported, not thrown.
inline TrainResult train(const PointSet& points, const std::vector<int>& labels,
                         const TrainConfig& cfg) {
  if (points.size() != labels.size())
    throw std::invalid_argument("train: label count mismatch");
  if (points.empty()) throw std::invalid_argument("train: empty dataset");
  for (int y : labels)
    if (y != 0 && y != 1)
      throw std::invalid_argument("train: labels must be 0/1");
  if (cfg.epochs == 0 || cfg.batch_size == 0 || cfg.runs == 0)
    throw std::invalid_argument("train: epochs, batch_size, runs must be >= 1");

  const std::size_t n = points.size();
  TrainResult out;
  out.loss_curve.assign(cfg.epochs, 0.0);

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t run = 0; run < cfg.runs; ++run) {
    std::mt19937_64 rng(cfg.seed + run);
    MlpClassifier net(points.dim(), cfg.h1, cfg.h2, cfg.activation);
    net.init(rng);
    std::vector<std::size_t> order = all;
    std::vector<double> grad;
    bool run_diverged = false;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      std::size_t seen = 0;
      for (std::size_t start = 0; start < n; start += cfg.batch_size) {
        const std::size_t len = std::min(cfg.batch_size, n - start);
        const std::span<const std::size_t> batch(order.data() + start, len);
        const double batch_loss = net.loss(points, labels, batch, &grad);
        if (!std::isfinite(batch_loss)) {
          run_diverged = true;
          break;
        }
        epoch_loss += batch_loss * double(len);
        seen += len;
        auto& p = net.params();
        for (std::size_t k = 0; k < p.size(); ++k)
          p[k] -= cfg.learning_rate * grad[k];
      }
      if (run_diverged) {
        for (std::size_t e = epoch; e < cfg.epochs; ++e)
          out.loss_curve[e] += std::numeric_limits<double>::infinity();
        break;
      }
      out.loss_curve[epoch] += epoch_loss / double(seen);
    }

    if (run_diverged) {
      out.diverged = true;
      out.final_loss += std::numeric_limits<double>::infinity();
      continue;
    }
    out.final_loss += net.loss(points, labels, all);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (net.predict(points[i]) == labels[i]) ++correct;
    out.train_accuracy += double(correct) / double(n);
  }

  const double inv_runs = 1.0 / double(cfg.runs);
  out.final_loss *= inv_runs;
  out.train_accuracy *= inv_runs;
  for (auto& v : out.loss_curve) v *= inv_runs;
  return out;
}

struct SweepCell {
  std::size_t h1 = 0, h2 = 0;
  std::string activation;
  double final_loss = 0.0;
  double accuracy = 0.0;
  std::size_t runs = 0, epochs = 0;
  bool ok = false;
  std::string error;
};

// Full cross product of sizes x activations; one failed cell does not abort
// the sweep. Cells are independent, so they may run on separate threads.
inline std::vector<SweepCell> size_sweep(
    const PointSet& points, const std::vector<int>& labels,
    const std::vector<std::pair<std::size_t, std::size_t>>& sizes,
    const std::vector<ActivationSpec>& activations, const TrainConfig& base,
    int threads = 1) {
  if (sizes.empty() || activations.empty())
    throw std::invalid_argument("size_sweep: empty size or activation list");
  std::vector<SweepCell> cells(sizes.size() * activations.size());
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    const auto& size = sizes[idx / activations.size()];
    const auto& act = activations[idx % activations.size()];
    SweepCell& cell = cells[idx];
    cell.h1 = size.first;
    cell.h2 = size.second;
    cell.activation = act.name();
    cell.runs = base.runs;
    cell.epochs = base.epochs;
    try {
      TrainConfig cfg = base;
      cfg.h1 = size.first;
      cfg.h2 = size.second;
      cfg.activation = act;
      const TrainResult res = train(points, labels, cfg);
      cell.final_loss = res.final_loss;
      cell.accuracy = res.train_accuracy;
      cell.ok = !res.diverged;
      if (res.diverged) cell.error = "diverged";
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });
  return cells;
}

inline std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::string out = "h1,h2,activation,final_loss,accuracy,runs,epochs\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%s,%.17g,%.17g,%zu,%zu\n", c.h1,
                  c.h2, c.activation.c_str(), c.final_loss, c.accuracy, c.runs,
                  c.epochs);
    out += buf;
  }
  return out;
}

}  // namespace hullnet
