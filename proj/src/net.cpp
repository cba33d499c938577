#include "dsinv/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsinv/rng.hpp"

namespace dsinv {

Mlp::Mlp(std::vector<int> dims, std::uint64_t seed) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("mlp needs >= 2 layers");
  RngStream rng(seed, 0x6d6c70);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int fan_in = dims_[l];
    const int fan_out = dims_[l + 1];
    std::vector<float> w(static_cast<std::size_t>(fan_in) * fan_out);
    const double scale = std::sqrt(2.0 / fan_in);
    for (float& v : w) {
      // Box-Muller; He-style initialisation.
      const double u1 = std::max(rng.next_uniform(), 1e-12);
      const double u2 = rng.next_uniform();
      v = static_cast<float>(
          scale * std::sqrt(-2.0 * std::log(u1)) *
          std::cos(2.0 * 3.14159265358979323846 * u2));
    }
    w_.push_back(std::move(w));
    b_.emplace_back(static_cast<std::size_t>(fan_out), 0.0f);
  }
}

int Mlp::scratch_size() const {
  int m = 0;
  for (std::size_t l = 1; l < dims_.size(); ++l) m = std::max(m, dims_[l]);
  return 2 * m;
}

void Mlp::forward(const float* in, float* logits, float* scratch) const {
  const float* cur = in;
  float* buf_a = scratch;
  float* buf_b = scratch + scratch_size() / 2;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    const int rows = dims_[l + 1];
    const int cols = dims_[l];
    float* out = l + 1 == w_.size() ? logits : (cur == buf_a ? buf_b : buf_a);
    const float* wp = w_[l].data();
    for (int r = 0; r < rows; ++r) {
      float acc = b_[l][static_cast<std::size_t>(r)];
      const float* row = wp + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += row[c] * cur[c];
      out[r] = (l + 1 == w_.size()) ? acc : (acc > 0.0f ? acc : 0.0f);
    }
    cur = out;
  }
}

TrainStats train_classifier(Mlp& net, const std::vector<float>& x,
                            const std::vector<int>& y,
                            const AdamConfig& config, std::uint64_t seed) {
  const int in_dim = net.input_dim();
  const int classes = net.output_dim();
  const std::size_t rows = y.size();
  if (x.size() != rows * static_cast<std::size_t>(in_dim))
    throw std::invalid_argument("training matrix shape mismatch");
  if (rows == 0) throw std::invalid_argument("empty training set");

  auto& w = net.weights();
  auto& b = net.biases();
  const std::size_t layers = w.size();
  const auto& dims = net.dims();

  // Adam state.
  std::vector<std::vector<float>> mw(layers), vw(layers), mb(layers),
      vb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    mw[l].assign(w[l].size(), 0.0f);
    vw[l].assign(w[l].size(), 0.0f);
    mb[l].assign(b[l].size(), 0.0f);
    vb[l].assign(b[l].size(), 0.0f);
  }

  // Per-layer activations for backprop (batch of one; the batch loop
  // accumulates gradients).
  std::vector<std::vector<float>> act(layers + 1);
  for (std::size_t l = 0; l <= layers; ++l)
    act[l].assign(static_cast<std::size_t>(dims[l]), 0.0f);
  std::vector<std::vector<float>> delta(layers);
  for (std::size_t l = 0; l < layers; ++l)
    delta[l].assign(static_cast<std::size_t>(dims[l + 1]), 0.0f);
  std::vector<std::vector<float>> gw(layers), gb(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    gw[l].assign(w[l].size(), 0.0f);
    gb[l].assign(b[l].size(), 0.0f);
  }

  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  RngStream shuffle_rng(seed, 0x736866);

  long step = 0;
  TrainStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = rows; i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
    double loss_sum = 0.0;
    long correct = 0;
    for (std::size_t start = 0; start < rows;
         start += static_cast<std::size_t>(config.batch)) {
      const std::size_t stop =
          std::min(rows, start + static_cast<std::size_t>(config.batch));
      for (std::size_t l = 0; l < layers; ++l) {
        std::fill(gw[l].begin(), gw[l].end(), 0.0f);
        std::fill(gb[l].begin(), gb[l].end(), 0.0f);
      }
      for (std::size_t ii = start; ii < stop; ++ii) {
        const std::size_t row = order[ii];
        const float* xin = x.data() + row * static_cast<std::size_t>(in_dim);
        std::copy(xin, xin + in_dim, act[0].begin());
        for (std::size_t l = 0; l < layers; ++l) {
          const int r = dims[l + 1], c = dims[l];
          for (int rr = 0; rr < r; ++rr) {
            float acc = b[l][static_cast<std::size_t>(rr)];
            const float* wr = w[l].data() + static_cast<std::size_t>(rr) * c;
            for (int cc = 0; cc < c; ++cc) acc += wr[cc] * act[l][static_cast<std::size_t>(cc)];
            act[l + 1][static_cast<std::size_t>(rr)] =
                (l + 1 == layers) ? acc : std::max(acc, 0.0f);
          }
        }
        // Softmax + cross-entropy.
        auto& logits = act[layers];
        const float mx = *std::max_element(logits.begin(), logits.end());
        double denom = 0.0;
        for (float v : logits) denom += std::exp(static_cast<double>(v - mx));
        const int label = y[row];
        const double logp =
            static_cast<double>(logits[static_cast<std::size_t>(label)] - mx) -
            std::log(denom);
        loss_sum -= logp;
        int argmax = 0;
        for (int k = 1; k < classes; ++k)
          if (logits[static_cast<std::size_t>(k)] >
              logits[static_cast<std::size_t>(argmax)])
            argmax = k;
        if (argmax == label) ++correct;
        // Output delta.
        for (int k = 0; k < classes; ++k) {
          const double p =
              std::exp(static_cast<double>(
                  logits[static_cast<std::size_t>(k)] - mx)) /
              denom;
          delta[layers - 1][static_cast<std::size_t>(k)] =
              static_cast<float>(p - (k == label ? 1.0 : 0.0));
        }
        for (std::size_t l = layers; l-- > 0;) {
          const int r = dims[l + 1], c = dims[l];
          for (int rr = 0; rr < r; ++rr) {
            const float d = delta[l][static_cast<std::size_t>(rr)];
            if (d == 0.0f) continue;
            float* gwr = gw[l].data() + static_cast<std::size_t>(rr) * c;
            for (int cc = 0; cc < c; ++cc)
              gwr[cc] += d * act[l][static_cast<std::size_t>(cc)];
            gb[l][static_cast<std::size_t>(rr)] += d;
          }
          if (l > 0) {
            for (int cc = 0; cc < c; ++cc) {
              float acc = 0.0f;
              for (int rr = 0; rr < r; ++rr)
                acc += w[l][static_cast<std::size_t>(rr) * c + cc] *
                       delta[l][static_cast<std::size_t>(rr)];
              delta[l - 1][static_cast<std::size_t>(cc)] =
                  act[l][static_cast<std::size_t>(cc)] > 0.0f ? acc : 0.0f;
            }
          }
        }
      }
      // Adam update on the batch mean gradient.
      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, step);
      const double bc2 = 1.0 - std::pow(config.beta2, step);
      const float inv = 1.0f / static_cast<float>(stop - start);
      for (std::size_t l = 0; l < layers; ++l) {
        auto adam = [&](std::vector<float>& param, std::vector<float>& grad,
                        std::vector<float>& m1, std::vector<float>& m2) {
          for (std::size_t k = 0; k < param.size(); ++k) {
            const double g = static_cast<double>(grad[k]) * inv;
            m1[k] = static_cast<float>(config.beta1 * m1[k] +
                                       (1.0 - config.beta1) * g);
            m2[k] = static_cast<float>(config.beta2 * m2[k] +
                                       (1.0 - config.beta2) * g * g);
            const double mhat = m1[k] / bc1;
            const double vhat = m2[k] / bc2;
            param[k] -= static_cast<float>(config.lr * mhat /
                                           (std::sqrt(vhat) + config.eps));
          }
        };
        adam(w[l], gw[l], mw[l], vw[l]);
        adam(b[l], gb[l], mb[l], vb[l]);
      }
    }
    stats.loss = loss_sum / static_cast<double>(rows);
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(rows);
    if (!std::isfinite(stats.loss))
      throw std::runtime_error("classifier training diverged (loss not finite)");
  }
  return stats;
}

}  // namespace dsinv
