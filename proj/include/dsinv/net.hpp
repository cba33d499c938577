#pragma once

#include <cstdint>
#include <vector>

namespace dsinv {

// Minimal fully connected network with rectified-linear hidden layers,
// trained by softmax cross-entropy with Adam. Single-threaded and
// deterministic given the seed.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> dims, std::uint64_t seed);  // dims: in, hidden..., out

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int scratch_size() const;

  // Logits for one input; scratch must hold scratch_size() floats.
  void forward(const float* in, float* logits, float* scratch) const;

  std::vector<std::vector<float>>& weights() { return w_; }
  std::vector<std::vector<float>>& biases() { return b_; }
  const std::vector<std::vector<float>>& weights() const { return w_; }
  const std::vector<std::vector<float>>& biases() const { return b_; }

 private:
  std::vector<int> dims_;
  std::vector<std::vector<float>> w_;  // layer l: dims[l+1] x dims[l], row-major
  std::vector<std::vector<float>> b_;
};

struct AdamConfig {
  double lr = 1e-3;
  int batch = 64;
  int epochs = 40;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainStats {
  double loss = 0.0;      // mean cross-entropy after the final epoch
  double accuracy = 0.0;  // training accuracy after the final epoch
};

// Trains `net` in place on row-major features X (rows x input_dim) with
// integer class labels. Throws std::runtime_error if the loss turns NaN.
TrainStats train_classifier(Mlp& net, const std::vector<float>& x,
                            const std::vector<int>& y,
                            const AdamConfig& config, std::uint64_t seed);

}  // namespace dsinv
