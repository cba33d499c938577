#pragma once

#include <cstdint>
#include <vector>

#include "dsinv/dcl.hpp"
#include "dsinv/features.hpp"
#include "dsinv/vfa.hpp"

namespace dsinv {

// Per-parameter value grid a single policy is trained across. Episode
// resets draw one value per parameter, independently and uniformly.
struct EplGrid {
  std::vector<std::string> names;           // kThetaNames order
  std::vector<std::vector<double>> values;  // sorted, duplicates removed

  // Grid points are exactly the values observed in the population.
  static EplGrid from_population(const std::vector<InstanceParams>& pop);
  // Grid points are min, max, and `kappa` interior percentiles per parameter.
  static EplGrid from_percentiles(const std::vector<InstanceParams>& pop,
                                  int kappa);

  std::vector<double> mins() const;
  std::vector<double> maxs() const;
  bool contains(const InstanceParams& params) const;

  // Builds an instance from one value per parameter; validates invariants.
  InstanceParams assemble(const std::vector<double>& theta) const;
  // Uniform draw per parameter with rejection of invalid combinations
  // (at most 1000 attempts).
  InstanceParams sample(RngStream& rng) const;
};

class EplEnv : public EnvSource {
 public:
  explicit EplEnv(EplGrid grid);
  const FeatureSpec& spec() const override { return spec_; }
  Episode episode(std::uint64_t seed, long index) const override;
  void decision_bounds(int* budget, int* batch_cm) const override;
  const EplGrid& grid() const { return grid_; }

 private:
  EplGrid grid_;
  FeatureSpec spec_;
};

// Budget scaling and network deepening applied when a trainer runs inside
// EPL; the sample counts grow because the augmented state space is larger.
struct EplScaling {
  double samples_factor = 2.5;
  double scenarios_factor = 2.0;
  int extra_hidden_layers = 1;
  long episode_len = 100;  // samples collected per sampled instance
};

RolloutConfig scale_for_epl(RolloutConfig base, const EplScaling& scaling);
NetConfig deepen_for_epl(NetConfig base, const EplScaling& scaling);

DclResult epl_train_dcl(const EplGrid& grid, const RolloutConfig& base,
                        const NetConfig& net, const EplScaling& scaling,
                        std::uint64_t seed);

// AVI keeps its hyperparameters under EPL; only the features grow.
LinearVfa epl_train_avi(const EplGrid& grid, const AviConfig& config);

}  // namespace dsinv
