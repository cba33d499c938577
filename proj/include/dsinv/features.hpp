#pragma once

#include <cstdint>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/sim.hpp"

namespace dsinv {

// Raw feature values for a state: the state variables themselves, the
// inventory position, the expected demand and demand variance of the current
// installed-base mix, and the inventory level (stock minus backorders).
std::vector<double> extract_features(const SystemState& state,
                                     const InstanceParams& params);

// Layout and scaling of the learner-facing feature vector. Pipeline slots
// are arrival-time aligned and carry one extra position so a post-decision
// state (order placed, failures not yet realized) fits the same shape; all
// entries are divided by instance-scale constants so one network can serve
// differently scaled instances. Under EPL the sampled instance parameters
// are appended, min-max normalized against the grid bounds.
struct FeatureSpec {
  int slots_cm = 0;  // >= lead_cm + 1
  int slots_am = 0;  // >= lead_am + 1
  int theta_dim = 0;
  std::vector<double> theta_min;  // grid bounds when theta_dim > 0
  std::vector<double> theta_max;

  static FeatureSpec for_instance(const InstanceParams& params);

  int dim() const { return 8 + slots_cm + slots_am + theta_dim; }

  // theta_norm may be null when theta_dim == 0. `pending` adds an order that
  // was just placed (post-decision state); pass {0,0} for plain states.
  void write(const SimEngine::State& state, const Decision& pending,
             const InstanceParams& params, const double* theta_norm,
             float* out) const;
  void write(const SystemState& state, const Decision& pending,
             const InstanceParams& params, const double* theta_norm,
             float* out) const;

  // Normalizes raw parameter values against the stored grid bounds
  // (grid-min -> 0, grid-max -> 1; constant parameters map to 0.5).
  std::vector<double> normalize_theta(const std::vector<double>& raw) const;
};

// Canonical ordering of the instance parameters used wherever parameters
// become features (EPL augmentation, grid bounds).
extern const std::vector<std::string> kThetaNames;
std::vector<double> instance_theta(const InstanceParams& params);

// Where training episodes come from. A fixed instance for per-SKU training;
// the EPL wrapper resamples instance parameters at every episode reset.
class EnvSource {
 public:
  virtual ~EnvSource() = default;
  virtual const FeatureSpec& spec() const = 0;

  struct Episode {
    InstanceParams params;
    std::vector<double> theta_norm;  // empty unless spec().theta_dim > 0
  };
  virtual Episode episode(std::uint64_t seed, long index) const = 0;

  // Bounds of the instance-independent decision enumeration: the largest
  // item budget and the smallest cm batch size any episode can present.
  virtual void decision_bounds(int* budget, int* batch_cm) const = 0;
};

class FixedEnv : public EnvSource {
 public:
  explicit FixedEnv(const InstanceParams& params)
      : params_(params), spec_(FeatureSpec::for_instance(params)) {
    params_.validate();
  }
  const FeatureSpec& spec() const override { return spec_; }
  Episode episode(std::uint64_t, long) const override {
    return {params_, {}};
  }
  void decision_bounds(int* budget, int* batch_cm) const override {
    *budget = params_.max_in_system;
    *batch_cm = params_.batch_cm;
  }

 private:
  InstanceParams params_;
  FeatureSpec spec_;
};

}  // namespace dsinv
