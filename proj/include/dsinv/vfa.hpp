#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsinv/features.hpp"
#include "dsinv/policy.hpp"

namespace dsinv {

// Exact recursive least squares (no forgetting). With a large prior scale
// the fitted weights coincide with the batch least-squares solution.
class RecursiveLeastSquares {
 public:
  explicit RecursiveLeastSquares(int dim, double prior_scale = 1e8);
  void update(const double* x, double y);
  double predict(const double* x) const;
  const std::vector<double>& weights() const { return w_; }
  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<double> w_;
  std::vector<double> p_;  // covariance, row-major dim x dim
  std::vector<double> k_, px_;
};

// Value function approximation: linear in the features plus an intercept.
struct LinearVfa {
  FeatureSpec spec;
  std::vector<double> weights;  // spec.dim() + 1, intercept last

  double value(const float* features) const;
};

struct AviConfig {
  int samples = 2000;       // total forward-pass steps
  int horizon = 250;        // episode length between resets
  double epsilon = 0.1;     // exploration probability
  double discount = 0.99;   // proxy discount for the average-cost objective
  double weight_bound = 1e12;
  double rls_prior = 1e8;
  std::uint64_t seed = 1;
};

// Forward-pass approximate value iteration on post-decision states with
// epsilon-greedy exploration and recursive-least-squares updates. Throws if
// any weight exceeds the magnitude bound (divergence guard).
LinearVfa avi_train(const EnvSource& env, const AviConfig& config);

// Greedy one-step lookahead against the fitted value function:
// argmin over feasible decisions of expected immediate cost plus the
// discounted value of the post-decision state. Lexicographic tie-break.
Decision vfa_greedy_decide(const SystemState& state, const LinearVfa& vfa,
                           const InstanceParams& params,
                           const std::vector<double>& theta_norm = {},
                           double discount = 0.99);

class VfaPolicy : public Policy {
 public:
  VfaPolicy(LinearVfa vfa, double discount = 0.99)
      : vfa_(std::move(vfa)), discount_(discount) {}

  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "vfa-greedy"; }
  void save(std::ostream& out) const override;

  const LinearVfa& vfa() const { return vfa_; }
  double discount() const { return discount_; }

 private:
  LinearVfa vfa_;
  double discount_;
};

}  // namespace dsinv
