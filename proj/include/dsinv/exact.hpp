#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/space.hpp"

namespace dsinv {

// Enumerated average-cost MDP over a StateSpace (full two-mode model or the
// pooled single-rate model). Successor lookups exploit that a decision only
// changes the newest pipeline slots: one base transition per failure
// realization serves every decision.
class Model {
 public:
  explicit Model(std::shared_ptr<const StateSpace> space);

  std::size_t size() const { return space_->size(); }
  const StateSpace& space() const { return *space_; }
  const InstanceParams& params() const { return space_->params(); }

  std::vector<Decision> decisions(std::int32_t state) const;
  double cost(std::int32_t state, const Decision& decision) const;

  struct BaseSuccessors {
    std::vector<PackedKey> keys;
    std::vector<double> probs;
  };
  // Successor distribution for the zero order; add pipeline units for other
  // decisions via succ_index.
  void base_successors(std::int32_t state, BaseSuccessors& out) const;
  std::int32_t succ_index(const PackedKey& base,
                          const Decision& decision) const;

  void successors(std::int32_t state, const Decision& decision,
                  std::vector<std::pair<std::int32_t, double>>& out) const;

 private:
  std::shared_ptr<const StateSpace> space_;
  PackedKey unit_cm_;
  PackedKey unit_am_;
};

struct EvalOptions {
  double tol = 1e-9;        // max-norm Bellman residual target
  long max_sweeps = 1'000'000;
  double damping = 0.9;     // weight on the transition step (aperiodicity)
  int threads = 1;
};

struct EvalResult {
  double g = 0.0;
  std::vector<double> v;    // relative values, v[reference] = 0
  long sweeps = 0;
  double residual = 0.0;
  bool converged = false;
};

// Long-run average cost and relative values of a fixed policy by relative
// value iteration. Throws on non-convergence within the sweep cap.
EvalResult policy_evaluation(const Model& model,
                             const std::vector<Decision>& policy,
                             const EvalOptions& opts = {});

// Direct linear solve of the evaluation equations; quadratic memory, meant
// for spaces below ~2000 states (used as a cross-check in tests).
EvalResult policy_evaluation_dense(const Model& model,
                                   const std::vector<Decision>& policy);

struct SolveOptions {
  EvalOptions eval;
  int max_rounds = 500;
  double tie_tol = 1e-9;  // decisions within this of the minimum count as ties
};

struct ExactSolution {
  std::vector<Decision> policy;  // by state ordinal
  double g = 0.0;
  std::vector<double> v;
  std::int32_t reference_state = -1;
  int rounds = 0;
  bool converged = false;
  std::vector<double> g_history;
};

// Average-cost policy iteration starting from the never-order policy.
// Improvement ties break lexicographically on (cm batches, am items).
ExactSolution policy_iteration(const Model& model,
                               const SolveOptions& opts = {});

// Max-norm Bellman optimality residual of a solution (test support).
double bellman_residual(const Model& model, const ExactSolution& solution,
                        int threads = 1);

// Stationary distribution of the chain induced by `policy`. Throws when the
// chain is multichain (more than one closed recurrent class).
std::vector<double> stationary_distribution(const Model& model,
                                            const std::vector<Decision>& policy,
                                            double l1_tol = 1e-10,
                                            long max_iters = 2'000'000);

// Fraction of items sourced through the am channel in steady state.
// Returns 0 when the policy never orders at all.
double steady_state_am_fraction(const Model& model,
                                const ExactSolution& solution);

// Smallest inventory-system cap such that demand over a full cm
// replenishment cycle exceeds it with probability below `epsilon`, assuming
// every installed part fails at the faster mode's rate; never less than the
// expected cycle demand.
int determine_S(const InstanceParams& params, double epsilon);

}  // namespace dsinv
