#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dsinv/features.hpp"
#include "dsinv/net.hpp"
#include "dsinv/policy.hpp"
#include "dsinv/sim.hpp"

namespace dsinv {

// The classifier scores a fixed, instance-independent enumeration of
// decisions; per-state feasibility is enforced by masking at decision time.
struct DecisionGrid {
  int budget = 0;
  int batch_cm = 1;
  std::vector<Decision> all;  // lexicographic

  static DecisionGrid build(int budget, int batch_cm);
  int index_of(const Decision& d) const;  // -1 when absent
  int size() const { return static_cast<int>(all.size()); }
};

class ClassifierPolicy : public Policy {
 public:
  ClassifierPolicy(FeatureSpec spec, Mlp net, DecisionGrid grid);

  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "classifier"; }
  void save(std::ostream& out) const override;

  // Hot-path variant; theta_norm may be null when the spec has no theta.
  Decision decide_fast(const SimEngine::State& state, const SimEngine& engine,
                       const double* theta_norm) const;

  const FeatureSpec& spec() const { return spec_; }
  const Mlp& net() const { return net_; }
  const DecisionGrid& grid() const { return grid_; }

 private:
  FeatureSpec spec_;
  Mlp net_;
  DecisionGrid grid_;
};

// Decision source for rollout continuations. `Cache` memoizes classifier
// decisions per state; each worker owns one, so caching never affects
// results, only speed.
struct StateHash {
  std::size_t operator()(const SimEngine::State& s) const;
};
struct StateEq {
  bool operator()(const SimEngine::State& a, const SimEngine::State& b) const;
};
using DecisionCache =
    std::unordered_map<SimEngine::State, Decision, StateHash, StateEq>;

class Continuation {
 public:
  virtual ~Continuation() = default;
  virtual Decision decide(const SimEngine& engine, const SimEngine::State& s,
                          std::uint64_t master, std::uint64_t rep,
                          std::uint64_t period,
                          DecisionCache* cache) const = 0;
};

// Uniform over the feasible set, driven by the scenario stream.
class RandomContinuation : public Continuation {
 public:
  Decision decide(const SimEngine& engine, const SimEngine::State& s,
                  std::uint64_t master, std::uint64_t rep,
                  std::uint64_t period, DecisionCache*) const override {
    return engine.random_feasible(s, master, rep, period);
  }
};

class ClassifierContinuation : public Continuation {
 public:
  ClassifierContinuation(const ClassifierPolicy& policy,
                         const double* theta_norm)
      : policy_(policy), theta_(theta_norm) {}
  Decision decide(const SimEngine& engine, const SimEngine::State& s,
                  std::uint64_t, std::uint64_t, std::uint64_t,
                  DecisionCache* cache) const override;

 private:
  const ClassifierPolicy& policy_;
  const double* theta_;
};

// Mean cumulative cost over `scenarios` common-random-number rollouts of
// length `horizon`, applying `first` at the initial step and the
// continuation policy afterwards. Deterministic in (master, stream_base).
double dcl_rollout_estimate(const SimEngine& engine,
                            const SimEngine::State& start,
                            const Decision& first, const Continuation& pi,
                            int scenarios, int horizon, std::uint64_t master,
                            std::uint64_t stream_base,
                            DecisionCache* cache = nullptr);

struct RolloutConfig {
  int n_iterations = 3;   // approximate policy iteration rounds
  int n_samples = 5000;   // states labelled per round
  int scenarios = 2000;   // exogenous scenarios per state-decision (M)
  int horizon = 500;      // rollout depth (H)
  int warmup = 10;        // steps from the initial state before collecting (L)
  long episode_len = 0;   // >0: reset (and resample parameters) every so many samples
  int validation_reps = 16;
  long validation_periods = 4000;
  long validation_warmup = 500;
  int threads = 1;
};

struct NetConfig {
  std::vector<int> hidden{32, 32};
  AdamConfig adam;
};

struct DclRound {
  std::shared_ptr<ClassifierPolicy> policy;
  double validation_cost = 0.0;
  TrainStats train;
};

struct DclResult {
  std::vector<DclRound> rounds;
  int best = -1;  // round with the lowest simulated validation cost
  const ClassifierPolicy& best_policy() const {
    return *rounds[static_cast<std::size_t>(best)].policy;
  }
};

// Approximate policy iteration with rollout-labelled states and a classifier
// policy. Round 0 rolls out a uniformly random feasible policy.
DclResult dcl_train(const EnvSource& env, const RolloutConfig& config,
                    const NetConfig& net_config, std::uint64_t seed);

// Labels (rollout-argmin decisions) for a batch of states under a fixed
// continuation; exposed for the label-stability check.
std::vector<Decision> dcl_label_states(const SimEngine& engine,
                                       const std::vector<SimEngine::State>& states,
                                       const Continuation& pi, int scenarios,
                                       int horizon, std::uint64_t master,
                                       int threads);

}  // namespace dsinv
