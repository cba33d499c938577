#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/policy.hpp"
#include "dsinv/rng.hpp"

namespace dsinv {

inline constexpr int kMaxLead = 64;

// Flat state plus precomputed demand tables: the inner loop of every
// Monte-Carlo estimate and rollout. Draws are addressed by
// (master, replication, period), so two policies simulated with the same
// coordinates face identical failure scenarios.
class SimEngine {
 public:
  explicit SimEngine(const InstanceParams& params);

  struct State {
    int op_cm = 0, op_am = 0;
    int stock_cm = 0, stock_am = 0;
    std::array<std::uint16_t, kMaxLead> pipe_cm{};
    std::array<std::uint16_t, kMaxLead> pipe_am{};
  };

  const InstanceParams& params() const { return params_; }
  State initial() const;
  State from_system(const SystemState& s) const;
  SystemState to_system(const State& s) const;

  int inventory_position(const State& s) const;
  int budget(const State& s) const { return params_.max_in_system - inventory_position(s); }
  int backorders(const State& s) const {
    return params_.installed_base - s.op_cm - s.op_am;
  }

  FailureRealization sample_failures(const State& s, std::uint64_t master,
                                     std::uint64_t rep,
                                     std::uint64_t period) const;

  // Applies one period (decision must be feasible); returns the period cost
  // and advances the state.
  double step(State& s, const Decision& d, const FailureRealization& k,
              CostBreakdown* breakdown = nullptr) const;

  // Number of feasible decisions and the i-th one in lexicographic order.
  int decision_count(int budget) const;
  Decision decision_at(int budget, int index) const;
  Decision random_feasible(const State& s, std::uint64_t master,
                           std::uint64_t rep, std::uint64_t period) const;

 private:
  InstanceParams params_;
  std::vector<std::vector<double>> cdf_cm_;  // by operating count
  std::vector<std::vector<double>> cdf_am_;
};

// Counterpart of SimEngine for the pooled single-rate model; used by the
// dual-index search and by heuristics that measure order fractions.
class SimplifiedEngine {
 public:
  explicit SimplifiedEngine(const InstanceParams& params);

  struct State {
    int operating = 0;
    int stock = 0;
    std::array<std::uint16_t, kMaxLead> pipe_cm{};
    std::array<std::uint16_t, kMaxLead> pipe_am{};
  };

  const InstanceParams& params() const { return params_; }
  State initial() const;
  SimplifiedState to_state(const State& s) const;
  int inventory_position(const State& s) const;
  int budget(const State& s) const {
    return params_.max_in_system - inventory_position(s);
  }
  int backorders(const State& s) const {
    return params_.installed_base - s.operating;
  }
  // Inventory position counting only pipeline orders that arrive within the
  // expedited lead time.
  int expedited_position(const State& s) const;

  int sample_failures(const State& s, std::uint64_t master, std::uint64_t rep,
                      std::uint64_t period) const;
  double step(State& s, const Decision& d, int failures,
              CostBreakdown* breakdown = nullptr) const;

 private:
  InstanceParams params_;
  std::vector<std::vector<double>> cdf_;
};

struct EpisodeStats {
  CostBreakdown cost;  // totals over the counted periods
  long periods = 0;
  long orders_cm = 0;  // batches ordered
  long orders_am = 0;  // items ordered
  double am_fraction_installed = 0.0;  // time average of am share
  std::vector<long> order_hist_cm;     // count by order size (batches), size >= 1
  std::vector<long> order_hist_am;     // count by order size (items)
};

// Replays the per-period event sequence under `policy` for `periods`
// periods, accumulating statistics after `warmup`. Deterministic in
// (policy, params, master, replication).
EpisodeStats simulate_episode(const Policy& policy,
                              const InstanceParams& params, long periods,
                              long warmup, std::uint64_t master,
                              std::uint64_t replication = 0);

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 95% confidence, normal approximation
  int replications = 0;
};

struct EstimateOptions {
  int replications = 200;
  long periods = 10'000;
  long warmup = 1'000;
  std::uint64_t master = 1;
  int threads = 1;
};

// Mean cost per period across independent replications.
Estimate estimate_cost(const Policy& policy, const InstanceParams& params,
                       const EstimateOptions& opts,
                       std::vector<EpisodeStats>* stats = nullptr);

// Paired (common-random-number) estimate of cost(a) - cost(b).
Estimate paired_difference(const Policy& a, const Policy& b,
                           const InstanceParams& params,
                           const EstimateOptions& opts);

// (v_pi - v_star) / v_star * 100. Rejects v_star <= 0.
double optimality_gap(double v_pi, double v_star);

struct BreakdownRow {
  Estimate purchase, holding, backorder, maintenance;
  double am_fraction = 0.0;
  std::vector<double> order_freq_cm;  // frequency by order size
  std::vector<double> order_freq_am;
};

// Per-category per-period means with confidence intervals over episodes.
BreakdownRow breakdown_report(const std::vector<EpisodeStats>& stats);

}  // namespace dsinv
