#pragma once

#include <utility>
#include <vector>

#include "dsinv/params.hpp"

namespace dsinv {

// State at the start of a period: operating parts per mode, on-hand stock
// per mode, and the replenishment pipelines. Pipeline slots are ordered
// oldest first: slot 0 arrives at the end of the current period, the last
// slot was ordered one period ago. Lengths are exactly lead_cm / lead_am.
struct SystemState {
  int op_cm = 0;
  int op_am = 0;
  int stock_cm = 0;
  int stock_am = 0;
  std::vector<int> pipe_cm;  // batch counts
  std::vector<int> pipe_am;  // item counts

  bool operator==(const SystemState&) const = default;
};

struct Decision {
  int batches_cm = 0;
  int items_am = 0;

  bool operator==(const Decision&) const = default;
  // Lexicographic (cm batches, am items); the tie-break order used
  // everywhere a single decision must be picked from equals.
  auto operator<=>(const Decision&) const = default;
};

struct FailureRealization {
  int fail_cm = 0;
  int fail_am = 0;
};

struct CostBreakdown {
  double purchase = 0.0;
  double holding = 0.0;
  double backorder = 0.0;
  double maintenance = 0.0;
  double total = 0.0;

  CostBreakdown& operator+=(const CostBreakdown& o);
};

// Items short of the installed base size; demand that is still waiting.
int backorders(const SystemState& state, const InstanceParams& params);

// On-hand stock plus everything in the pipelines minus backorders. May be
// negative when backorders exceed stock plus pipeline.
int inventory_position(const SystemState& state, const InstanceParams& params);

// All (cm batches, am items) pairs whose total item count stays within the
// remaining system budget. Enumerated lexicographically; (0,0) is always
// first.
std::vector<Decision> feasible_decisions(const SystemState& state,
                                         const InstanceParams& params);

// Probability of each failure count k in {0..n} for n installed parts of one
// mode. The untruncated distribution has mean mu*n and variance var*n; all
// mass beyond n is folded into k = n. Poisson when var == mu, negative
// binomial otherwise (r = mean^2/(var-mean), p = mean/var).
std::vector<double> failure_pmf(int n, double mu, double var,
                                DemandFamily family);

// How a period's demand (backorders + new failures) is served: first from
// on-hand stock, then from the orders arriving at the end of the period.
// The mode with the lower failure rate is consumed first within each stage.
struct Allocation {
  int stock_cm = 0;
  int stock_am = 0;
  int arrival_cm = 0;
  int arrival_am = 0;
};

Allocation allocate_replacements(const SystemState& state, int arrivals_cm,
                                 int arrivals_am,
                                 const FailureRealization& failures,
                                 const InstanceParams& params);

// One-period transition given a decision and realized failures. Throws
// std::logic_error if the produced state violates a state invariant (an
// internal bug, never expected at runtime).
SystemState transition(const SystemState& state, const Decision& decision,
                       const FailureRealization& failures,
                       const InstanceParams& params);

// Every successor state with its probability, merged over failure pairs that
// lead to the same state. Probabilities sum to 1.
std::vector<std::pair<SystemState, double>> enumerate_transitions(
    const SystemState& state, const Decision& decision,
    const InstanceParams& params);

// Costs charged in one period: fixed + variable purchase, holding on opening
// stock, backorder on demand left unserved by opening stock, and maintenance
// on the expected number of failures.
CostBreakdown period_cost(const SystemState& state, const Decision& decision,
                          const FailureRealization& failures,
                          const InstanceParams& params);

// Expectation of period_cost over the failure distributions; the immediate
// cost used by the exact solver and the greedy decision rules.
double expected_period_cost(const SystemState& state, const Decision& decision,
                            const InstanceParams& params);

// Throws std::logic_error when a state invariant is violated.
void check_state(const SystemState& state, const InstanceParams& params);

SystemState initial_state(const InstanceParams& params);

// ---------------------------------------------------------------------------
// Single-rate model: cm and am parts are pooled into one failure process
// (rate fields of `params` must match across modes, see simplify_params).
// Both order channels remain, with their own prices and lead times.

struct SimplifiedState {
  int operating = 0;
  int stock = 0;
  std::vector<int> pipe_cm;
  std::vector<int> pipe_am;

  bool operator==(const SimplifiedState&) const = default;
};

int backorders(const SimplifiedState& state, const InstanceParams& params);
int inventory_position(const SimplifiedState& state,
                       const InstanceParams& params);
std::vector<Decision> feasible_decisions(const SimplifiedState& state,
                                         const InstanceParams& params);
SimplifiedState transition(const SimplifiedState& state,
                           const Decision& decision, int failures,
                           const InstanceParams& params);
std::vector<std::pair<SimplifiedState, double>> enumerate_transitions(
    const SimplifiedState& state, const Decision& decision,
    const InstanceParams& params);
CostBreakdown period_cost(const SimplifiedState& state,
                          const Decision& decision, int failures,
                          const InstanceParams& params);
double expected_period_cost(const SimplifiedState& state,
                            const Decision& decision,
                            const InstanceParams& params);
void check_state(const SimplifiedState& state, const InstanceParams& params);
SimplifiedState initial_state_simplified(const InstanceParams& params);

// Projection used when a single-rate policy steers the two-mode system.
SimplifiedState collapse(const SystemState& state);

}  // namespace dsinv
