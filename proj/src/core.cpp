#include "dsinv/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dsinv {

namespace {

constexpr double kPmfCutoff = 1e-30;

void require(bool ok, const char* msg) {
  if (!ok) throw std::logic_error(std::string("state contract violated: ") + msg);
}

// Untruncated pmf values by upward recurrence, plus the survival mass from
// `n` on, summed term by term so no 1 - cdf cancellation occurs.
std::vector<double> truncated_pmf(int n, double mean, double var,
                                  DemandFamily family) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (n == 0) {
    pmf[0] = 1.0;
    return pmf;
  }
  const bool poisson =
      family == DemandFamily::kPoisson || var <= mean * (1.0 + 1e-12);
  double r = 0.0, q = 0.0;  // negative binomial parameters (q = 1 - p)
  if (!poisson) {
    r = mean * mean / (var - mean);
    q = 1.0 - mean / var;
  }
  auto step = [&](int k, double pk) {
    // p(k+1) from p(k)
    return poisson ? pk * mean / (k + 1)
                   : pk * (k + r) / (k + 1) * q;
  };
  double pk = poisson ? std::exp(-mean) : std::pow(1.0 - q, r);
  double below = 0.0;
  for (int k = 0; k < n; ++k) {
    pmf[static_cast<std::size_t>(k)] = pk;
    below += pk;
    pk = step(k, pk);
  }
  // Tail mass folded into k = n.
  double tail = 0.0;
  for (int k = n; pk > kPmfCutoff || k < n + 4; ++k) {
    tail += pk;
    pk = step(k, pk);
    if (k > n + 100000) break;
  }
  pmf[static_cast<std::size_t>(n)] = std::min(tail, std::max(0.0, 1.0 - below));
  return pmf;
}

}  // namespace

CostBreakdown& CostBreakdown::operator+=(const CostBreakdown& o) {
  purchase += o.purchase;
  holding += o.holding;
  backorder += o.backorder;
  maintenance += o.maintenance;
  total += o.total;
  return *this;
}

int backorders(const SystemState& state, const InstanceParams& params) {
  return params.installed_base - state.op_cm - state.op_am;
}

int inventory_position(const SystemState& state, const InstanceParams& params) {
  int pipeline = 0;
  for (int batches : state.pipe_cm) pipeline += batches * params.batch_cm;
  for (int items : state.pipe_am) pipeline += items;
  return state.stock_cm + state.stock_am + pipeline -
         backorders(state, params);
}

namespace {

std::vector<Decision> decisions_for_budget(int budget, int batch) {
  std::vector<Decision> out;
  if (budget < 0) budget = 0;
  for (int bc = 0; bc * batch <= budget; ++bc)
    for (int ia = 0; bc * batch + ia <= budget; ++ia)
      out.push_back({bc, ia});
  return out;
}

}  // namespace

std::vector<Decision> feasible_decisions(const SystemState& state,
                                         const InstanceParams& params) {
  return decisions_for_budget(
      params.max_in_system - inventory_position(state, params),
      params.batch_cm);
}

std::vector<double> failure_pmf(int n, double mu, double var,
                                DemandFamily family) {
  if (n < 0) throw std::invalid_argument("failure_pmf: n must be >= 0");
  if (family == DemandFamily::kNegativeBinomial && var < mu)
    throw std::invalid_argument(
        "failure_pmf: negative binomial requires var >= mu");
  return truncated_pmf(n, mu * n, var * n, family);
}

Allocation allocate_replacements(const SystemState& state, int arrivals_cm,
                                 int arrivals_am,
                                 const FailureRealization& failures,
                                 const InstanceParams& params) {
  int demand = backorders(state, params) + failures.fail_cm + failures.fail_am;
  // Parts with the lower failure rate are installed first; on-hand stock is
  // always consumed before the arrivals of this period.
  const bool cm_first = params.mu_cm <= params.mu_am;
  const int s1 = cm_first ? state.stock_cm : state.stock_am;
  const int s2 = cm_first ? state.stock_am : state.stock_cm;
  const int a1 = cm_first ? arrivals_cm : arrivals_am;
  const int a2 = cm_first ? arrivals_am : arrivals_cm;
  const int u1 = std::min(demand, s1);
  demand -= u1;
  const int u2 = std::min(demand, s2);
  demand -= u2;
  const int v1 = std::min(demand, a1);
  demand -= v1;
  const int v2 = std::min(demand, a2);
  Allocation alloc;
  alloc.stock_cm = cm_first ? u1 : u2;
  alloc.stock_am = cm_first ? u2 : u1;
  alloc.arrival_cm = cm_first ? v1 : v2;
  alloc.arrival_am = cm_first ? v2 : v1;
  return alloc;
}

SystemState transition(const SystemState& state, const Decision& decision,
                       const FailureRealization& failures,
                       const InstanceParams& params) {
  const int arrivals_cm = state.pipe_cm.front() * params.batch_cm;
  const int arrivals_am = state.pipe_am.front();
  const Allocation a =
      allocate_replacements(state, arrivals_cm, arrivals_am, failures, params);

  SystemState next;
  next.op_cm = state.op_cm - failures.fail_cm + a.stock_cm + a.arrival_cm;
  next.op_am = state.op_am - failures.fail_am + a.stock_am + a.arrival_am;
  next.stock_cm = state.stock_cm + arrivals_cm - a.stock_cm - a.arrival_cm;
  next.stock_am = state.stock_am + arrivals_am - a.stock_am - a.arrival_am;
  next.pipe_cm.assign(state.pipe_cm.begin() + 1, state.pipe_cm.end());
  next.pipe_cm.push_back(decision.batches_cm);
  next.pipe_am.assign(state.pipe_am.begin() + 1, state.pipe_am.end());
  next.pipe_am.push_back(decision.items_am);
  check_state(next, params);
  return next;
}

std::vector<std::pair<SystemState, double>> enumerate_transitions(
    const SystemState& state, const Decision& decision,
    const InstanceParams& params) {
  const auto pmf_cm =
      failure_pmf(state.op_cm, params.mu_cm, params.var_cm, params.family);
  const auto pmf_am =
      failure_pmf(state.op_am, params.mu_am, params.var_am, params.family);
  std::map<SystemState, double, decltype([](const SystemState& x,
                                            const SystemState& y) {
    return std::tie(x.op_cm, x.op_am, x.stock_cm, x.stock_am, x.pipe_cm,
                    x.pipe_am) < std::tie(y.op_cm, y.op_am, y.stock_cm,
                                          y.stock_am, y.pipe_cm, y.pipe_am);
  })>
      merged;
  for (int kc = 0; kc <= state.op_cm; ++kc) {
    for (int ka = 0; ka <= state.op_am; ++ka) {
      const double p = pmf_cm[kc] * pmf_am[ka];
      if (p == 0.0) continue;
      merged[transition(state, decision, {kc, ka}, params)] += p;
    }
  }
  return {merged.begin(), merged.end()};
}

CostBreakdown period_cost(const SystemState& state, const Decision& decision,
                          const FailureRealization& failures,
                          const InstanceParams& params) {
  CostBreakdown c;
  c.purchase = (decision.batches_cm > 0 ? params.order_cost_cm : 0.0) +
               (decision.items_am > 0 ? params.order_cost_am : 0.0) +
               params.price_cm * decision.batches_cm * params.batch_cm +
               params.price_am * decision.items_am;
  c.holding = params.holding_cost * (state.stock_cm + state.stock_am);
  const int unserved = failures.fail_cm + failures.fail_am +
                       backorders(state, params) - state.stock_cm -
                       state.stock_am;
  c.backorder = params.backorder_cost * std::max(unserved, 0);
  c.maintenance = params.maint_cost *
                  (params.mu_cm * state.op_cm + params.mu_am * state.op_am);
  c.total = c.purchase + c.holding + c.backorder + c.maintenance;
  return c;
}

namespace {

// E[max(K - slack, 0)] for a pmf over {0..n}.
double expected_excess(const std::vector<double>& pmf, int slack) {
  double e = 0.0;
  for (int k = std::max(slack + 1, 0); k < static_cast<int>(pmf.size()); ++k)
    e += pmf[static_cast<std::size_t>(k)] * (k - slack);
  return e;
}

}  // namespace

double expected_period_cost(const SystemState& state, const Decision& decision,
                            const InstanceParams& params) {
  CostBreakdown c = period_cost(state, decision, {0, 0}, params);
  double base = c.total - c.backorder;
  const auto pmf_cm =
      failure_pmf(state.op_cm, params.mu_cm, params.var_cm, params.family);
  const auto pmf_am =
      failure_pmf(state.op_am, params.mu_am, params.var_am, params.family);
  const int slack = state.stock_cm + state.stock_am - backorders(state, params);
  // Convolve the two failure counts, then take the expected shortfall.
  std::vector<double> conv(pmf_cm.size() + pmf_am.size() - 1, 0.0);
  for (std::size_t i = 0; i < pmf_cm.size(); ++i)
    for (std::size_t j = 0; j < pmf_am.size(); ++j)
      conv[i + j] += pmf_cm[i] * pmf_am[j];
  return base + params.backorder_cost * expected_excess(conv, slack);
}

void check_state(const SystemState& state, const InstanceParams& params) {
  require(state.op_cm >= 0 && state.op_am >= 0, "negative operating count");
  require(state.op_cm + state.op_am <= params.installed_base,
          "operating parts exceed installed base");
  require(state.stock_cm >= 0 && state.stock_am >= 0, "negative stock");
  require(state.pipe_cm.size() == static_cast<std::size_t>(params.lead_cm),
          "cm pipeline length");
  require(state.pipe_am.size() == static_cast<std::size_t>(params.lead_am),
          "am pipeline length");
  for (int v : state.pipe_cm) require(v >= 0, "negative cm pipeline slot");
  for (int v : state.pipe_am) require(v >= 0, "negative am pipeline slot");
  require(inventory_position(state, params) <= params.max_in_system,
          "inventory position above cap");
  require(state.stock_cm + state.stock_am == 0 ||
              backorders(state, params) == 0,
          "stock on hand while demand is backordered");
}

SystemState initial_state(const InstanceParams& params) {
  SystemState s;
  // All parts from the mode that is installed first, no stock, no orders.
  if (params.mu_cm <= params.mu_am)
    s.op_cm = params.installed_base;
  else
    s.op_am = params.installed_base;
  s.pipe_cm.assign(static_cast<std::size_t>(params.lead_cm), 0);
  s.pipe_am.assign(static_cast<std::size_t>(params.lead_am), 0);
  return s;
}

// --------------------------------------------------------------------------
// Single-rate model.

int backorders(const SimplifiedState& state, const InstanceParams& params) {
  return params.installed_base - state.operating;
}

int inventory_position(const SimplifiedState& state,
                       const InstanceParams& params) {
  int pipeline = 0;
  for (int batches : state.pipe_cm) pipeline += batches * params.batch_cm;
  for (int items : state.pipe_am) pipeline += items;
  return state.stock + pipeline - backorders(state, params);
}

std::vector<Decision> feasible_decisions(const SimplifiedState& state,
                                         const InstanceParams& params) {
  return decisions_for_budget(
      params.max_in_system - inventory_position(state, params),
      params.batch_cm);
}

SimplifiedState transition(const SimplifiedState& state,
                           const Decision& decision, int failures,
                           const InstanceParams& params) {
  const int arrivals =
      state.pipe_cm.front() * params.batch_cm + state.pipe_am.front();
  const int demand = backorders(state, params) + failures;
  const int installed = std::min(demand, state.stock + arrivals);
  SimplifiedState next;
  next.operating = state.operating - failures + installed;
  next.stock = state.stock + arrivals - installed;
  next.pipe_cm.assign(state.pipe_cm.begin() + 1, state.pipe_cm.end());
  next.pipe_cm.push_back(decision.batches_cm);
  next.pipe_am.assign(state.pipe_am.begin() + 1, state.pipe_am.end());
  next.pipe_am.push_back(decision.items_am);
  check_state(next, params);
  return next;
}

std::vector<std::pair<SimplifiedState, double>> enumerate_transitions(
    const SimplifiedState& state, const Decision& decision,
    const InstanceParams& params) {
  const auto pmf = failure_pmf(state.operating, params.mu_cm, params.var_cm,
                               params.family);
  std::vector<std::pair<SimplifiedState, double>> out;
  out.reserve(pmf.size());
  for (int k = 0; k <= state.operating; ++k) {
    if (pmf[static_cast<std::size_t>(k)] == 0.0) continue;
    out.emplace_back(transition(state, decision, k, params),
                     pmf[static_cast<std::size_t>(k)]);
  }
  return out;
}

CostBreakdown period_cost(const SimplifiedState& state,
                          const Decision& decision, int failures,
                          const InstanceParams& params) {
  CostBreakdown c;
  c.purchase = (decision.batches_cm > 0 ? params.order_cost_cm : 0.0) +
               (decision.items_am > 0 ? params.order_cost_am : 0.0) +
               params.price_cm * decision.batches_cm * params.batch_cm +
               params.price_am * decision.items_am;
  c.holding = params.holding_cost * state.stock;
  const int unserved = failures + backorders(state, params) - state.stock;
  c.backorder = params.backorder_cost * std::max(unserved, 0);
  c.maintenance = params.maint_cost * params.mu_cm * state.operating;
  c.total = c.purchase + c.holding + c.backorder + c.maintenance;
  return c;
}

double expected_period_cost(const SimplifiedState& state,
                            const Decision& decision,
                            const InstanceParams& params) {
  CostBreakdown c = period_cost(state, decision, 0, params);
  const auto pmf = failure_pmf(state.operating, params.mu_cm, params.var_cm,
                               params.family);
  const int slack = state.stock - backorders(state, params);
  return c.total - c.backorder +
         params.backorder_cost * expected_excess(pmf, slack);
}

void check_state(const SimplifiedState& state, const InstanceParams& params) {
  require(state.operating >= 0 &&
              state.operating <= params.installed_base,
          "operating count out of range");
  require(state.stock >= 0, "negative stock");
  require(state.pipe_cm.size() == static_cast<std::size_t>(params.lead_cm),
          "cm pipeline length");
  require(state.pipe_am.size() == static_cast<std::size_t>(params.lead_am),
          "am pipeline length");
  for (int v : state.pipe_cm) require(v >= 0, "negative cm pipeline slot");
  for (int v : state.pipe_am) require(v >= 0, "negative am pipeline slot");
  require(inventory_position(state, params) <= params.max_in_system,
          "inventory position above cap");
  require(state.stock == 0 || backorders(state, params) == 0,
          "stock on hand while demand is backordered");
}

SimplifiedState initial_state_simplified(const InstanceParams& params) {
  SimplifiedState s;
  s.operating = params.installed_base;
  s.pipe_cm.assign(static_cast<std::size_t>(params.lead_cm), 0);
  s.pipe_am.assign(static_cast<std::size_t>(params.lead_am), 0);
  return s;
}

SimplifiedState collapse(const SystemState& state) {
  SimplifiedState s;
  s.operating = state.op_cm + state.op_am;
  s.stock = state.stock_cm + state.stock_am;
  s.pipe_cm = state.pipe_cm;
  s.pipe_am = state.pipe_am;
  return s;
}

}  // namespace dsinv
