#include "doctest.h"

#include <cmath>
#include <memory>

#include "dsinv/exact.hpp"
#include "dsinv/io.hpp"
#include "dsinv/policy.hpp"
#include "dsinv/sim.hpp"

using namespace dsinv;

namespace {

InstanceParams micro() {
  InstanceParams p;
  p.installed_base = 2;
  p.max_in_system = 2;
  p.mu_cm = 0.05;
  p.mu_am = 0.1;
  p.var_cm = 0.05;
  p.var_am = 0.1;
  p.lead_cm = 2;
  p.lead_am = 1;
  p.price_cm = 5000;
  p.price_am = 10000;
  p.order_cost_cm = 2000;
  p.order_cost_am = 0;
  p.batch_cm = 1;
  p.maint_cost = 5000;
  p.holding_cost = 29;
  p.backorder_cost = 5725;
  p.family = DemandFamily::kPoisson;
  return p;
}

std::shared_ptr<const StateSpace> enumerate_shared(const InstanceParams& p,
                                                   ModelKind kind) {
  return std::make_shared<StateSpace>(StateSpace::enumerate(p, kind));
}

// Independent oracle: relative value iteration directly on the optimality
// operator (min over decisions), no policy iteration involved.
double rvi_min_oracle(const Model& model, long sweeps, double tol) {
  const std::size_t n = model.size();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  const double tau = 0.9;
  const auto ref = static_cast<std::size_t>(model.space().reference_index());
  double g = 0.0;
  std::vector<std::pair<std::int32_t, double>> succ;
  for (long sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = 0.0;
      bool first = true;
      for (const Decision& d : model.decisions(static_cast<std::int32_t>(i))) {
        model.successors(static_cast<std::int32_t>(i), d, succ);
        double q = model.cost(static_cast<std::int32_t>(i), d);
        double pv = 0.0;
        for (const auto& [j, prob] : succ)
          pv += prob * v[static_cast<std::size_t>(j)];
        q += tau * pv + (1.0 - tau) * v[i];
        if (first || q < best) best = q;
        first = false;
      }
      next[i] = best;
    }
    double lo = next[0] - v[0], hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      const double d = next[i] - v[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    g = 0.5 * (lo + hi);
    const double center = next[ref];
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] - center;
    if (hi - lo < tol) break;
  }
  return g;
}

}  // namespace

TEST_CASE("policy iteration matches the value-iteration oracle (micro)") {
  const auto p = micro();
  Model model(enumerate_shared(p, ModelKind::kFull));
  SolveOptions opts;
  auto sol = policy_iteration(model, opts);
  REQUIRE(sol.converged);
  const double oracle_g = rvi_min_oracle(model, 100'000, 1e-10);
  CHECK(std::abs(sol.g - oracle_g) < 1e-6);
  CHECK(bellman_residual(model, sol) <= 1e-9);
  // Monotone improvement along the way.
  for (std::size_t i = 1; i < sol.g_history.size(); ++i)
    CHECK(sol.g_history[i] <= sol.g_history[i - 1] + 1e-9);
}

TEST_CASE("dense and iterative evaluation agree") {
  const auto p = micro();
  Model model(enumerate_shared(p, ModelKind::kFull));
  auto sol = policy_iteration(model);
  const auto dense = policy_evaluation_dense(model, sol.policy);
  const auto rvi = policy_evaluation(model, sol.policy);
  CHECK(std::abs(dense.g - rvi.g) < 1e-7);
  CHECK(dense.residual < 1e-8);
  for (std::size_t i = 0; i < dense.v.size(); ++i)
    CHECK(std::abs(dense.v[i] - rvi.v[i]) < 1e-6);
}

TEST_CASE("never-order policy is absorbed into full backorder cost") {
  const auto p = micro();
  Model model(enumerate_shared(p, ModelKind::kFull));
  std::vector<Decision> never(model.size(), Decision{0, 0});
  const auto eval = policy_evaluation(model, never);
  // All parts eventually fail and stay backordered: only the backorder cost
  // persists; no maintenance accrues with nothing operating.
  CHECK(eval.g ==
        doctest::Approx(p.backorder_cost * p.installed_base).epsilon(1e-8));
}

TEST_CASE("evaluation matches simulation within three standard errors") {
  const auto p = micro();
  auto space = enumerate_shared(p, ModelKind::kFull);
  Model model(space);
  auto sol = policy_iteration(model);
  TabularPolicy policy(space, sol.policy, sol.g);
  EstimateOptions opts;
  opts.replications = 60;
  opts.periods = 20'000;
  opts.warmup = 1'000;
  opts.master = 17;
  const auto est = estimate_cost(policy, p, opts);
  const double se = est.half_width / 1.959963984540054;
  CHECK(std::abs(est.mean - sol.g) <= 3.0 * se);
}

TEST_CASE("cost scaling scales g and keeps the argmin decisions") {
  const auto p = micro();
  Model model(enumerate_shared(p, ModelKind::kFull));
  auto sol = policy_iteration(model);
  InstanceParams scaled = p;
  const double lambda = 3.5;
  scaled.price_cm *= lambda;
  scaled.price_am *= lambda;
  scaled.order_cost_cm *= lambda;
  scaled.order_cost_am *= lambda;
  scaled.maint_cost *= lambda;
  scaled.holding_cost *= lambda;
  scaled.backorder_cost *= lambda;
  Model model2(enumerate_shared(scaled, ModelKind::kFull));
  auto sol2 = policy_iteration(model2);
  CHECK(sol2.g == doctest::Approx(lambda * sol.g).epsilon(1e-8));
  for (std::size_t i = 0; i < sol.policy.size(); ++i)
    CHECK(sol.policy[i] == sol2.policy[i]);
}

TEST_CASE("pooled model equals the full model when the modes coincide") {
  InstanceParams p = micro();
  p.mu_am = p.mu_cm;
  p.var_am = p.var_cm;
  p.price_am = p.price_cm;
  p.order_cost_am = p.order_cost_cm;
  p.lead_am = p.lead_cm;
  p.batch_cm = 1;
  Model full(enumerate_shared(p, ModelKind::kFull));
  Model pooled(enumerate_shared(p, ModelKind::kSimplified));
  const auto sol_full = policy_iteration(full);
  const auto sol_pooled = policy_iteration(pooled);
  CHECK(sol_full.g == doctest::Approx(sol_pooled.g).epsilon(1e-7));
}

TEST_CASE("steady-state am fraction: boundary policies") {
  const auto p = micro();
  auto space = enumerate_shared(p, ModelKind::kSimplified);
  Model model(space);
  // Order-up-to rules through a single channel keep the chain unichain.
  std::vector<Decision> cm_only(model.size()), am_only(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto s = space->single_state(i);
    const int budget = p.max_in_system - inventory_position(s, p);
    cm_only[i] = {budget > 0 ? 1 : 0, 0};
    am_only[i] = {0, budget > 0 ? 1 : 0};
  }
  ExactSolution sol;
  sol.policy = cm_only;
  CHECK(steady_state_am_fraction(model, sol) == doctest::Approx(0.0));
  sol.policy = am_only;
  CHECK(steady_state_am_fraction(model, sol) == doctest::Approx(1.0));
}

TEST_CASE("steady-state am fraction matches a long simulation") {
  const auto p = micro();
  auto space = enumerate_shared(p, ModelKind::kSimplified);
  Model model(space);
  auto sol = policy_iteration(model);
  const double rho = steady_state_am_fraction(model, sol);
  CHECK(rho >= 0.0);
  CHECK(rho <= 1.0);
  // Simulate the pooled system under the same policy and count orders.
  SimplifiedEngine engine(p);
  SimplifiedEngine::State s = engine.initial();
  double am = 0.0, total = 0.0;
  const long periods = 400'000;
  for (long t = 0; t < periods; ++t) {
    const auto idx = space->index(engine.to_state(s));
    REQUIRE(idx >= 0);
    const Decision d = sol.policy[static_cast<std::size_t>(idx)];
    const int k = engine.sample_failures(s, 31, 0, static_cast<std::uint64_t>(t));
    engine.step(s, d, k);
    if (t > 2000) {
      am += d.items_am;
      total += d.items_am + d.batches_cm * p.batch_cm;
    }
  }
  if (total > 0) {
    const double rho_sim = am / total;
    CHECK(std::abs(rho_sim - rho) < 0.02);
  }
}

TEST_CASE("determine_S follows the cycle-demand tail") {
  const auto p1 = load_instance("synthetic-01").params;
  const int s = determine_S(p1, 1e-4);
  CHECK(s >= 6);
  CHECK(s <= 9);

  // Brute-force tail summation oracle for the same demand model.
  const double lambda =
      (p1.lead_cm + 1) * p1.installed_base * std::max(p1.mu_cm, p1.mu_am);
  double pk = std::exp(-lambda);
  double cdf = pk;
  int oracle = 0;
  while (1.0 - cdf >= 1e-4) {
    ++oracle;
    pk *= lambda / oracle;
    cdf += pk;
  }
  oracle = std::max(oracle, static_cast<int>(std::ceil(lambda)));
  CHECK(s == oracle);

  // Epsilon near one leaves only the expected-demand floor.
  CHECK(determine_S(p1, 0.999999) ==
        static_cast<int>(std::ceil(lambda)));
}
