#include "dsinv/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dsinv/textio.hpp"

namespace dsinv {

std::string to_string(Source source) {
  return source == Source::kCm ? "cm" : "am";
}

namespace {

InstanceParams single_mode_params(const InstanceParams& params, Source source) {
  InstanceParams out = params;
  const double mu = source == Source::kCm ? params.mu_cm : params.mu_am;
  const double var = source == Source::kCm ? params.var_cm : params.var_am;
  out.mu_cm = out.mu_am = mu;
  out.var_cm = out.var_am = var;
  out.family = var > mu ? DemandFamily::kNegativeBinomial
                        : DemandFamily::kPoisson;
  return out;
}

Decision base_stock_order(int ip, int budget, Source source, int level,
                          int batch_cm) {
  const int shortfall = level - ip;
  if (shortfall <= 0 || budget <= 0) return {0, 0};
  Decision want{0, 0};
  if (source == Source::kCm)
    want.batches_cm = (shortfall + batch_cm - 1) / batch_cm;
  else
    want.items_am = shortfall;
  return clamp_decision(want, budget, batch_cm);
}

}  // namespace

Decision BaseStockPolicy::decide(const SystemState& state,
                                 const InstanceParams& params) const {
  const int ip = inventory_position(state, params);
  return base_stock_order(ip, params.max_in_system - ip, source_, level_,
                          params.batch_cm);
}

void BaseStockPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = base-stock\n";
  out << "source = " << to_string(source_) << "\n";
  out << "level = " << level_ << "\n";
}

BspResult bsp_solve(const InstanceParams& params, const BspOptions& opts) {
  BspResult best;
  bool have_best = false;
  for (Source source : {Source::kCm, Source::kAm}) {
    const InstanceParams mode = single_mode_params(params, source);
    std::shared_ptr<const StateSpace> space;
    std::unique_ptr<Model> model;
    if (!opts.simulate) {
      space = std::make_shared<StateSpace>(
          StateSpace::enumerate(mode, ModelKind::kSimplified));
      model = std::make_unique<Model>(space);
    }
    for (int level = 0; level <= params.max_in_system; ++level) {
      double cost;
      if (opts.simulate) {
        BaseStockPolicy rule(source, level);
        cost = estimate_cost(rule, mode, opts.sim).mean;
      } else {
        std::vector<Decision> decisions(space->size());
        for (std::size_t i = 0; i < space->size(); ++i) {
          const SimplifiedState s = space->single_state(i);
          const int ip = inventory_position(s, mode);
          decisions[i] = base_stock_order(ip, mode.max_in_system - ip, source,
                                          level, mode.batch_cm);
        }
        EvalOptions eval = opts.eval;
        eval.threads = opts.threads;
        cost = policy_evaluation(*model, decisions, eval).g;
      }
      if (!have_best || cost < best.cost) {
        best.source = source;
        best.level = level;
        best.cost = cost;
        have_best = true;
      }
    }
  }
  best.policy = std::make_shared<BaseStockPolicy>(best.source, best.level);
  return best;
}

Decision dual_index_decide(const SystemState& state, const DualIndexParams& di,
                           const InstanceParams& params) {
  const int ip = inventory_position(state, params);
  int budget = params.max_in_system - ip;
  if (budget < 0) budget = 0;
  // Expedited position: stock plus everything arriving within the am lead
  // time, net of backorders.
  int expedited = state.stock_cm + state.stock_am - backorders(state, params);
  const int window = std::min(params.lead_am, params.lead_cm);
  for (int i = 0; i < window; ++i)
    expedited += state.pipe_cm[static_cast<std::size_t>(i)] * params.batch_cm;
  for (int v : state.pipe_am) expedited += v;

  Decision d{0, 0};
  d.items_am = std::clamp(di.expedite_level - expedited, 0, budget);
  const int after_am = ip + d.items_am;
  const int shortfall = di.order_level() - after_am;
  if (shortfall > 0) {
    const int batches = (shortfall + params.batch_cm - 1) / params.batch_cm;
    d.batches_cm = batches;
    d = clamp_decision(d, budget, params.batch_cm);
  }
  return d;
}

Decision DualIndexPolicy::decide(const SystemState& state,
                                 const InstanceParams& params) const {
  return dual_index_decide(state, di_, params);
}

void DualIndexPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = dual-index\n";
  out << "expedite_level = " << di_.expedite_level << "\n";
  out << "spread = " << di_.spread << "\n";
}

namespace {

Decision simplified_dual_index(const SimplifiedEngine& engine,
                               const SimplifiedEngine::State& s,
                               const DualIndexParams& di) {
  const int ip = engine.inventory_position(s);
  int budget = engine.params().max_in_system - ip;
  if (budget < 0) budget = 0;
  Decision d{0, 0};
  d.items_am = std::clamp(di.expedite_level - engine.expedited_position(s), 0,
                          budget);
  const int shortfall = di.order_level() - (ip + d.items_am);
  if (shortfall > 0) {
    d.batches_cm =
        (shortfall + engine.params().batch_cm - 1) / engine.params().batch_cm;
    d = clamp_decision(d, budget, engine.params().batch_cm);
  }
  return d;
}

std::vector<double> convolve(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

struct DiSimResult {
  std::vector<double> overshoot_pmf;
  double avg_cost = 0.0;
  double am_ordered = 0.0;
  double total_ordered = 0.0;
};

DiSimResult simulate_dual_index(const InstanceParams& params,
                                const DualIndexParams& di, long periods,
                                long warmup, std::uint64_t master) {
  SimplifiedEngine engine(params);
  SimplifiedEngine::State s = engine.initial();
  DiSimResult out;
  std::vector<long> overshoot;
  double cost = 0.0;
  long counted = 0;
  for (long t = 0; t < periods; ++t) {
    const bool count = t >= warmup;
    if (count) {
      const long over = std::max(
          engine.expedited_position(s) - di.expedite_level, 0);
      if (overshoot.size() <= static_cast<std::size_t>(over))
        overshoot.resize(static_cast<std::size_t>(over) + 1, 0);
      ++overshoot[static_cast<std::size_t>(over)];
    }
    const Decision d = simplified_dual_index(engine, s, di);
    const int k = engine.sample_failures(s, master, 0,
                                         static_cast<std::uint64_t>(t));
    const double c = engine.step(s, d, k);
    if (count) {
      cost += c;
      ++counted;
      out.am_ordered += d.items_am;
      out.total_ordered += d.items_am + d.batches_cm * params.batch_cm;
    }
  }
  out.avg_cost = cost / static_cast<double>(std::max<long>(counted, 1));
  out.overshoot_pmf.assign(overshoot.size(), 0.0);
  for (std::size_t i = 0; i < overshoot.size(); ++i)
    out.overshoot_pmf[i] = static_cast<double>(overshoot[i]) /
                           static_cast<double>(std::max<long>(counted, 1));
  return out;
}

}  // namespace

std::vector<double> dual_index_overshoot(const InstanceParams& single_rate,
                                         int spread, int expedite_level,
                                         long periods, long warmup,
                                         std::uint64_t master) {
  return simulate_dual_index(single_rate, {expedite_level, spread}, periods,
                             warmup, master)
      .overshoot_pmf;
}

DualIndexParams dual_index_solve(const InstanceParams& single_rate,
                                 const DualIndexOptions& opts) {
  if (single_rate.lead_am > single_rate.lead_cm)
    throw std::invalid_argument("dual index expects lead_am <= lead_cm");
  const InstanceParams& p = single_rate;
  const int n = p.installed_base;
  const double fractile =
      p.backorder_cost / (p.backorder_cost + p.holding_cost);

  // Demand over the expedited lead time plus the review period.
  const auto per_period = failure_pmf(n, p.mu_cm, p.var_cm, p.family);
  std::vector<double> lead_demand{1.0};
  for (int t = 0; t < p.lead_am + 1; ++t)
    lead_demand = convolve(lead_demand, per_period);

  auto quantile = [](const std::vector<double>& pmf, int lo, double q) {
    double cum = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      cum += pmf[i];
      if (cum >= q) return static_cast<int>(i) + lo;
    }
    return static_cast<int>(pmf.size()) - 1 + lo;
  };

  const int z_ref = std::clamp(quantile(lead_demand, 0, fractile), 0,
                               p.max_in_system);
  const int gap = p.lead_cm - p.lead_am;
  const double mu_cycle = (gap + 1) * p.mu_cm * n;
  const double sd_cycle = std::sqrt((gap + 1) * p.var_cm * n);
  int spread_max = static_cast<int>(std::ceil(mu_cycle) +
                                    std::ceil(3.0 * sd_cycle));
  spread_max = std::min(spread_max, p.max_in_system);

  DualIndexParams best{};
  double best_cost = 0.0;
  bool have_best = false;
  for (int spread = 0; spread <= spread_max; ++spread) {
    const auto probe = simulate_dual_index(p, {z_ref, spread},
                                           opts.overshoot_periods, opts.warmup,
                                           opts.master);
    // Net demand during the expedited window: lead demand minus overshoot.
    const auto& over = probe.overshoot_pmf;
    const int max_over = static_cast<int>(over.size()) - 1;
    std::vector<double> net(lead_demand.size() + over.size() - 1, 0.0);
    for (std::size_t i = 0; i < lead_demand.size(); ++i)
      for (std::size_t j = 0; j < over.size(); ++j)
        net[i + (static_cast<std::size_t>(max_over) - j)] +=
            lead_demand[i] * over[j];
    const int z =
        std::clamp(quantile(net, -max_over, fractile), 0, p.max_in_system);
    const auto eval = simulate_dual_index(p, {z, spread}, opts.eval_periods,
                                          opts.warmup, opts.master + 1);
    if (!have_best || eval.avg_cost < best_cost) {
      best = {z, spread};
      best_cost = eval.avg_cost;
      have_best = true;
    }
  }
  return best;
}

double gamma_to_rho(double gamma, double mu_cm, double mu_am) {
  const double num = gamma * mu_am;
  const double den = gamma * mu_am + (1.0 - gamma) * mu_cm;
  return den == 0.0 ? 0.0 : num / den;
}

double rho_to_gamma(double rho, double mu_cm, double mu_am) {
  const double num = rho * mu_cm;
  const double den = (1.0 - rho) * mu_am + rho * mu_cm;
  return den == 0.0 ? 0.0 : num / den;
}

IwaResult iwa(const InstanceParams& params, const InnerSolver& inner,
              const PolicyCost& evaluate, const IwaConfig& config) {
  if (!(config.threshold > 0.0) || !(config.threshold < 1.0))
    throw std::invalid_argument("iwa threshold must lie in (0, 1)");
  IwaResult result;
  std::vector<std::shared_ptr<Policy>> policies;
  std::vector<double> gammas{0.0};
  int j = 1;
  while (true) {
    const double gamma = gammas.back();
    const InstanceParams single = simplify_params(params, gamma);
    InnerSolution sol = inner(single);
    const double cost = evaluate(*sol.policy);
    result.trace.push_back({gamma, sol.rho, cost});
    policies.push_back(sol.policy);

    const double next_gamma = rho_to_gamma(sol.rho, params.mu_cm, params.mu_am);
    ++j;
    if (std::abs(next_gamma - gamma) < config.threshold) {
      result.converged = true;
      result.gamma_star = next_gamma;
      result.rho_star = sol.rho;
      result.policy = sol.policy;
      result.cost = cost;
      break;
    }
    bool cycling = false;
    for (std::size_t i = 0; i + 1 < gammas.size(); ++i)
      if (std::abs(gammas[i] - next_gamma) < config.cycle_tol) cycling = true;
    gammas.push_back(next_gamma);
    if (cycling || j > config.max_iterations) {
      result.converged = false;
      std::size_t best = 0;
      for (std::size_t i = 1; i < result.trace.size(); ++i)
        if (result.trace[i].cost < result.trace[best].cost) best = i;
      result.gamma_star = result.trace[best].gamma;
      result.rho_star = result.trace[best].rho;
      result.policy = policies[best];
      result.cost = result.trace[best].cost;
      break;
    }
  }
  result.iterations = j;
  return result;
}

InnerSolution exact_inner_solver(const InstanceParams& single_rate,
                                 const EvalOptions& eval) {
  auto space = std::make_shared<StateSpace>(
      StateSpace::enumerate(single_rate, ModelKind::kSimplified));
  Model model(space);
  SolveOptions opts;
  opts.eval = eval;
  ExactSolution sol = policy_iteration(model, opts);
  InnerSolution out;
  out.rho = steady_state_am_fraction(model, sol);
  out.policy = std::make_shared<PooledTabularPolicy>(space,
                                                     std::move(sol.policy),
                                                     sol.g);
  return out;
}

InnerSolution dual_index_inner_solver(const InstanceParams& single_rate,
                                      const DualIndexOptions& opts) {
  const DualIndexParams di = dual_index_solve(single_rate, opts);
  const auto run = simulate_dual_index(single_rate, di, opts.eval_periods,
                                       opts.warmup, opts.master + 2);
  InnerSolution out;
  out.policy = std::make_shared<DualIndexPolicy>(di);
  out.rho = run.total_ordered == 0.0 ? 0.0 : run.am_ordered / run.total_ordered;
  return out;
}

}  // namespace dsinv
