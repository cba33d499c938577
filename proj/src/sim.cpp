#include "dsinv/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsinv/parallel.hpp"

namespace dsinv {

namespace {

std::vector<std::vector<double>> build_cdfs(int n_max, double mu, double var,
                                            DemandFamily family) {
  std::vector<std::vector<double>> cdfs(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    auto pmf = failure_pmf(n, mu, var, family);
    double cum = 0.0;
    for (double& p : pmf) {
      cum += p;
      p = cum;
    }
    pmf.back() = 1.0;  // guard against rounding in the last slot
    cdfs[static_cast<std::size_t>(n)] = std::move(pmf);
  }
  return cdfs;
}

int sample_from_cdf(const std::vector<double>& cdf, double u) {
  int k = 0;
  const int last = static_cast<int>(cdf.size()) - 1;
  while (k < last && u >= cdf[static_cast<std::size_t>(k)]) ++k;
  return k;
}

}  // namespace

SimEngine::SimEngine(const InstanceParams& params) : params_(params) {
  params_.validate();
  if (params_.lead_cm > kMaxLead || params_.lead_am > kMaxLead)
    throw std::invalid_argument("lead time exceeds simulator limit");
  cdf_cm_ = build_cdfs(params_.installed_base, params_.mu_cm, params_.var_cm,
                       params_.family);
  cdf_am_ = build_cdfs(params_.installed_base, params_.mu_am, params_.var_am,
                       params_.family);
}

SimEngine::State SimEngine::initial() const {
  return from_system(initial_state(params_));
}

SimEngine::State SimEngine::from_system(const SystemState& s) const {
  State out;
  out.op_cm = s.op_cm;
  out.op_am = s.op_am;
  out.stock_cm = s.stock_cm;
  out.stock_am = s.stock_am;
  for (std::size_t i = 0; i < s.pipe_cm.size(); ++i)
    out.pipe_cm[i] = static_cast<std::uint16_t>(s.pipe_cm[i]);
  for (std::size_t i = 0; i < s.pipe_am.size(); ++i)
    out.pipe_am[i] = static_cast<std::uint16_t>(s.pipe_am[i]);
  return out;
}

SystemState SimEngine::to_system(const State& s) const {
  SystemState out;
  out.op_cm = s.op_cm;
  out.op_am = s.op_am;
  out.stock_cm = s.stock_cm;
  out.stock_am = s.stock_am;
  out.pipe_cm.assign(s.pipe_cm.begin(),
                     s.pipe_cm.begin() + params_.lead_cm);
  out.pipe_am.assign(s.pipe_am.begin(),
                     s.pipe_am.begin() + params_.lead_am);
  return out;
}

int SimEngine::inventory_position(const State& s) const {
  int pipeline = 0;
  for (int i = 0; i < params_.lead_cm; ++i)
    pipeline += s.pipe_cm[static_cast<std::size_t>(i)] * params_.batch_cm;
  for (int i = 0; i < params_.lead_am; ++i)
    pipeline += s.pipe_am[static_cast<std::size_t>(i)];
  return s.stock_cm + s.stock_am + pipeline - backorders(s);
}

FailureRealization SimEngine::sample_failures(const State& s,
                                              std::uint64_t master,
                                              std::uint64_t rep,
                                              std::uint64_t period) const {
  FailureRealization k;
  k.fail_cm = sample_from_cdf(cdf_cm_[static_cast<std::size_t>(s.op_cm)],
                              uniform_at(master, rep, period, Draw::kFailCm));
  k.fail_am = sample_from_cdf(cdf_am_[static_cast<std::size_t>(s.op_am)],
                              uniform_at(master, rep, period, Draw::kFailAm));
  return k;
}

double SimEngine::step(State& s, const Decision& d,
                       const FailureRealization& k,
                       CostBreakdown* breakdown) const {
  const int arrivals_cm = s.pipe_cm[0] * params_.batch_cm;
  const int arrivals_am = s.pipe_am[0];

  const double purchase =
      (d.batches_cm > 0 ? params_.order_cost_cm : 0.0) +
      (d.items_am > 0 ? params_.order_cost_am : 0.0) +
      params_.price_cm * d.batches_cm * params_.batch_cm +
      params_.price_am * d.items_am;
  const double holding = params_.holding_cost * (s.stock_cm + s.stock_am);
  const int unserved = k.fail_cm + k.fail_am + backorders(s) - s.stock_cm -
                       s.stock_am;
  const double backorder =
      params_.backorder_cost * static_cast<double>(std::max(unserved, 0));
  const double maintenance =
      params_.maint_cost *
      (params_.mu_cm * s.op_cm + params_.mu_am * s.op_am);

  // Serve demand: lower-failure-rate mode first, stock before arrivals.
  int demand = backorders(s) + k.fail_cm + k.fail_am;
  const bool cm_first = params_.mu_cm <= params_.mu_am;
  int use_s1, use_s2, use_a1, use_a2;
  {
    const int s1 = cm_first ? s.stock_cm : s.stock_am;
    const int s2 = cm_first ? s.stock_am : s.stock_cm;
    const int a1 = cm_first ? arrivals_cm : arrivals_am;
    const int a2 = cm_first ? arrivals_am : arrivals_cm;
    use_s1 = std::min(demand, s1);
    demand -= use_s1;
    use_s2 = std::min(demand, s2);
    demand -= use_s2;
    use_a1 = std::min(demand, a1);
    demand -= use_a1;
    use_a2 = std::min(demand, a2);
  }
  const int stock_cm_used = cm_first ? use_s1 : use_s2;
  const int stock_am_used = cm_first ? use_s2 : use_s1;
  const int arr_cm_used = cm_first ? use_a1 : use_a2;
  const int arr_am_used = cm_first ? use_a2 : use_a1;

  s.op_cm += -k.fail_cm + stock_cm_used + arr_cm_used;
  s.op_am += -k.fail_am + stock_am_used + arr_am_used;
  s.stock_cm += arrivals_cm - stock_cm_used - arr_cm_used;
  s.stock_am += arrivals_am - stock_am_used - arr_am_used;
  for (int i = 1; i < params_.lead_cm; ++i) s.pipe_cm[i - 1] = s.pipe_cm[i];
  s.pipe_cm[static_cast<std::size_t>(params_.lead_cm - 1)] =
      static_cast<std::uint16_t>(d.batches_cm);
  for (int i = 1; i < params_.lead_am; ++i) s.pipe_am[i - 1] = s.pipe_am[i];
  s.pipe_am[static_cast<std::size_t>(params_.lead_am - 1)] =
      static_cast<std::uint16_t>(d.items_am);

  if (breakdown) {
    breakdown->purchase += purchase;
    breakdown->holding += holding;
    breakdown->backorder += backorder;
    breakdown->maintenance += maintenance;
    breakdown->total += purchase + holding + backorder + maintenance;
  }
  return purchase + holding + backorder + maintenance;
}

int SimEngine::decision_count(int budget) const {
  if (budget < 0) return 1;
  int count = 0;
  for (int b = 0; b * params_.batch_cm <= budget; ++b)
    count += budget - b * params_.batch_cm + 1;
  return count;
}

Decision SimEngine::decision_at(int budget, int index) const {
  if (budget < 0) return {0, 0};
  for (int b = 0; b * params_.batch_cm <= budget; ++b) {
    const int span = budget - b * params_.batch_cm + 1;
    if (index < span) return {b, index};
    index -= span;
  }
  return {0, 0};
}

Decision SimEngine::random_feasible(const State& s, std::uint64_t master,
                                    std::uint64_t rep,
                                    std::uint64_t period) const {
  const int b = budget(s);
  const int count = decision_count(b);
  const double u = uniform_at(master, rep, period, Draw::kPolicy);
  int pick = static_cast<int>(u * count);
  if (pick >= count) pick = count - 1;
  return decision_at(b, pick);
}

SimplifiedEngine::SimplifiedEngine(const InstanceParams& params)
    : params_(params) {
  params_.validate();
  if (params_.lead_cm > kMaxLead || params_.lead_am > kMaxLead)
    throw std::invalid_argument("lead time exceeds simulator limit");
  cdf_ = build_cdfs(params_.installed_base, params_.mu_cm, params_.var_cm,
                    params_.family);
}

SimplifiedEngine::State SimplifiedEngine::initial() const {
  State s;
  s.operating = params_.installed_base;
  return s;
}

SimplifiedState SimplifiedEngine::to_state(const State& s) const {
  SimplifiedState out;
  out.operating = s.operating;
  out.stock = s.stock;
  out.pipe_cm.assign(s.pipe_cm.begin(), s.pipe_cm.begin() + params_.lead_cm);
  out.pipe_am.assign(s.pipe_am.begin(), s.pipe_am.begin() + params_.lead_am);
  return out;
}

int SimplifiedEngine::inventory_position(const State& s) const {
  int pipeline = 0;
  for (int i = 0; i < params_.lead_cm; ++i)
    pipeline += s.pipe_cm[static_cast<std::size_t>(i)] * params_.batch_cm;
  for (int i = 0; i < params_.lead_am; ++i)
    pipeline += s.pipe_am[static_cast<std::size_t>(i)];
  return s.stock + pipeline - backorders(s);
}

int SimplifiedEngine::expedited_position(const State& s) const {
  int pipeline = 0;
  const int window = std::min(params_.lead_am, params_.lead_cm);
  for (int i = 0; i < window; ++i)
    pipeline += s.pipe_cm[static_cast<std::size_t>(i)] * params_.batch_cm;
  for (int i = 0; i < params_.lead_am; ++i)
    pipeline += s.pipe_am[static_cast<std::size_t>(i)];
  return s.stock + pipeline - backorders(s);
}

int SimplifiedEngine::sample_failures(const State& s, std::uint64_t master,
                                      std::uint64_t rep,
                                      std::uint64_t period) const {
  return sample_from_cdf(cdf_[static_cast<std::size_t>(s.operating)],
                         uniform_at(master, rep, period, Draw::kFailCm));
}

double SimplifiedEngine::step(State& s, const Decision& d, int failures,
                              CostBreakdown* breakdown) const {
  const int arrivals =
      s.pipe_cm[0] * params_.batch_cm + s.pipe_am[0];
  const double purchase =
      (d.batches_cm > 0 ? params_.order_cost_cm : 0.0) +
      (d.items_am > 0 ? params_.order_cost_am : 0.0) +
      params_.price_cm * d.batches_cm * params_.batch_cm +
      params_.price_am * d.items_am;
  const double holding = params_.holding_cost * s.stock;
  const int unserved = failures + backorders(s) - s.stock;
  const double backorder =
      params_.backorder_cost * static_cast<double>(std::max(unserved, 0));
  const double maintenance =
      params_.maint_cost * params_.mu_cm * s.operating;

  const int demand = backorders(s) + failures;
  const int installed = std::min(demand, s.stock + arrivals);
  s.operating += -failures + installed;
  s.stock += arrivals - installed;
  for (int i = 1; i < params_.lead_cm; ++i) s.pipe_cm[i - 1] = s.pipe_cm[i];
  s.pipe_cm[static_cast<std::size_t>(params_.lead_cm - 1)] =
      static_cast<std::uint16_t>(d.batches_cm);
  for (int i = 1; i < params_.lead_am; ++i) s.pipe_am[i - 1] = s.pipe_am[i];
  s.pipe_am[static_cast<std::size_t>(params_.lead_am - 1)] =
      static_cast<std::uint16_t>(d.items_am);

  if (breakdown) {
    breakdown->purchase += purchase;
    breakdown->holding += holding;
    breakdown->backorder += backorder;
    breakdown->maintenance += maintenance;
    breakdown->total += purchase + holding + backorder + maintenance;
  }
  return purchase + holding + backorder + maintenance;
}

EpisodeStats simulate_episode(const Policy& policy,
                              const InstanceParams& params, long periods,
                              long warmup, std::uint64_t master,
                              std::uint64_t replication) {
  if (warmup < 0 || periods <= warmup)
    throw std::invalid_argument("need periods > warmup >= 0");
  SimEngine engine(params);
  SimEngine::State s = engine.initial();
  EpisodeStats stats;
  stats.order_hist_cm.clear();
  stats.order_hist_am.clear();
  double am_share = 0.0;
  for (long t = 0; t < periods; ++t) {
    const Decision d = policy.decide(engine.to_system(s), params);
    const auto k = engine.sample_failures(s, master, replication,
                                          static_cast<std::uint64_t>(t));
    const bool counted = t >= warmup;
    if (counted) {
      const int parts = s.op_cm + s.op_am;
      am_share += parts > 0 ? static_cast<double>(s.op_am) / parts : 0.0;
    }
    CostBreakdown scratch;
    engine.step(s, d, k, counted ? &stats.cost : &scratch);
    if (counted) {
      ++stats.periods;
      stats.orders_cm += d.batches_cm;
      stats.orders_am += d.items_am;
      if (d.batches_cm > 0) {
        if (stats.order_hist_cm.size() <=
            static_cast<std::size_t>(d.batches_cm))
          stats.order_hist_cm.resize(
              static_cast<std::size_t>(d.batches_cm) + 1, 0);
        ++stats.order_hist_cm[static_cast<std::size_t>(d.batches_cm)];
      }
      if (d.items_am > 0) {
        if (stats.order_hist_am.size() <= static_cast<std::size_t>(d.items_am))
          stats.order_hist_am.resize(static_cast<std::size_t>(d.items_am) + 1,
                                     0);
        ++stats.order_hist_am[static_cast<std::size_t>(d.items_am)];
      }
    }
  }
  stats.am_fraction_installed =
      stats.periods > 0 ? am_share / static_cast<double>(stats.periods) : 0.0;
  return stats;
}

namespace {

Estimate summarize(const std::vector<double>& xs) {
  Estimate e;
  e.replications = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  double sum = 0.0;
  for (double x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.mean) * (x - e.mean);
    const double sd =
        std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
    e.half_width = 1.959963984540054 * sd /
                   std::sqrt(static_cast<double>(xs.size()));
  }
  return e;
}

}  // namespace

Estimate estimate_cost(const Policy& policy, const InstanceParams& params,
                       const EstimateOptions& opts,
                       std::vector<EpisodeStats>* stats) {
  if (opts.replications < 1)
    throw std::invalid_argument("need at least one replication");
  std::vector<double> means(static_cast<std::size_t>(opts.replications));
  std::vector<EpisodeStats> all(static_cast<std::size_t>(opts.replications));
  parallel_for(static_cast<std::size_t>(opts.replications), opts.threads,
               [&](std::size_t r) {
                 all[r] = simulate_episode(policy, params, opts.periods,
                                           opts.warmup, opts.master, r);
                 means[r] = all[r].cost.total /
                            static_cast<double>(all[r].periods);
               });
  if (stats) *stats = std::move(all);
  return summarize(means);
}

Estimate paired_difference(const Policy& a, const Policy& b,
                           const InstanceParams& params,
                           const EstimateOptions& opts) {
  std::vector<double> diffs(static_cast<std::size_t>(opts.replications));
  parallel_for(static_cast<std::size_t>(opts.replications), opts.threads,
               [&](std::size_t r) {
                 const auto ea = simulate_episode(a, params, opts.periods,
                                                  opts.warmup, opts.master, r);
                 const auto eb = simulate_episode(b, params, opts.periods,
                                                  opts.warmup, opts.master, r);
                 diffs[r] =
                     ea.cost.total / static_cast<double>(ea.periods) -
                     eb.cost.total / static_cast<double>(eb.periods);
               });
  return summarize(diffs);
}

double optimality_gap(double v_pi, double v_star) {
  if (!(v_star > 0.0))
    throw std::invalid_argument("optimality gap needs v_star > 0");
  return (v_pi - v_star) / v_star * 100.0;
}

BreakdownRow breakdown_report(const std::vector<EpisodeStats>& stats) {
  if (stats.empty())
    throw std::invalid_argument("breakdown_report needs at least one episode");
  std::vector<double> purchase, holding, backorder, maintenance;
  double am = 0.0;
  std::vector<double> freq_cm, freq_am;
  long orders_cm_total = 0, orders_am_total = 0;
  for (const auto& s : stats) {
    const double n = static_cast<double>(std::max<long>(s.periods, 1));
    purchase.push_back(s.cost.purchase / n);
    holding.push_back(s.cost.holding / n);
    backorder.push_back(s.cost.backorder / n);
    maintenance.push_back(s.cost.maintenance / n);
    am += s.am_fraction_installed;
    if (s.order_hist_cm.size() > freq_cm.size())
      freq_cm.resize(s.order_hist_cm.size(), 0.0);
    for (std::size_t i = 0; i < s.order_hist_cm.size(); ++i) {
      freq_cm[i] += static_cast<double>(s.order_hist_cm[i]);
      orders_cm_total += s.order_hist_cm[i];
    }
    if (s.order_hist_am.size() > freq_am.size())
      freq_am.resize(s.order_hist_am.size(), 0.0);
    for (std::size_t i = 0; i < s.order_hist_am.size(); ++i) {
      freq_am[i] += static_cast<double>(s.order_hist_am[i]);
      orders_am_total += s.order_hist_am[i];
    }
  }
  BreakdownRow row;
  row.purchase = summarize(purchase);
  row.holding = summarize(holding);
  row.backorder = summarize(backorder);
  row.maintenance = summarize(maintenance);
  row.am_fraction = am / static_cast<double>(stats.size());
  for (double& f : freq_cm)
    f /= std::max(1.0, static_cast<double>(orders_cm_total));
  for (double& f : freq_am)
    f /= std::max(1.0, static_cast<double>(orders_am_total));
  row.order_freq_cm = std::move(freq_cm);
  row.order_freq_am = std::move(freq_am);
  return row;
}

}  // namespace dsinv
