#include "dsinv/features.hpp"

#include <algorithm>
#include <stdexcept>

namespace dsinv {

std::vector<double> extract_features(const SystemState& state,
                                     const InstanceParams& params) {
  std::vector<double> out;
  out.reserve(8 + state.pipe_cm.size() + state.pipe_am.size());
  out.push_back(state.op_cm);
  out.push_back(state.op_am);
  out.push_back(state.stock_cm);
  out.push_back(state.stock_am);
  for (int v : state.pipe_cm) out.push_back(v);
  for (int v : state.pipe_am) out.push_back(v);
  out.push_back(inventory_position(state, params));
  out.push_back(params.mu_cm * state.op_cm + params.mu_am * state.op_am);
  out.push_back(params.var_cm * state.op_cm + params.var_am * state.op_am);
  out.push_back(state.stock_cm + state.stock_am - backorders(state, params));
  return out;
}

FeatureSpec FeatureSpec::for_instance(const InstanceParams& params) {
  FeatureSpec spec;
  spec.slots_cm = params.lead_cm + 1;
  spec.slots_am = params.lead_am + 1;
  return spec;
}

namespace {

struct Scales {
  double n, s, items, mu, var, level;
};

Scales scales_for(const InstanceParams& p) {
  Scales sc;
  sc.n = static_cast<double>(std::max(p.installed_base, 1));
  sc.s = static_cast<double>(std::max(p.max_in_system, 1));
  sc.items = sc.s;
  sc.mu = std::max(p.mu_cm, p.mu_am) * sc.n;
  sc.var = std::max(p.var_cm, p.var_am) * sc.n;
  sc.level = std::max(sc.n, sc.s);
  return sc;
}

}  // namespace

void FeatureSpec::write(const SimEngine::State& state, const Decision& pending,
                        const InstanceParams& params, const double* theta_norm,
                        float* out) const {
  if (params.lead_cm + 1 > slots_cm || params.lead_am + 1 > slots_am)
    throw std::invalid_argument("feature spec too narrow for instance");
  const Scales sc = scales_for(params);
  const int backorders =
      params.installed_base - state.op_cm - state.op_am;
  float* p = out;
  *p++ = static_cast<float>(state.op_cm / sc.n);
  *p++ = static_cast<float>(state.op_am / sc.n);
  *p++ = static_cast<float>(state.stock_cm / sc.s);
  *p++ = static_cast<float>(state.stock_am / sc.s);
  int pipeline_items = 0;
  for (int j = 0; j < slots_cm; ++j) {
    int batches = 0;
    if (j < params.lead_cm)
      batches = state.pipe_cm[static_cast<std::size_t>(j)];
    else if (j == params.lead_cm)
      batches = pending.batches_cm;
    const int items = batches * params.batch_cm;
    pipeline_items += items;
    *p++ = static_cast<float>(items / sc.items);
  }
  for (int j = 0; j < slots_am; ++j) {
    int items = 0;
    if (j < params.lead_am)
      items = state.pipe_am[static_cast<std::size_t>(j)];
    else if (j == params.lead_am)
      items = pending.items_am;
    pipeline_items += items;
    *p++ = static_cast<float>(items / sc.items);
  }
  const int ip = state.stock_cm + state.stock_am + pipeline_items - backorders;
  *p++ = static_cast<float>(ip / sc.s);
  *p++ = static_cast<float>(
      (params.mu_cm * state.op_cm + params.mu_am * state.op_am) / sc.mu);
  *p++ = static_cast<float>(
      (params.var_cm * state.op_cm + params.var_am * state.op_am) / sc.var);
  *p++ = static_cast<float>(
      (state.stock_cm + state.stock_am - backorders) / sc.level);
  for (int j = 0; j < theta_dim; ++j)
    *p++ = static_cast<float>(theta_norm[j]);
}

void FeatureSpec::write(const SystemState& state, const Decision& pending,
                        const InstanceParams& params, const double* theta_norm,
                        float* out) const {
  SimEngine::State s;
  s.op_cm = state.op_cm;
  s.op_am = state.op_am;
  s.stock_cm = state.stock_cm;
  s.stock_am = state.stock_am;
  for (std::size_t i = 0; i < state.pipe_cm.size(); ++i)
    s.pipe_cm[i] = static_cast<std::uint16_t>(state.pipe_cm[i]);
  for (std::size_t i = 0; i < state.pipe_am.size(); ++i)
    s.pipe_am[i] = static_cast<std::uint16_t>(state.pipe_am[i]);
  write(s, pending, params, theta_norm, out);
}

const std::vector<std::string> kThetaNames = {
    "n",   "s_max", "mu_c", "mu_a", "var_c", "var_a", "l_c", "l_a",
    "c_c", "c_a",   "k_c",  "k_a",  "q_c",   "m",     "h",   "b"};

std::vector<double> instance_theta(const InstanceParams& p) {
  return {static_cast<double>(p.installed_base),
          static_cast<double>(p.max_in_system),
          p.mu_cm,
          p.mu_am,
          p.var_cm,
          p.var_am,
          static_cast<double>(p.lead_cm),
          static_cast<double>(p.lead_am),
          p.price_cm,
          p.price_am,
          p.order_cost_cm,
          p.order_cost_am,
          static_cast<double>(p.batch_cm),
          p.maint_cost,
          p.holding_cost,
          p.backorder_cost};
}

std::vector<double> FeatureSpec::normalize_theta(
    const std::vector<double>& raw) const {
  if (raw.size() != theta_min.size())
    throw std::invalid_argument("theta size mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double lo = theta_min[j], hi = theta_max[j];
    if (raw[j] < lo - 1e-9 || raw[j] > hi + 1e-9)
      throw std::invalid_argument(
          "parameter outside the trained grid bounds; the policy only "
          "interpolates within known bounds");
    out[j] = hi > lo ? (raw[j] - lo) / (hi - lo) : 0.5;
  }
  return out;
}

}  // namespace dsinv
