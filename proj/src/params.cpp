#include "dsinv/params.hpp"

#include <cmath>

namespace dsinv {

std::string to_string(DemandFamily family) {
  return family == DemandFamily::kPoisson ? "poisson" : "negative_binomial";
}

DemandFamily demand_family_from_string(const std::string& name) {
  if (name == "poisson") return DemandFamily::kPoisson;
  if (name == "negative_binomial") return DemandFamily::kNegativeBinomial;
  throw std::invalid_argument("unknown demand family: " + name);
}

void InstanceParams::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("invalid instance: " + msg);
  };
  if (installed_base < 1) fail("installed_base must be >= 1");
  if (max_in_system < 0) fail("max_in_system must be >= 0");
  if (batch_cm < 1) fail("batch_cm must be >= 1");
  if (lead_cm < 1 || lead_am < 1) fail("lead times must be >= 1");
  if (!(mu_cm > 0.0) || !(mu_am > 0.0)) fail("failure rates must be > 0");
  if (var_cm < mu_cm || var_am < mu_am)
    fail("variance-to-mean ratio must be >= 1");
  if (family == DemandFamily::kPoisson &&
      (var_cm != mu_cm || var_am != mu_am))
    fail("poisson demand requires var == mu");
  if (price_cm < 0.0 || price_am < 0.0 || order_cost_cm < 0.0 ||
      order_cost_am < 0.0 || maint_cost < 0.0 || holding_cost < 0.0 ||
      backorder_cost < 0.0)
    fail("costs must be >= 0");
}

InstanceParams simplify_params(const InstanceParams& params, double am_weight) {
  if (am_weight < 0.0 || am_weight > 1.0)
    throw std::invalid_argument("am_weight must lie in [0, 1]");
  const double g = am_weight;
  const double mean = g * params.mu_am + (1.0 - g) * params.mu_cm;
  const double diff = params.mu_am - params.mu_cm;
  const double var = g * params.var_am + (1.0 - g) * params.var_cm +
                     g * (1.0 - g) * diff * diff;
  InstanceParams out = params;
  out.mu_cm = out.mu_am = mean;
  out.var_cm = out.var_am = var;
  out.family = var > mean ? DemandFamily::kNegativeBinomial
                          : DemandFamily::kPoisson;
  return out;
}

}  // namespace dsinv
