#pragma once

#include <stdexcept>
#include <string>

namespace dsinv {

enum class DemandFamily { kPoisson, kNegativeBinomial };

std::string to_string(DemandFamily family);
DemandFamily demand_family_from_string(const std::string& name);

// All inputs describing one item (SKU). Two supply modes are available:
// conventional manufacturing (cm) and additive manufacturing (am), which
// differ in piece price, fixed order cost, lead time and, crucially, in the
// failure behaviour of the installed parts.
struct InstanceParams {
  int installed_base = 1;   // parts operating when the system is healthy
  int max_in_system = 0;    // cap on the inventory position
  double mu_cm = 0.0;       // mean failures per installed cm part per period
  double mu_am = 0.0;
  double var_cm = 0.0;      // variance of failures per part per period
  double var_am = 0.0;
  int lead_cm = 1;          // replenishment lead times, whole periods
  int lead_am = 1;
  double price_cm = 0.0;    // piece prices
  double price_am = 0.0;
  double order_cost_cm = 0.0;  // fixed cost per order
  double order_cost_am = 0.0;
  int batch_cm = 1;         // cm orders are placed in whole batches
  double maint_cost = 0.0;  // charged per expected failure
  double holding_cost = 0.0;  // per item in stock per period
  double backorder_cost = 0.0;  // per backlogged item per period
  DemandFamily family = DemandFamily::kPoisson;

  // Throws std::invalid_argument when any invariant is violated.
  void validate() const;

  bool operator==(const InstanceParams&) const = default;
};

// Collapses the two failure processes into a single rate given the fraction
// `am_weight` of am parts in the installed base. Mean and variance follow
// the standard conditioning rules for a mixture.
InstanceParams simplify_params(const InstanceParams& params, double am_weight);

}  // namespace dsinv
