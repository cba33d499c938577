#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dsinv/dcl.hpp"
#include "dsinv/heuristics.hpp"
#include "dsinv/params.hpp"
#include "dsinv/policy.hpp"
#include "dsinv/sim.hpp"
#include "dsinv/vfa.hpp"

namespace dsinv {

struct InstanceMeta {
  std::string name;
  std::string description;
  std::string provenance;
};

struct Instance {
  InstanceMeta meta;
  InstanceParams params;
};

// Line-oriented instance document: [meta] name/description/provenance and
// [params] with one key per input symbol. Unknown keys are rejected with the
// offending line; var_c / var_a may be omitted for poisson demand; b may be
// given via fill_rate instead (b = h*f/(1-f)).
Instance parse_instance(std::istream& in, const std::string& origin);
void write_instance(std::ostream& out, const Instance& instance);

// b implied by a target fill rate.
double backorder_from_fill_rate(double holding_cost, double fill_rate);

// Bundled library plus files: a bundled name ("synthetic-01".."synthetic-12")
// or a path to an instance document. "energy-template" is a ratio sheet and
// cannot be loaded directly; see generate_energy_grid.
Instance load_instance(const std::string& name_or_path);
std::vector<std::string> bundled_instance_names();

// Environment variable consulted for instance files given by bare name.
inline constexpr const char* kLibraryPathEnv = "DSINV_INSTANCE_PATH";

// ---------------------------------------------------------------------------
// Energy case: per-item parameter ratios relative to a confidential base.

struct EnergyItem {
  std::string name;
  int parts_per_valve = 1;
  double price_cm_ratio = 1.0;   // vs item 1 cm price
  double lead_cm_ratio = 1.0;    // vs item 1 cm lead time
  double fail_cm_ratio = 1.0;    // vs item 1 cm failure rate
  double price_am_ratio = 1.0;   // vs the same item's cm price
  double lead_am_ratio = 1.0;    // vs the same item's cm lead time
  double maint_ratio = 1.0;      // vs the same item's cm price
  double backorder_ratio = 1.0;  // vs item 1 backorder cost
};

struct EnergyTemplate {
  std::vector<EnergyItem> items;
  double order_cost_of_price = 0.2;
  double holding_of_price_per_year = 0.05;
  int periods_per_year = 52;
  int max_in_system = 25;
};

// Absolute anchors the published ratios attach to. The cm piece price of
// item 1 is required; the remaining anchors default to stand-ins consistent
// with the reported ranges.
struct EnergyBase {
  double price_cm = 0.0;     // required, > 0
  double lead_cm = 36.0;     // periods
  double mu_cm = 0.004;      // failures per part per period
  double backorder = 0.0;    // defaults to price_cm when 0
};

struct EnergyVariations {
  std::vector<int> platforms{5, 15, 25};
  std::vector<double> price_am_level{1.0, 1.25, 0.75};
  std::vector<double> lead_am_level{1.0, 0.75, 0.5};
  std::vector<double> fail_am_level{1.0, 0.75, 0.5};  // of the item's cm rate
  std::vector<double> backorder_level{1.0, 0.5, 2.0};  // original, min, max
};

EnergyTemplate energy_template();

// Full factorial over the variation levels for every item, in deterministic
// item-major order; every instance validated.
std::vector<Instance> generate_energy_grid(const EnergyTemplate& tmpl,
                                           const EnergyBase& base,
                                           const EnergyVariations& vars);

// ---------------------------------------------------------------------------
// Policy artifacts. Self-describing text documents; doubles are serialized
// in hex so reloads reproduce decisions bit-exactly.

void save_policy(std::ostream& out, const Policy& policy);
std::shared_ptr<Policy> load_policy(std::istream& in,
                                    const InstanceParams& context);
std::shared_ptr<Policy> load_policy_file(const std::string& path,
                                         const InstanceParams& context);

// ---------------------------------------------------------------------------
// CSV emission. Every schema starts with a versioned comment line.

struct GapRow {
  std::string instance, policy;
  double mean_cost = 0.0, half_width = 0.0, gap_pct = 0.0;
};
void write_gaps_csv(std::ostream& out, const std::vector<GapRow>& rows);

struct BreakdownCsvRow {
  std::string instance, policy;
  BreakdownRow data;
};
void write_breakdown_csv(std::ostream& out,
                         const std::vector<BreakdownCsvRow>& rows);
void write_orders_csv(std::ostream& out,
                      const std::vector<BreakdownCsvRow>& rows);

struct IwaTraceRow {
  std::string instance;
  int iteration = 0;
  double gamma = 0.0, rho = 0.0, cost = 0.0;
};
void write_iwa_trace_csv(std::ostream& out,
                         const std::vector<IwaTraceRow>& rows);

// ---------------------------------------------------------------------------
// Experiment configuration files: `key = value` lines with [sections].

struct ExperimentConfig {
  std::vector<std::string> instances;
  std::string policy = "exact";
  std::uint64_t seed = 1;
  int replications = 200;
  long periods = 10'000;
  long warmup = 1'000;
  std::string out_dir = "results";
  int threads = 0;  // 0: hardware concurrency
  double epsilon_cap = 1e-4;  // determine_S tail mass
  AviConfig avi;
  RolloutConfig rollout;
  NetConfig net;
  IwaConfig iwa;
  double vfa_discount = 0.99;

  void validate() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& origin);

}  // namespace dsinv
