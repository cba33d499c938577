#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dsinv/exact.hpp"
#include "dsinv/policy.hpp"
#include "dsinv/sim.hpp"

namespace dsinv {

enum class Source { kCm, kAm };

std::string to_string(Source source);

// Single-source order-up-to policy. Cm orders are rounded up to whole
// batches; both use the overall inventory position.
class BaseStockPolicy : public Policy {
 public:
  BaseStockPolicy(Source source, int level) : source_(source), level_(level) {}

  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "base-stock"; }
  void save(std::ostream& out) const override;

  Source source() const { return source_; }
  int level() const { return level_; }

 private:
  Source source_;
  int level_;
};

struct BspOptions {
  bool simulate = false;   // false: exact single-mode evaluation
  EvalOptions eval;        // exact path
  EstimateOptions sim;     // simulation path
  int threads = 1;
};

struct BspResult {
  Source source = Source::kCm;
  int level = 0;
  double cost = 0.0;  // under the chosen source's own failure process
  std::shared_ptr<BaseStockPolicy> policy;
};

// Best (source, order-up-to level) with each source evaluated under its own
// single-mode system; ties prefer cm, then the lower level.
BspResult bsp_solve(const InstanceParams& params, const BspOptions& opts = {});

// Dual-index policy: an order-up-to level for the expedited (am) channel and
// the spread to the regular (cm) channel target.
struct DualIndexParams {
  int expedite_level = 0;  // z_A
  int spread = 0;          // z_C - z_A
  int order_level() const { return expedite_level + spread; }
};

class DualIndexPolicy : public Policy {
 public:
  explicit DualIndexPolicy(DualIndexParams di) : di_(di) {}
  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "dual-index"; }
  void save(std::ostream& out) const override;
  DualIndexParams di() const { return di_; }

 private:
  DualIndexParams di_;
};

Decision dual_index_decide(const SystemState& state, const DualIndexParams& di,
                           const InstanceParams& params);

struct DualIndexOptions {
  long overshoot_periods = 100'000;
  long eval_periods = 100'000;
  long warmup = 1'000;
  std::uint64_t master = 9001;
};

// One-dimensional search over the spread: the overshoot distribution is
// simulated per spread, the expedited level follows from the newsvendor
// fractile b/(b+h) of lead-time demand net of overshoot, and the winner is
// picked by simulated long-run cost. Requires lead_am <= lead_cm.
DualIndexParams dual_index_solve(const InstanceParams& single_rate,
                                 const DualIndexOptions& opts = {});

// Empirical overshoot pmf at a given spread and expedited level (exposed for
// the overshoot-independence property test).
std::vector<double> dual_index_overshoot(const InstanceParams& single_rate,
                                         int spread, int expedite_level,
                                         long periods, long warmup,
                                         std::uint64_t master);

// ---------------------------------------------------------------------------
// Iterative weight adjustment: alternates between solving a single-rate
// dual-sourcing model and re-estimating the am share of the installed base
// until the share stabilises.

double gamma_to_rho(double gamma, double mu_cm, double mu_am);
double rho_to_gamma(double rho, double mu_cm, double mu_am);

struct InnerSolution {
  std::shared_ptr<Policy> policy;  // applicable to full two-mode states
  double rho = 0.0;                // measured am fraction of sourced items
};

using InnerSolver = std::function<InnerSolution(const InstanceParams&)>;
using PolicyCost = std::function<double(const Policy&)>;

struct IwaConfig {
  double threshold = 0.2;  // stop when |gamma_j - gamma_{j-1}| drops below
  int max_iterations = 50;
  double cycle_tol = 1e-6;
};

struct IwaIterate {
  double gamma = 0.0;
  double rho = 0.0;
  double cost = 0.0;
};

struct IwaResult {
  double gamma_star = 0.0;
  double rho_star = 0.0;
  int iterations = 0;
  bool converged = false;
  std::shared_ptr<Policy> policy;
  double cost = 0.0;
  std::vector<IwaIterate> trace;
};

// `evaluate` prices an inner policy in the true two-mode environment; it
// drives the best-iterate fallback when the loop cycles or hits the cap.
IwaResult iwa(const InstanceParams& params, const InnerSolver& inner,
              const PolicyCost& evaluate, const IwaConfig& config = {});

// Inner solver backed by policy iteration on the single-rate model; the am
// fraction comes from the stationary distribution.
InnerSolution exact_inner_solver(const InstanceParams& single_rate,
                                 const EvalOptions& eval = {});

// Inner solver backed by the dual-index policy; the am fraction is measured
// by simulating the order process.
InnerSolution dual_index_inner_solver(const InstanceParams& single_rate,
                                      const DualIndexOptions& opts = {});

}  // namespace dsinv
