#include "dsinv/epl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsinv {

namespace {

std::vector<std::vector<double>> observed_values(
    const std::vector<InstanceParams>& pop) {
  if (pop.empty()) throw std::invalid_argument("empty instance population");
  std::vector<std::vector<double>> columns(kThetaNames.size());
  for (const auto& p : pop) {
    p.validate();
    const auto theta = instance_theta(p);
    for (std::size_t j = 0; j < theta.size(); ++j)
      columns[j].push_back(theta[j]);
  }
  return columns;
}

std::vector<double> dedup_sorted(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.empty()) throw std::invalid_argument("empty grid dimension");
  return xs;
}

}  // namespace

EplGrid EplGrid::from_population(const std::vector<InstanceParams>& pop) {
  EplGrid grid;
  grid.names = kThetaNames;
  for (auto& column : observed_values(pop))
    grid.values.push_back(dedup_sorted(std::move(column)));
  return grid;
}

EplGrid EplGrid::from_percentiles(const std::vector<InstanceParams>& pop,
                                  int kappa) {
  if (kappa < 0) throw std::invalid_argument("kappa must be >= 0");
  EplGrid grid;
  grid.names = kThetaNames;
  for (auto& column : observed_values(pop)) {
    std::sort(column.begin(), column.end());
    std::vector<double> pts{column.front(), column.back()};
    // Interior percentiles at i/(kappa+1), nearest-rank on the sorted sample.
    for (int i = 1; i <= kappa; ++i) {
      const double q = static_cast<double>(i) / (kappa + 1);
      const auto idx = static_cast<std::size_t>(
          std::llround(q * (static_cast<double>(column.size()) - 1.0)));
      pts.push_back(column[idx]);
    }
    grid.values.push_back(dedup_sorted(std::move(pts)));
  }
  return grid;
}

std::vector<double> EplGrid::mins() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.front());
  return out;
}

std::vector<double> EplGrid::maxs() const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.back());
  return out;
}

bool EplGrid::contains(const InstanceParams& params) const {
  const auto theta = instance_theta(params);
  for (std::size_t j = 0; j < theta.size(); ++j)
    if (theta[j] < values[j].front() - 1e-9 ||
        theta[j] > values[j].back() + 1e-9)
      return false;
  return true;
}

InstanceParams EplGrid::assemble(const std::vector<double>& theta) const {
  if (theta.size() != kThetaNames.size())
    throw std::invalid_argument("theta size mismatch");
  InstanceParams p;
  p.installed_base = static_cast<int>(std::llround(theta[0]));
  p.max_in_system = static_cast<int>(std::llround(theta[1]));
  p.mu_cm = theta[2];
  p.mu_am = theta[3];
  p.var_cm = theta[4];
  p.var_am = theta[5];
  p.lead_cm = static_cast<int>(std::llround(theta[6]));
  p.lead_am = static_cast<int>(std::llround(theta[7]));
  p.price_cm = theta[8];
  p.price_am = theta[9];
  p.order_cost_cm = theta[10];
  p.order_cost_am = theta[11];
  p.batch_cm = static_cast<int>(std::llround(theta[12]));
  p.maint_cost = theta[13];
  p.holding_cost = theta[14];
  p.backorder_cost = theta[15];
  p.family = (p.var_cm == p.mu_cm && p.var_am == p.mu_am)
                 ? DemandFamily::kPoisson
                 : DemandFamily::kNegativeBinomial;
  p.validate();
  return p;
}

InstanceParams EplGrid::sample(RngStream& rng) const {
  std::vector<double> theta(values.size());
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (std::size_t j = 0; j < values.size(); ++j)
      theta[j] = values[j][rng.next_below(values[j].size())];
    try {
      return assemble(theta);
    } catch (const std::invalid_argument&) {
      // invalid combination (e.g. variance below mean); draw again
    }
  }
  throw std::runtime_error(
      "could not sample a valid instance from the grid in 1000 attempts; "
      "the grid is inconsistent");
}

EplEnv::EplEnv(EplGrid grid) : grid_(std::move(grid)) {
  int lead_cm_max = 1, lead_am_max = 1;
  for (std::size_t j = 0; j < kThetaNames.size(); ++j) {
    if (kThetaNames[j] == "l_c")
      lead_cm_max = static_cast<int>(std::llround(grid_.values[j].back()));
    if (kThetaNames[j] == "l_a")
      lead_am_max = static_cast<int>(std::llround(grid_.values[j].back()));
  }
  spec_.slots_cm = lead_cm_max + 1;
  spec_.slots_am = lead_am_max + 1;
  spec_.theta_dim = static_cast<int>(grid_.values.size());
  spec_.theta_min = grid_.mins();
  spec_.theta_max = grid_.maxs();
}

EnvSource::Episode EplEnv::episode(std::uint64_t seed, long index) const {
  RngStream rng(seed, 0xE91, static_cast<std::uint64_t>(index));
  Episode ep;
  ep.params = grid_.sample(rng);
  ep.theta_norm = spec_.normalize_theta(instance_theta(ep.params));
  return ep;
}

void EplEnv::decision_bounds(int* budget, int* batch_cm) const {
  int s_max = 0, q_min = 1;
  for (std::size_t j = 0; j < kThetaNames.size(); ++j) {
    if (kThetaNames[j] == "s_max")
      s_max = static_cast<int>(std::llround(grid_.values[j].back()));
    if (kThetaNames[j] == "q_c")
      q_min = static_cast<int>(std::llround(grid_.values[j].front()));
  }
  *budget = s_max;
  *batch_cm = std::max(q_min, 1);
}

RolloutConfig scale_for_epl(RolloutConfig base, const EplScaling& scaling) {
  base.n_samples = static_cast<int>(
      std::llround(base.n_samples * scaling.samples_factor));
  base.scenarios = static_cast<int>(
      std::llround(base.scenarios * scaling.scenarios_factor));
  base.episode_len = scaling.episode_len;
  return base;
}

NetConfig deepen_for_epl(NetConfig base, const EplScaling& scaling) {
  const int width = base.hidden.empty() ? 32 : base.hidden.back();
  for (int i = 0; i < scaling.extra_hidden_layers; ++i)
    base.hidden.push_back(width);
  return base;
}

DclResult epl_train_dcl(const EplGrid& grid, const RolloutConfig& base,
                        const NetConfig& net, const EplScaling& scaling,
                        std::uint64_t seed) {
  EplEnv env(grid);
  return dcl_train(env, scale_for_epl(base, scaling),
                   deepen_for_epl(net, scaling), seed);
}

LinearVfa epl_train_avi(const EplGrid& grid, const AviConfig& config) {
  EplEnv env(grid);
  return avi_train(env, config);
}

}  // namespace dsinv
