#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "dsinv/core.hpp"
#include "dsinv/space.hpp"

namespace dsinv {

// A decision rule for the two-mode system. Implementations are immutable,
// deterministic, and must only ever emit feasible decisions.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision decide(const SystemState& state,
                          const InstanceParams& params) const = 0;
  virtual std::string kind() const = 0;
  virtual void save(std::ostream& out) const = 0;
};

// Exact policy: one decision per enumerated state of the full model.
class TabularPolicy : public Policy {
 public:
  TabularPolicy(std::shared_ptr<const StateSpace> space,
                std::vector<Decision> decisions, double g,
                std::string instance_name = {});

  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "tabular"; }
  void save(std::ostream& out) const override;

  double average_cost() const { return g_; }
  const std::vector<Decision>& decisions() const { return decisions_; }
  const StateSpace& space() const { return *space_; }

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<Decision> decisions_;
  double g_ = 0.0;
  std::string instance_name_;
};

// A single-rate tabular policy applied to the two-mode system by pooling the
// mode-specific state components before lookup.
class PooledTabularPolicy : public Policy {
 public:
  PooledTabularPolicy(std::shared_ptr<const StateSpace> simplified_space,
                      std::vector<Decision> decisions, double inner_g,
                      std::string instance_name = {});

  Decision decide(const SystemState& state,
                  const InstanceParams& params) const override;
  std::string kind() const override { return "pooled-tabular"; }
  void save(std::ostream& out) const override;

  double inner_average_cost() const { return g_; }
  const std::vector<Decision>& decisions() const { return decisions_; }
  const StateSpace& space() const { return *space_; }

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<Decision> decisions_;
  double g_ = 0.0;
  std::string instance_name_;
};

class NeverOrderPolicy : public Policy {
 public:
  Decision decide(const SystemState&, const InstanceParams&) const override {
    return {0, 0};
  }
  std::string kind() const override { return "never-order"; }
  void save(std::ostream& out) const override;
};

// Clamp a target order to the decision-space budget, dropping am items first
// only when the caller asks for cm priority.
Decision clamp_decision(Decision wanted, int budget, int batch_cm);

}  // namespace dsinv
