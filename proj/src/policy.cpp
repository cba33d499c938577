#include "dsinv/policy.hpp"

#include <ostream>
#include <stdexcept>

#include "dsinv/textio.hpp"

namespace dsinv {

TabularPolicy::TabularPolicy(std::shared_ptr<const StateSpace> space,
                             std::vector<Decision> decisions, double g,
                             std::string instance_name)
    : space_(std::move(space)),
      decisions_(std::move(decisions)),
      g_(g),
      instance_name_(std::move(instance_name)) {
  if (decisions_.size() != space_->size())
    throw std::invalid_argument("tabular policy size mismatch");
}

Decision TabularPolicy::decide(const SystemState& state,
                               const InstanceParams&) const {
  const std::int32_t i = space_->index(state);
  if (i < 0) throw std::invalid_argument("state outside the enumerated space");
  return decisions_[static_cast<std::size_t>(i)];
}

void TabularPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = tabular\n";
  out << "instance = " << instance_name_ << "\n";
  out << "g = " << format_hex_double(g_) << "\n";
  out << "states = " << decisions_.size() << "\n";
  out << "table:\n";
  for (const Decision& d : decisions_)
    out << d.batches_cm << " " << d.items_am << "\n";
}

PooledTabularPolicy::PooledTabularPolicy(
    std::shared_ptr<const StateSpace> simplified_space,
    std::vector<Decision> decisions, double inner_g, std::string instance_name)
    : space_(std::move(simplified_space)),
      decisions_(std::move(decisions)),
      g_(inner_g),
      instance_name_(std::move(instance_name)) {
  if (space_->kind() != ModelKind::kSimplified)
    throw std::invalid_argument("pooled policy needs a single-rate space");
  if (decisions_.size() != space_->size())
    throw std::invalid_argument("pooled policy size mismatch");
}

Decision PooledTabularPolicy::decide(const SystemState& state,
                                     const InstanceParams&) const {
  const std::int32_t i = space_->index(collapse(state));
  if (i < 0) throw std::invalid_argument("state outside the enumerated space");
  return decisions_[static_cast<std::size_t>(i)];
}

void PooledTabularPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = pooled-tabular\n";
  out << "instance = " << instance_name_ << "\n";
  out << "g = " << format_hex_double(g_) << "\n";
  out << "states = " << decisions_.size() << "\n";
  out << "table:\n";
  for (const Decision& d : decisions_)
    out << d.batches_cm << " " << d.items_am << "\n";
}

void NeverOrderPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = never-order\n";
}

Decision clamp_decision(Decision wanted, int budget, int batch_cm) {
  if (budget < 0) budget = 0;
  if (wanted.batches_cm < 0) wanted.batches_cm = 0;
  if (wanted.items_am < 0) wanted.items_am = 0;
  while (wanted.batches_cm > 0 && wanted.batches_cm * batch_cm > budget)
    --wanted.batches_cm;
  const int left = budget - wanted.batches_cm * batch_cm;
  if (wanted.items_am > left) wanted.items_am = left;
  return wanted;
}

}  // namespace dsinv
