#include "doctest.h"

#include <functional>
#include <set>
#include <vector>

#include "dsinv/io.hpp"
#include "dsinv/space.hpp"

using namespace dsinv;

namespace {

InstanceParams micro() {
  InstanceParams p;
  p.installed_base = 2;
  p.max_in_system = 2;
  p.mu_cm = 0.05;
  p.mu_am = 0.1;
  p.var_cm = 0.05;
  p.var_am = 0.1;
  p.lead_cm = 2;
  p.lead_am = 1;
  p.price_cm = 5000;
  p.price_am = 10000;
  p.order_cost_cm = 2000;
  p.order_cost_am = 0;
  p.batch_cm = 1;
  p.maint_cost = 5000;
  p.holding_cost = 29;
  p.backorder_cost = 5725;
  p.family = DemandFamily::kPoisson;
  return p;
}

// Brute-force enumeration by unconstrained nested loops plus the state
// constraints, counted independently of the production enumerator.
long brute_force_count(const InstanceParams& p) {
  long count = 0;
  const int n = p.installed_base, cap = p.max_in_system;
  const int slot_items = cap + n;
  std::vector<int> pc(static_cast<std::size_t>(p.lead_cm));
  std::vector<int> pa(static_cast<std::size_t>(p.lead_am));
  std::function<void(std::size_t, const std::function<void()>&)> loop_cm =
      [&](std::size_t i, const std::function<void()>& k) {
        if (i == pc.size()) return k();
        for (pc[i] = 0; pc[i] * p.batch_cm <= slot_items; ++pc[i])
          loop_cm(i + 1, k);
      };
  std::function<void(std::size_t, const std::function<void()>&)> loop_am =
      [&](std::size_t i, const std::function<void()>& k) {
        if (i == pa.size()) return k();
        for (pa[i] = 0; pa[i] <= slot_items; ++pa[i]) loop_am(i + 1, k);
      };
  for (int ncm = 0; ncm <= n; ++ncm)
    for (int nam = 0; nam + ncm <= n; ++nam)
      for (int scm = 0; scm <= cap; ++scm)
        for (int sam = 0; sam <= cap; ++sam)
          loop_cm(0, [&]() {
            loop_am(0, [&]() {
              const int back = n - ncm - nam;
              int pipe = 0;
              for (int v : pc) pipe += v * p.batch_cm;
              for (int v : pa) pipe += v;
              const int ip = scm + sam + pipe - back;
              if (ip > cap) return;
              if (back > 0 && scm + sam > 0) return;
              ++count;
            });
          });
  return count;
}

}  // namespace

TEST_CASE("enumerate_states matches a brute-force oracle (full model)") {
  const auto p = micro();
  const auto space = StateSpace::enumerate(p, ModelKind::kFull);
  CHECK(static_cast<long>(space.size()) == brute_force_count(p));
}

TEST_CASE("index and state round-trip over the whole space") {
  const auto p = micro();
  const auto space = StateSpace::enumerate(p, ModelKind::kFull);
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const SystemState s = space.full_state(i);
    CHECK_NOTHROW(check_state(s, p));
    CHECK(space.index(s) == static_cast<std::int32_t>(i));
    const auto key = space.key(i);
    CHECK(seen.insert({key.lo, key.hi}).second);  // no duplicates
  }
}

TEST_CASE("single-rate space: hand enumeration at the smallest size") {
  InstanceParams p = micro();
  p.installed_base = 1;
  p.max_in_system = 0;
  p.lead_cm = 1;
  p.lead_am = 1;
  const auto space = StateSpace::enumerate(p, ModelKind::kSimplified);
  // n=1 admits only the empty state; n=0 (one backorder) admits an empty
  // pipeline or a single inbound item on either channel (IP stays <= 0).
  CHECK(space.size() == 4);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto s = space.single_state(i);
    CHECK(inventory_position(s, p) <= p.max_in_system);
  }
}

TEST_CASE("state cap reports a size instead of exhausting memory") {
  InstanceParams p = micro();
  p.installed_base = 7;
  p.max_in_system = 10;
  p.lead_cm = 8;
  p.lead_am = 4;
  CHECK_THROWS_WITH_AS(
      StateSpace::enumerate(p, ModelKind::kFull, 1000),
      doctest::Contains("exceeds cap"), std::runtime_error);
}

TEST_CASE("reference state is the healthy empty state") {
  const auto p = micro();
  const auto space = StateSpace::enumerate(p, ModelKind::kFull);
  const auto ref = space.full_state(
      static_cast<std::size_t>(space.reference_index()));
  CHECK(ref.op_cm == p.installed_base);  // cm installed first (lower rate)
  CHECK(ref.op_am == 0);
  CHECK(ref.stock_cm == 0);
  CHECK(inventory_position(ref, p) == 0);
}

TEST_CASE("random states satisfy the constraints") {
  const auto p = load_instance("synthetic-03").params;
  RngStream rng(5);
  const auto space = StateSpace::enumerate(p, ModelKind::kFull);
  for (int i = 0; i < 2000; ++i) {
    const SystemState s = random_state(p, rng);
    CHECK_NOTHROW(check_state(s, p));
    CHECK(space.index(s) >= 0);  // generator stays inside the space
  }
}
