#include "doctest.h"

#include <cmath>

#include "dsinv/core.hpp"
#include "dsinv/io.hpp"
#include "dsinv/rng.hpp"
#include "dsinv/space.hpp"

using namespace dsinv;

namespace {

InstanceParams instance1() { return load_instance("synthetic-01").params; }

SystemState make_state(const InstanceParams& p, int ncm, int nam, int scm,
                       int sam, std::vector<int> pipe_cm = {},
                       std::vector<int> pipe_am = {}) {
  SystemState s;
  s.op_cm = ncm;
  s.op_am = nam;
  s.stock_cm = scm;
  s.stock_am = sam;
  pipe_cm.resize(static_cast<std::size_t>(p.lead_cm), 0);
  pipe_am.resize(static_cast<std::size_t>(p.lead_am), 0);
  s.pipe_cm = std::move(pipe_cm);
  s.pipe_am = std::move(pipe_am);
  return s;
}

}  // namespace

TEST_CASE("backorders: installed-base shortfall") {
  const auto p = instance1();  // N = 7
  CHECK(backorders(make_state(p, 7, 0, 0, 0), p) == 0);
  CHECK(backorders(make_state(p, 4, 2, 0, 0), p) == 1);
  CHECK(backorders(make_state(p, 0, 0, 0, 0), p) == 7);
}

TEST_CASE("inventory position: stock plus pipeline minus backorders") {
  auto p = instance1();  // Q_C = 5
  // 2 on hand + one cm batch in the pipeline.
  auto s = make_state(p, 7, 0, 2, 0, {1});
  CHECK(inventory_position(s, p) == 7);
  // Nothing anywhere, full base: 0.
  CHECK(inventory_position(make_state(p, 7, 0, 0, 0), p) == 0);
  // 2 am inbound against 2 backorders.
  auto s2 = make_state(p, 5, 0, 0, 0, {}, {2});
  CHECK(backorders(s2, p) == 2);
  CHECK(inventory_position(s2, p) == 0);
  auto s3 = make_state(p, 6, 1, 0, 1, {}, {2});
  CHECK(inventory_position(s3, p) == 3);
}

TEST_CASE("feasible decisions: exact budget enumeration, lexicographic") {
  auto p = instance1();  // S = 8, Q_C = 5
  // Budget 1 (IP = 7): a cm batch would need 5.
  auto s = make_state(p, 7, 0, 2, 0, {1});
  auto ds = feasible_decisions(s, p);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0] == Decision{0, 0});
  CHECK(ds[1] == Decision{0, 1});

  // Budget 0.
  auto s0 = make_state(p, 7, 0, 3, 0, {1});
  REQUIRE(feasible_decisions(s0, p).size() == 1);

  // Budget 8 from the empty state: x_C=0 -> x_A in 0..8, x_C=1 -> x_A in 0..3.
  auto se = make_state(p, 7, 0, 0, 0);
  auto dse = feasible_decisions(se, p);
  CHECK(dse.size() == 13);
  CHECK(dse.front() == Decision{0, 0});
  for (std::size_t i = 1; i < dse.size(); ++i) CHECK(dse[i - 1] < dse[i]);
}

TEST_CASE("allocation cascade: stock first, then arrivals") {
  auto p = instance1();  // mu_cm < mu_am: cm consumed first
  // One failure, one cm spare.
  auto s1 = make_state(p, 6, 0, 1, 0);
  auto a1 = allocate_replacements(s1, 0, 0, {1, 0}, p);
  CHECK(a1.stock_cm == 1);
  CHECK(a1.stock_am == 0);
  CHECK(a1.arrival_cm == 0);
  CHECK(a1.arrival_am == 0);

  // Backordered demand: one am spare, rest from the arriving cm batch.
  // (Pure cascade arithmetic; allocate does not validate period-start
  // invariants.)
  auto s2 = make_state(p, 4, 1, 0, 1);  // B = 2
  auto a2 = allocate_replacements(s2, 5, 0, {0, 1}, p);
  CHECK(a2.stock_cm == 0);
  CHECK(a2.stock_am == 1);
  CHECK(a2.arrival_cm == 2);
  CHECK(a2.arrival_am == 0);

  // No demand: nothing moves.
  auto s3 = make_state(p, 7, 0, 3, 0);
  auto a3 = allocate_replacements(s3, 5, 0, {0, 0}, p);
  CHECK(a3.stock_cm + a3.stock_am + a3.arrival_cm + a3.arrival_am == 0);
}

TEST_CASE("allocation swaps when am fails less") {
  auto p = instance1();
  std::swap(p.mu_cm, p.mu_am);  // now mu_am < mu_cm
  std::swap(p.var_cm, p.var_am);
  auto s = make_state(p, 3, 3, 1, 1);
  auto a = allocate_replacements(s, 0, 0, {1, 0}, p);
  CHECK(a.stock_am == 1);  // am stock consumed first
  CHECK(a.stock_cm == 0);
}

TEST_CASE("transition: pipeline shift is the only change without events") {
  auto p = instance1();
  auto s = make_state(p, 7, 0, 0, 0, {0, 1, 0, 0, 0, 0, 0, 0}, {0, 0});
  auto next = transition(s, {0, 0}, {0, 0}, p);
  CHECK(next.op_cm == 7);
  CHECK(next.stock_cm == 0);
  CHECK(next.pipe_cm == std::vector<int>{1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(next.pipe_am == std::vector<int>{0, 0});
}

TEST_CASE("transition: spare installed immediately") {
  auto p = instance1();
  auto s = make_state(p, 6, 1, 1, 0);
  auto next = transition(s, {0, 0}, {1, 0}, p);
  CHECK(next.op_cm == 6);  // failure replaced from cm stock
  CHECK(next.op_am == 1);
  CHECK(next.stock_cm == 0);
}

TEST_CASE("transition conservation over a random walk") {
  auto p = instance1();
  RngStream rng(20240811);
  SystemState s = initial_state(p);
  for (int t = 0; t < 1000; ++t) {
    const auto pre_ip = inventory_position(s, p);
    auto ds = feasible_decisions(s, p);
    const Decision d = ds[rng.next_below(ds.size())];
    const int kc = static_cast<int>(
        rng.next_below(static_cast<std::uint64_t>(s.op_cm) + 1));
    const int ka = static_cast<int>(
        rng.next_below(static_cast<std::uint64_t>(s.op_am) + 1));
    s = transition(s, d, {kc, ka}, p);
    // Conservation of the installed base.
    CHECK(s.op_cm + s.op_am + backorders(s, p) == p.installed_base);
    // Inventory-position balance identity.
    CHECK(inventory_position(s, p) ==
          pre_ip + p.batch_cm * d.batches_cm + d.items_am - kc - ka);
  }
}

TEST_CASE("period cost: component arithmetic") {
  auto p = instance1();  // k_C=2000, k_A=0, c_C=5000, Q=5, c_A=10000
  auto s = make_state(p, 7, 0, 0, 0);
  auto c = period_cost(s, {1, 2}, {0, 0}, p);
  CHECK(c.purchase == doctest::Approx(2000 + 25000 + 20000));

  auto sh = make_state(p, 7, 0, 2, 1);  // h = 29
  CHECK(period_cost(sh, {0, 0}, {0, 0}, p).holding == doctest::Approx(87));

  // b = 5725, B = 1, one more failure, no stock.
  auto sb = make_state(p, 5, 1, 0, 0);
  CHECK(period_cost(sb, {0, 0}, {1, 0}, p).backorder ==
        doctest::Approx(11450));

  // Components sum to the total and stay nonnegative.
  auto all = period_cost(sb, {1, 1}, {1, 0}, p);
  CHECK(all.total == doctest::Approx(all.purchase + all.holding +
                                     all.backorder + all.maintenance));
  CHECK(all.purchase >= 0);
  CHECK(all.holding >= 0);
  CHECK(all.backorder >= 0);
  CHECK(all.maintenance >= 0);
}

TEST_CASE("expected period cost averages the realized cost") {
  auto p = instance1();
  auto s = make_state(p, 5, 2, 0, 0);
  const Decision d{0, 1};
  const auto pc = failure_pmf(s.op_cm, p.mu_cm, p.var_cm, p.family);
  const auto pa = failure_pmf(s.op_am, p.mu_am, p.var_am, p.family);
  double expect = 0.0;
  for (int kc = 0; kc <= s.op_cm; ++kc)
    for (int ka = 0; ka <= s.op_am; ++ka)
      expect += pc[static_cast<std::size_t>(kc)] *
                pa[static_cast<std::size_t>(ka)] *
                period_cost(s, d, {kc, ka}, p).total;
  CHECK(expected_period_cost(s, d, p) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("enumerate_transitions: probabilities sum to one") {
  auto p = instance1();
  auto s = make_state(p, 4, 2, 0, 0);
  const auto succ = enumerate_transitions(s, {0, 1}, p);
  double total = 0.0;
  for (const auto& [state, prob] : succ) {
    total += prob;
    CHECK(prob > 0.0);
  }
  CHECK(std::abs(total - 1.0) < 1e-10);
  CHECK(succ.size() <= static_cast<std::size_t>((4 + 1) * (2 + 1)));

  // Degenerate support.
  auto s0 = make_state(p, 0, 0, 0, 0);
  CHECK(enumerate_transitions(s0, {0, 0}, p).size() == 1);
  auto s11 = make_state(p, 1, 1, 0, 0);
  CHECK(enumerate_transitions(s11, {0, 0}, p).size() <= 4);
}

TEST_CASE("enumerate_transitions matches Monte-Carlo frequencies") {
  auto p = instance1();
  auto s = make_state(p, 4, 3, 0, 0);
  const Decision d{0, 0};
  const auto succ = enumerate_transitions(s, d, p);
  const int trials = 200'000;
  const auto pc = failure_pmf(s.op_cm, p.mu_cm, p.var_cm, p.family);
  const auto pa = failure_pmf(s.op_am, p.mu_am, p.var_am, p.family);
  auto sample_count = [&](const std::vector<double>& pmf, double u) {
    int k = 0;
    double cum = pmf[0];
    while (u >= cum && k + 1 < static_cast<int>(pmf.size()))
      cum += pmf[static_cast<std::size_t>(++k)];
    return k;
  };
  std::vector<long> hits(succ.size(), 0);
  RngStream rng(7);
  for (int t = 0; t < trials; ++t) {
    const int kc = sample_count(pc, rng.next_uniform());
    const int ka = sample_count(pa, rng.next_uniform());
    const auto next = transition(s, d, {kc, ka}, p);
    for (std::size_t i = 0; i < succ.size(); ++i)
      if (succ[i].first == next) {
        ++hits[i];
        break;
      }
  }
  for (std::size_t i = 0; i < succ.size(); ++i) {
    const double phat = static_cast<double>(hits[i]) / trials;
    const double se =
        std::sqrt(succ[i].second * (1 - succ[i].second) / trials);
    CHECK(std::abs(phat - succ[i].second) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("state invariants are enforced") {
  auto p = instance1();
  auto bad = make_state(p, 7, 1, 0, 0);  // 8 > N
  CHECK_THROWS_AS(check_state(bad, p), std::logic_error);
  auto bad2 = make_state(p, 6, 0, 1, 0);  // stock while backordered
  CHECK_THROWS_AS(check_state(bad2, p), std::logic_error);
  auto ok = make_state(p, 7, 0, 1, 0);
  CHECK_NOTHROW(check_state(ok, p));
}

TEST_CASE("simplify_params blends the failure process") {
  auto p = instance1();
  auto p0 = simplify_params(p, 0.0);
  CHECK(p0.mu_cm == doctest::Approx(p.mu_cm));
  CHECK(p0.var_cm == doctest::Approx(p.var_cm));
  auto p1 = simplify_params(p, 1.0);
  CHECK(p1.mu_cm == doctest::Approx(p.mu_am));
  CHECK(p1.var_cm == doctest::Approx(p.var_am));
  InstanceParams q = p;
  q.mu_cm = 0.01;
  q.mu_am = 0.02;
  q.var_cm = 0.02;
  q.var_am = 0.04;
  auto ph = simplify_params(q, 0.5);
  CHECK(ph.mu_cm == doctest::Approx(0.015));
  CHECK(ph.var_cm == doctest::Approx(0.030025));
}
