#include "dsinv/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dsinv/parallel.hpp"

namespace dsinv {

namespace {

using U128 = unsigned __int128;

U128 to128(const PackedKey& k) {
  return (static_cast<U128>(k.hi) << 64) | k.lo;
}

PackedKey from128(U128 v) {
  return {static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
}

// Compressed successor rows for one fixed policy.
struct Rows {
  std::vector<std::size_t> offset;
  std::vector<std::int32_t> idx;
  std::vector<double> prob;
  std::vector<double> cost;
};

Rows build_rows(const Model& model, const std::vector<Decision>& policy,
                int threads) {
  const std::size_t n = model.size();
  std::vector<std::vector<std::pair<std::int32_t, double>>> rows(n);
  std::vector<double> cost(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto s = static_cast<std::int32_t>(i);
    model.successors(s, policy[i], rows[i]);
    cost[i] = model.cost(s, policy[i]);
  });
  Rows r;
  r.offset.resize(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i)
    r.offset[i + 1] = r.offset[i] + rows[i].size();
  r.idx.resize(r.offset[n]);
  r.prob.resize(r.offset[n]);
  r.cost = std::move(cost);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t at = r.offset[i];
    for (const auto& [j, p] : rows[i]) {
      r.idx[at] = j;
      r.prob[at] = p;
      ++at;
    }
  }
  return r;
}

EvalResult evaluate_rows(const Rows& rows, std::int32_t reference,
                         const EvalOptions& opts) {
  const std::size_t n = rows.cost.size();
  const double tau = opts.damping;
  std::vector<double> u(n, 0.0), next(n, 0.0);
  EvalResult out;
  for (long sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    parallel_for(n, opts.threads, [&](std::size_t i) {
      double acc = 0.0;
      for (std::size_t a = rows.offset[i]; a < rows.offset[i + 1]; ++a)
        acc += rows.prob[a] * u[static_cast<std::size_t>(rows.idx[a])];
      next[i] = rows.cost[i] + tau * acc + (1.0 - tau) * u[i];
    });
    double lo = next[0] - u[0], hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      const double d = next[i] - u[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    out.g = 0.5 * (lo + hi);
    out.residual = 0.5 * (hi - lo);
    out.sweeps = sweep + 1;
    const double center = next[static_cast<std::size_t>(reference)];
    for (std::size_t i = 0; i < n; ++i) u[i] = next[i] - center;
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged)
    throw std::runtime_error(
        "policy evaluation did not reach tolerance after " +
        std::to_string(out.sweeps) +
        " sweeps (residual " + std::to_string(out.residual) + ")");
  out.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.v[i] = tau * u[i];
  return out;
}

}  // namespace

Model::Model(std::shared_ptr<const StateSpace> space)
    : space_(std::move(space)),
      unit_cm_(space_->codec().newest_cm_unit()),
      unit_am_(space_->codec().newest_am_unit()) {}

std::vector<Decision> Model::decisions(std::int32_t state) const {
  if (space_->kind() == ModelKind::kFull)
    return feasible_decisions(space_->full_state(state), params());
  return feasible_decisions(space_->single_state(state), params());
}

double Model::cost(std::int32_t state, const Decision& decision) const {
  if (space_->kind() == ModelKind::kFull)
    return expected_period_cost(space_->full_state(state), decision, params());
  return expected_period_cost(space_->single_state(state), decision, params());
}

void Model::base_successors(std::int32_t state, BaseSuccessors& out) const {
  out.keys.clear();
  out.probs.clear();
  const auto& p = params();
  if (space_->kind() == ModelKind::kFull) {
    const SystemState s = space_->full_state(state);
    const auto pmf_cm = failure_pmf(s.op_cm, p.mu_cm, p.var_cm, p.family);
    const auto pmf_am = failure_pmf(s.op_am, p.mu_am, p.var_am, p.family);
    for (int kc = 0; kc <= s.op_cm; ++kc) {
      const double pc = pmf_cm[static_cast<std::size_t>(kc)];
      if (pc == 0.0) continue;
      for (int ka = 0; ka <= s.op_am; ++ka) {
        const double pr = pc * pmf_am[static_cast<std::size_t>(ka)];
        if (pr == 0.0) continue;
        out.keys.push_back(
            space_->codec().pack(transition(s, {0, 0}, {kc, ka}, p)));
        out.probs.push_back(pr);
      }
    }
  } else {
    const SimplifiedState s = space_->single_state(state);
    const auto pmf = failure_pmf(s.operating, p.mu_cm, p.var_cm, p.family);
    for (int k = 0; k <= s.operating; ++k) {
      const double pr = pmf[static_cast<std::size_t>(k)];
      if (pr == 0.0) continue;
      out.keys.push_back(space_->codec().pack(transition(s, {0, 0}, k, p)));
      out.probs.push_back(pr);
    }
  }
}

std::int32_t Model::succ_index(const PackedKey& base,
                               const Decision& decision) const {
  const U128 key = to128(base) +
                   static_cast<U128>(decision.batches_cm) * to128(unit_cm_) +
                   static_cast<U128>(decision.items_am) * to128(unit_am_);
  return space_->index(from128(key));
}

void Model::successors(std::int32_t state, const Decision& decision,
                       std::vector<std::pair<std::int32_t, double>>& out) const {
  BaseSuccessors base;
  base_successors(state, base);
  out.clear();
  out.reserve(base.keys.size());
  for (std::size_t k = 0; k < base.keys.size(); ++k) {
    const std::int32_t j = succ_index(base.keys[k], decision);
    if (j < 0)
      throw std::logic_error("transition left the enumerated state space");
    out.emplace_back(j, base.probs[k]);
  }
}

EvalResult policy_evaluation(const Model& model,
                             const std::vector<Decision>& policy,
                             const EvalOptions& opts) {
  if (policy.size() != model.size())
    throw std::invalid_argument("policy size does not match state space");
  const Rows rows = build_rows(model, policy, opts.threads);
  return evaluate_rows(rows, model.space().reference_index(), opts);
}

EvalResult policy_evaluation_dense(const Model& model,
                                   const std::vector<Decision>& policy) {
  const std::size_t n = model.size();
  if (n >= 2000)
    throw std::invalid_argument("dense evaluation is limited to < 2000 states");
  const Rows rows = build_rows(model, policy, 1);
  // Unknowns [v_0..v_{n-1}, g]: v_i + g - sum_j P_ij v_j = c_i, v_ref = 0.
  const std::size_t m = n + 1;
  std::vector<double> a(m * m, 0.0), b(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * m + i] += 1.0;
    a[i * m + n] = 1.0;
    for (std::size_t k = rows.offset[i]; k < rows.offset[i + 1]; ++k)
      a[i * m + static_cast<std::size_t>(rows.idx[k])] -= rows.prob[k];
    b[i] = rows.cost[i];
  }
  const auto ref = static_cast<std::size_t>(model.space().reference_index());
  a[n * m + ref] = 1.0;
  b[n] = 0.0;

  // Gaussian elimination with partial pivoting.
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
    if (std::abs(a[piv * m + col]) < 1e-300)
      throw std::runtime_error(
          "singular evaluation system; chain is not unichain");
    if (piv != col) {
      for (std::size_t c = 0; c < m; ++c)
        std::swap(a[piv * m + c], a[col * m + c]);
      std::swap(b[piv], b[col]);
    }
    const double d = a[col * m + col];
    for (std::size_t r = col + 1; r < m; ++r) {
      const double f = a[r * m + col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < m; ++c) a[r * m + c] -= f * a[col * m + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(m, 0.0);
  for (std::size_t r = m; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < m; ++c) acc -= a[r * m + c] * x[c];
    x[r] = acc / a[r * m + r];
  }
  EvalResult out;
  out.g = x[n];
  out.v.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
  out.converged = true;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = rows.cost[i] - out.g - out.v[i];
    for (std::size_t k = rows.offset[i]; k < rows.offset[i + 1]; ++k)
      acc += rows.prob[k] * out.v[static_cast<std::size_t>(rows.idx[k])];
    res = std::max(res, std::abs(acc));
  }
  out.residual = res;
  return out;
}

namespace {

// One greedy improvement pass; returns the number of changed states.
std::size_t improve(const Model& model, const std::vector<double>& v,
                    std::vector<Decision>& policy, double tie_tol,
                    int threads) {
  const std::size_t n = model.size();
  std::vector<char> changed(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto s = static_cast<std::int32_t>(i);
    Model::BaseSuccessors base;
    model.base_successors(s, base);
    const auto options = model.decisions(s);
    double best_q = 0.0;
    std::vector<double> qs(options.size());
    for (std::size_t d = 0; d < options.size(); ++d) {
      double q = model.cost(s, options[d]);
      for (std::size_t k = 0; k < base.keys.size(); ++k) {
        const std::int32_t j = model.succ_index(base.keys[k], options[d]);
        q += base.probs[k] * v[static_cast<std::size_t>(j)];
      }
      qs[d] = q;
      if (d == 0 || q < best_q) best_q = q;
    }
    const double cutoff = best_q + tie_tol * (1.0 + std::abs(best_q));
    for (std::size_t d = 0; d < options.size(); ++d) {
      if (qs[d] <= cutoff) {
        if (!(options[d] == policy[i])) {
          policy[i] = options[d];
          changed[i] = 1;
        }
        break;
      }
    }
  });
  std::size_t total = 0;
  for (char c : changed) total += static_cast<std::size_t>(c);
  return total;
}

}  // namespace

ExactSolution policy_iteration(const Model& model, const SolveOptions& opts) {
  const std::size_t n = model.size();
  ExactSolution sol;
  sol.reference_state = model.space().reference_index();
  sol.policy.assign(n, Decision{0, 0});
  for (sol.rounds = 1; sol.rounds <= opts.max_rounds; ++sol.rounds) {
    EvalResult eval = policy_evaluation(model, sol.policy, opts.eval);
    sol.g = eval.g;
    sol.v = std::move(eval.v);
    sol.g_history.push_back(sol.g);
    const std::size_t switched =
        improve(model, sol.v, sol.policy, opts.tie_tol, opts.eval.threads);
    if (switched == 0) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

double bellman_residual(const Model& model, const ExactSolution& solution,
                        int threads) {
  const std::size_t n = model.size();
  std::vector<double> res(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto s = static_cast<std::int32_t>(i);
    Model::BaseSuccessors base;
    model.base_successors(s, base);
    double best = 0.0;
    bool first = true;
    for (const Decision& d : model.decisions(s)) {
      double q = model.cost(s, d);
      for (std::size_t k = 0; k < base.keys.size(); ++k)
        q += base.probs[k] *
             solution.v[static_cast<std::size_t>(
                 model.succ_index(base.keys[k], d))];
      if (first || q < best) best = q;
      first = false;
    }
    res[i] = std::abs(solution.v[i] - (best - solution.g));
  });
  return *std::max_element(res.begin(), res.end());
}

namespace {

// Count the closed strongly connected components of the policy chain; more
// than one means the stationary distribution is not unique.
int closed_class_count(const Rows& rows) {
  const std::size_t n = rows.cost.size();
  // Iterative Tarjan.
  std::vector<std::int32_t> low(n, -1), disc(n, -1), comp(n, -1);
  std::vector<std::int32_t> stack, frame_state;
  std::vector<std::size_t> frame_edge;
  std::vector<char> on_stack(n, 0);
  std::int32_t time = 0, ncomp = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    frame_state.push_back(static_cast<std::int32_t>(root));
    frame_edge.push_back(rows.offset[root]);
    disc[root] = low[root] = time++;
    stack.push_back(static_cast<std::int32_t>(root));
    on_stack[root] = 1;
    while (!frame_state.empty()) {
      const auto s = static_cast<std::size_t>(frame_state.back());
      if (frame_edge.back() < rows.offset[s + 1]) {
        const auto t =
            static_cast<std::size_t>(rows.idx[frame_edge.back()++]);
        if (disc[t] < 0) {
          disc[t] = low[t] = time++;
          stack.push_back(static_cast<std::int32_t>(t));
          on_stack[t] = 1;
          frame_state.push_back(static_cast<std::int32_t>(t));
          frame_edge.push_back(rows.offset[t]);
        } else if (on_stack[t]) {
          low[s] = std::min(low[s], disc[t]);
        }
      } else {
        if (low[s] == disc[s]) {
          while (true) {
            const auto w = static_cast<std::size_t>(stack.back());
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = ncomp;
            if (w == s) break;
          }
          ++ncomp;
        }
        frame_state.pop_back();
        frame_edge.pop_back();
        if (!frame_state.empty()) {
          const auto parent = static_cast<std::size_t>(frame_state.back());
          low[parent] = std::min(low[parent], low[s]);
        }
      }
    }
  }
  std::vector<char> open(static_cast<std::size_t>(ncomp), 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = rows.offset[i]; k < rows.offset[i + 1]; ++k)
      if (comp[static_cast<std::size_t>(rows.idx[k])] != comp[i])
        open[static_cast<std::size_t>(comp[i])] = 1;
  int closed = 0;
  for (char o : open) closed += o ? 0 : 1;
  return closed;
}

}  // namespace

std::vector<double> stationary_distribution(const Model& model,
                                            const std::vector<Decision>& policy,
                                            double l1_tol, long max_iters) {
  const Rows rows = build_rows(model, policy, 1);
  if (closed_class_count(rows) != 1)
    throw std::runtime_error(
        "policy chain is multichain; stationary distribution not unique");
  const std::size_t n = rows.cost.size();
  const double tau = 0.9;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  for (long it = 0; it < max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = pi[i];
      if (w == 0.0) continue;
      for (std::size_t k = rows.offset[i]; k < rows.offset[i + 1]; ++k)
        next[static_cast<std::size_t>(rows.idx[k])] += tau * w * rows.prob[k];
      next[i] += (1.0 - tau) * w;
    }
    double drift = 0.0;
    for (std::size_t i = 0; i < n; ++i) drift += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (drift <= l1_tol * tau * 0.5) {
      // Confirm against the undamped chain.
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = rows.offset[i]; k < rows.offset[i + 1]; ++k)
          next[static_cast<std::size_t>(rows.idx[k])] += pi[i] * rows.prob[k];
      double res = 0.0;
      for (std::size_t i = 0; i < n; ++i) res += std::abs(next[i] - pi[i]);
      if (res <= l1_tol) return pi;
    }
  }
  throw std::runtime_error("stationary distribution did not converge");
}

double steady_state_am_fraction(const Model& model,
                                const ExactSolution& solution) {
  const auto pi = stationary_distribution(model, solution.policy);
  double am = 0.0, total = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const Decision& d = solution.policy[i];
    am += pi[i] * d.items_am;
    total += pi[i] * (d.items_am + d.batches_cm * model.params().batch_cm);
  }
  return total == 0.0 ? 0.0 : am / total;
}

int determine_S(const InstanceParams& params, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  const double rate = std::max(params.mu_cm, params.mu_am);
  const double lambda =
      (params.lead_cm + 1) * params.installed_base * rate;
  const int floor_s = static_cast<int>(std::ceil(lambda - 1e-12));
  // Poisson tail of cycle demand at the dominant failure rate.
  double pk = std::exp(-lambda);
  double cdf = pk;
  int s = 0;
  while (1.0 - cdf >= epsilon && s < 100000) {
    ++s;
    pk *= lambda / s;
    cdf += pk;
  }
  return std::max(s, floor_s);
}

}  // namespace dsinv
