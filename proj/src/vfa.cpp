#include "dsinv/vfa.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dsinv/sim.hpp"
#include "dsinv/textio.hpp"

namespace dsinv {

RecursiveLeastSquares::RecursiveLeastSquares(int dim, double prior_scale)
    : dim_(dim),
      w_(static_cast<std::size_t>(dim), 0.0),
      p_(static_cast<std::size_t>(dim) * dim, 0.0),
      k_(static_cast<std::size_t>(dim), 0.0),
      px_(static_cast<std::size_t>(dim), 0.0) {
  for (int i = 0; i < dim; ++i)
    p_[static_cast<std::size_t>(i) * dim + i] = prior_scale;
}

void RecursiveLeastSquares::update(const double* x, double y) {
  const auto d = static_cast<std::size_t>(dim_);
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += p_[i * d + j] * x[j];
    px_[i] = acc;
  }
  double denom = 1.0;
  for (std::size_t i = 0; i < d; ++i) denom += x[i] * px_[i];
  for (std::size_t i = 0; i < d; ++i) k_[i] = px_[i] / denom;
  double err = y;
  for (std::size_t i = 0; i < d; ++i) err -= w_[i] * x[i];
  for (std::size_t i = 0; i < d; ++i) w_[i] += k_[i] * err;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) p_[i * d + j] -= k_[i] * px_[j];
}

double RecursiveLeastSquares::predict(const double* x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i)
    acc += w_[i] * x[i];
  return acc;
}

double LinearVfa::value(const float* features) const {
  const int d = spec.dim();
  double acc = weights[static_cast<std::size_t>(d)];  // intercept
  for (int i = 0; i < d; ++i)
    acc += weights[static_cast<std::size_t>(i)] * features[i];
  return acc;
}

namespace {

double greedy_value(const SimEngine& engine, const SimEngine::State& s,
                    const LinearVfa& vfa, const double* theta,
                    double discount, Decision* argmin,
                    std::vector<float>& feat) {
  const InstanceParams& p = engine.params();
  const SystemState sys = engine.to_system(s);
  double best = 0.0;
  Decision best_d{0, 0};
  bool first = true;
  for (const Decision& d : feasible_decisions(sys, p)) {
    vfa.spec.write(s, d, p, theta, feat.data());
    const double q =
        expected_period_cost(sys, d, p) + discount * vfa.value(feat.data());
    if (first || q < best) {
      best = q;
      best_d = d;
      first = false;
    }
  }
  if (argmin) *argmin = best_d;
  return best;
}

}  // namespace

LinearVfa avi_train(const EnvSource& env, const AviConfig& config) {
  LinearVfa vfa;
  vfa.spec = env.spec();
  const int dim = vfa.spec.dim();
  RecursiveLeastSquares rls(dim + 1, config.rls_prior);

  std::vector<float> feat(static_cast<std::size_t>(dim), 0.0f);
  std::vector<double> phi_prev(static_cast<std::size_t>(dim) + 1, 0.0);
  std::vector<double> phi(static_cast<std::size_t>(dim) + 1, 1.0);
  bool have_prev = false;

  SimEngine engine(env.episode(config.seed, 0).params);
  EnvSource::Episode ep;
  SimEngine::State s{};
  const double* theta = nullptr;

  vfa.weights.assign(static_cast<std::size_t>(dim) + 1, 0.0);
  long updates = 0;
  for (int n = 0; n < config.samples; ++n) {
    if (n % config.horizon == 0) {
      ep = env.episode(config.seed, n / config.horizon);
      engine = SimEngine(ep.params);
      s = engine.initial();
      theta = ep.theta_norm.empty() ? nullptr : ep.theta_norm.data();
      have_prev = false;  // the target chain breaks across resets
    }
    if (n > 0 && have_prev) {
      const double v_hat = greedy_value(engine, s, vfa, theta,
                                        config.discount, nullptr, feat);
      rls.update(phi_prev.data(), v_hat);
      ++updates;
      for (std::size_t i = 0; i <= static_cast<std::size_t>(dim); ++i) {
        vfa.weights[i] = rls.weights()[i];
        if (std::abs(vfa.weights[i]) > config.weight_bound)
          throw std::runtime_error(
              "avi diverged: weight magnitude exceeded bound after " +
              std::to_string(updates) + " updates");
      }
    }
    // Exploration transition.
    Decision move{0, 0};
    const double coin = uniform_at(config.seed, 0, static_cast<std::uint64_t>(n),
                                   Draw::kPolicy, 1);
    if (coin < config.epsilon) {
      move = engine.random_feasible(s, config.seed, 0,
                                    static_cast<std::uint64_t>(n));
    } else {
      greedy_value(engine, s, vfa, theta, config.discount, &move, feat);
    }
    vfa.spec.write(s, move, engine.params(), theta, feat.data());
    for (int i = 0; i < dim; ++i) phi_prev[static_cast<std::size_t>(i)] = feat[static_cast<std::size_t>(i)];
    phi_prev[static_cast<std::size_t>(dim)] = 1.0;  // intercept
    have_prev = true;
    const auto failures = engine.sample_failures(
        s, config.seed, 0, static_cast<std::uint64_t>(n));
    engine.step(s, move, failures);
  }
  return vfa;
}

Decision vfa_greedy_decide(const SystemState& state, const LinearVfa& vfa,
                           const InstanceParams& params,
                           const std::vector<double>& theta_norm,
                           double discount) {
  std::vector<float> feat(static_cast<std::size_t>(vfa.spec.dim()), 0.0f);
  const double* theta = theta_norm.empty() ? nullptr : theta_norm.data();
  double best = 0.0;
  Decision best_d{0, 0};
  bool first = true;
  for (const Decision& d : feasible_decisions(state, params)) {
    vfa.spec.write(state, d, params, theta, feat.data());
    const double q =
        expected_period_cost(state, d, params) + discount * vfa.value(feat.data());
    if (first || q < best) {
      best = q;
      best_d = d;
      first = false;
    }
  }
  return best_d;
}

Decision VfaPolicy::decide(const SystemState& state,
                           const InstanceParams& params) const {
  std::vector<double> theta;
  if (vfa_.spec.theta_dim > 0)
    theta = vfa_.spec.normalize_theta(instance_theta(params));
  return vfa_greedy_decide(state, vfa_, params, theta, discount_);
}

void VfaPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = vfa-greedy\n";
  out << "discount = " << format_hex_double(discount_) << "\n";
  out << "slots_cm = " << vfa_.spec.slots_cm << "\n";
  out << "slots_am = " << vfa_.spec.slots_am << "\n";
  out << "theta_dim = " << vfa_.spec.theta_dim << "\n";
  auto dump = [&out](const char* name, const std::vector<double>& xs) {
    out << name << " =";
    for (double x : xs) out << " " << format_hex_double(x);
    out << "\n";
  };
  if (vfa_.spec.theta_dim > 0) {
    dump("theta_min", vfa_.spec.theta_min);
    dump("theta_max", vfa_.spec.theta_max);
  }
  dump("weights", vfa_.weights);
}

}  // namespace dsinv
