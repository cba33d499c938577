#include "dsinv/dcl.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "dsinv/parallel.hpp"
#include "dsinv/textio.hpp"

namespace dsinv {

DecisionGrid DecisionGrid::build(int budget, int batch_cm) {
  DecisionGrid g;
  g.budget = budget;
  g.batch_cm = batch_cm;
  for (int bc = 0; bc * batch_cm <= budget; ++bc)
    for (int ia = 0; bc * batch_cm + ia <= budget; ++ia)
      g.all.push_back({bc, ia});
  return g;
}

int DecisionGrid::index_of(const Decision& d) const {
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i] == d) return static_cast<int>(i);
  return -1;
}

ClassifierPolicy::ClassifierPolicy(FeatureSpec spec, Mlp net, DecisionGrid grid)
    : spec_(std::move(spec)), net_(std::move(net)), grid_(std::move(grid)) {
  if (net_.input_dim() != spec_.dim() || net_.output_dim() != grid_.size())
    throw std::invalid_argument("classifier shape mismatch");
}

Decision ClassifierPolicy::decide_fast(const SimEngine::State& state,
                                       const SimEngine& engine,
                                       const double* theta_norm) const {
  thread_local std::vector<float> feat, logits, scratch;
  feat.resize(static_cast<std::size_t>(spec_.dim()));
  logits.resize(static_cast<std::size_t>(grid_.size()));
  scratch.resize(static_cast<std::size_t>(net_.scratch_size()));
  spec_.write(state, {0, 0}, engine.params(), theta_norm, feat.data());
  net_.forward(feat.data(), logits.data(), scratch.data());
  const int budget = std::max(engine.budget(state), 0);
  const int batch = engine.params().batch_cm;
  int best = -1;
  for (int i = 0; i < grid_.size(); ++i) {
    const Decision& d = grid_.all[static_cast<std::size_t>(i)];
    if (d.batches_cm * batch + d.items_am > budget) continue;
    if (best < 0 || logits[static_cast<std::size_t>(i)] >
                        logits[static_cast<std::size_t>(best)])
      best = i;
  }
  return best < 0 ? Decision{0, 0} : grid_.all[static_cast<std::size_t>(best)];
}

Decision ClassifierPolicy::decide(const SystemState& state,
                                  const InstanceParams& params) const {
  std::vector<float> feat(static_cast<std::size_t>(spec_.dim()));
  std::vector<float> logits(static_cast<std::size_t>(grid_.size()));
  std::vector<float> scratch(static_cast<std::size_t>(net_.scratch_size()));
  std::vector<double> theta;
  const double* tp = nullptr;
  if (spec_.theta_dim > 0) {
    theta = spec_.normalize_theta(instance_theta(params));
    tp = theta.data();
  }
  spec_.write(state, {0, 0}, params, tp, feat.data());
  net_.forward(feat.data(), logits.data(), scratch.data());
  const int budget =
      std::max(params.max_in_system - inventory_position(state, params), 0);
  int best = -1;
  for (int i = 0; i < grid_.size(); ++i) {
    const Decision& d = grid_.all[static_cast<std::size_t>(i)];
    if (d.batches_cm * params.batch_cm + d.items_am > budget) continue;
    if (best < 0 || logits[static_cast<std::size_t>(i)] >
                        logits[static_cast<std::size_t>(best)])
      best = i;
  }
  return best < 0 ? Decision{0, 0} : grid_.all[static_cast<std::size_t>(best)];
}

void ClassifierPolicy::save(std::ostream& out) const {
  out << "# dsinv policy v1\n";
  out << "type = classifier\n";
  out << "slots_cm = " << spec_.slots_cm << "\n";
  out << "slots_am = " << spec_.slots_am << "\n";
  out << "theta_dim = " << spec_.theta_dim << "\n";
  auto dump_d = [&out](const char* name, const std::vector<double>& xs) {
    out << name << " =";
    for (double x : xs) out << " " << format_hex_double(x);
    out << "\n";
  };
  if (spec_.theta_dim > 0) {
    dump_d("theta_min", spec_.theta_min);
    dump_d("theta_max", spec_.theta_max);
  }
  out << "grid_budget = " << grid_.budget << "\n";
  out << "grid_batch = " << grid_.batch_cm << "\n";
  out << "layers =";
  for (int d : net_.dims()) out << " " << d;
  out << "\n";
  for (std::size_t l = 0; l < net_.weights().size(); ++l) {
    out << "w" << l << " =";
    for (float v : net_.weights()[l])
      out << " " << format_hex_double(static_cast<double>(v));
    out << "\n";
    out << "b" << l << " =";
    for (float v : net_.biases()[l])
      out << " " << format_hex_double(static_cast<double>(v));
    out << "\n";
  }
}

std::size_t StateHash::operator()(const SimEngine::State& s) const {
  // The struct has no padding and unused pipeline slots stay zero.
  const auto* bytes = reinterpret_cast<const unsigned char*>(&s);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < sizeof(SimEngine::State); ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

bool StateEq::operator()(const SimEngine::State& a,
                         const SimEngine::State& b) const {
  return std::memcmp(&a, &b, sizeof(SimEngine::State)) == 0;
}

Decision ClassifierContinuation::decide(const SimEngine& engine,
                                        const SimEngine::State& s,
                                        std::uint64_t, std::uint64_t,
                                        std::uint64_t,
                                        DecisionCache* cache) const {
  if (cache) {
    auto it = cache->find(s);
    if (it != cache->end()) return it->second;
  }
  const Decision d = policy_.decide_fast(s, engine, theta_);
  if (cache) cache->emplace(s, d);
  return d;
}

double dcl_rollout_estimate(const SimEngine& engine,
                            const SimEngine::State& start,
                            const Decision& first, const Continuation& pi,
                            int scenarios, int horizon, std::uint64_t master,
                            std::uint64_t stream_base, DecisionCache* cache) {
  double total = 0.0;
  for (int m = 0; m < scenarios; ++m) {
    const std::uint64_t rep = stream_base + static_cast<std::uint64_t>(m);
    SimEngine::State s = start;
    double cost = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const Decision d =
          t == 0 ? first
                 : pi.decide(engine, s, master, rep,
                             static_cast<std::uint64_t>(t), cache);
      const auto k =
          engine.sample_failures(s, master, rep, static_cast<std::uint64_t>(t));
      cost += engine.step(s, d, k);
    }
    total += cost;
  }
  return total / static_cast<double>(scenarios);
}

namespace {

// Stream tags keeping the different draw families disjoint.
constexpr std::uint64_t kWarmTag = 0x11'0000'0000ull;
constexpr std::uint64_t kStepTag = 0x22'0000'0000ull;
constexpr std::uint64_t kValTag = 0x33'0000'0000ull;

std::uint64_t rollout_base(int round, long sample) {
  return (static_cast<std::uint64_t>(round) << 56) |
         (static_cast<std::uint64_t>(sample) << 24);
}

Decision argmin_label(const SimEngine& engine, const SimEngine::State& s,
                      const Continuation& pi, int scenarios, int horizon,
                      std::uint64_t master, std::uint64_t stream_base,
                      int threads, std::vector<DecisionCache>& caches) {
  const int budget = std::max(engine.budget(s), 0);
  const int count = engine.decision_count(budget);
  std::vector<double> est(static_cast<std::size_t>(count));
  // Worker id must mirror parallel_for's static partition exactly so no two
  // threads ever share a cache.
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)),
                            static_cast<std::size_t>(count));
  const std::size_t chunk =
      (static_cast<std::size_t>(count) + workers - 1) / workers;
  parallel_for(
      static_cast<std::size_t>(count), threads,
      [&](std::size_t di) {
        const std::size_t worker = di / chunk;
        DecisionCache* cache =
            worker < caches.size() ? &caches[worker] : &caches[0];
        est[di] = dcl_rollout_estimate(
            engine, s, engine.decision_at(budget, static_cast<int>(di)), pi,
            scenarios, horizon, master, stream_base, cache);
      },
      1);
  int best = 0;
  for (int i = 1; i < count; ++i)
    if (est[static_cast<std::size_t>(i)] < est[static_cast<std::size_t>(best)])
      best = i;
  return engine.decision_at(budget, best);
}

double validate_policy(const EnvSource& env, const ClassifierPolicy& policy,
                       const RolloutConfig& cfg, std::uint64_t seed,
                       int round) {
  double total = 0.0;
  DecisionCache cache;
  for (int rep = 0; rep < cfg.validation_reps; ++rep) {
    const auto ep = env.episode(seed, (static_cast<long>(round) << 20) + rep);
    SimEngine engine(ep.params);
    const double* theta =
        ep.theta_norm.empty() ? nullptr : ep.theta_norm.data();
    ClassifierContinuation pi(policy, theta);
    SimEngine::State s = engine.initial();
    double cost = 0.0;
    long counted = 0;
    for (long t = 0; t < cfg.validation_periods; ++t) {
      const Decision d = pi.decide(engine, s, 0, 0, 0, &cache);
      const auto k = engine.sample_failures(
          s, seed, kValTag + static_cast<std::uint64_t>(rep),
          static_cast<std::uint64_t>(t));
      const double c = engine.step(s, d, k);
      if (t >= cfg.validation_warmup) {
        cost += c;
        ++counted;
      }
    }
    cache.clear();  // instance changes between reps under EPL
    total += cost / static_cast<double>(std::max<long>(counted, 1));
  }
  return total / static_cast<double>(cfg.validation_reps);
}

}  // namespace

DclResult dcl_train(const EnvSource& env, const RolloutConfig& config,
                    const NetConfig& net_config, std::uint64_t seed) {
  DclResult result;
  const FeatureSpec& spec = env.spec();
  int grid_budget = 0, grid_batch = 1;
  env.decision_bounds(&grid_budget, &grid_batch);
  const DecisionGrid grid = DecisionGrid::build(grid_budget, grid_batch);
  const int threads = std::max(config.threads, 1);

  for (int round = 0; round < config.n_iterations; ++round) {
    // Continuation policy for this round's rollouts.
    RandomContinuation random_pi;
    std::unique_ptr<ClassifierContinuation> trained_pi;
    std::vector<double> cont_theta;  // bound to the current episode below

    std::vector<float> xs;
    std::vector<int> ys;
    xs.reserve(static_cast<std::size_t>(config.n_samples) *
               static_cast<std::size_t>(spec.dim()));
    ys.reserve(static_cast<std::size_t>(config.n_samples));

    long episode_index = 0;
    EnvSource::Episode ep;
    std::unique_ptr<SimEngine> engine;
    SimEngine::State s{};
    std::vector<DecisionCache> caches(static_cast<std::size_t>(threads));
    const Continuation* pi = nullptr;

    auto reset_episode = [&](long k) {
      ep = env.episode(seed, (static_cast<long>(round) << 32) + episode_index);
      ++episode_index;
      engine = std::make_unique<SimEngine>(ep.params);
      cont_theta = ep.theta_norm;
      if (round == 0) {
        pi = &random_pi;
      } else {
        trained_pi = std::make_unique<ClassifierContinuation>(
            *result.rounds[static_cast<std::size_t>(round - 1)].policy,
            cont_theta.empty() ? nullptr : cont_theta.data());
        pi = trained_pi.get();
      }
      for (auto& c : caches) c.clear();
      s = engine->initial();
      for (int t = 0; t < config.warmup; ++t) {
        const Decision d =
            pi->decide(*engine, s, seed,
                       kWarmTag + static_cast<std::uint64_t>(episode_index),
                       static_cast<std::uint64_t>(t), &caches[0]);
        const auto fail = engine->sample_failures(
            s, seed, kWarmTag + static_cast<std::uint64_t>(episode_index),
            static_cast<std::uint64_t>(t));
        engine->step(s, d, fail);
      }
      (void)k;
    };

    reset_episode(0);
    std::vector<float> feat(static_cast<std::size_t>(spec.dim()));
    for (long k = 0; k < config.n_samples; ++k) {
      if (config.episode_len > 0 && k > 0 && k % config.episode_len == 0)
        reset_episode(k);
      const Decision label =
          argmin_label(*engine, s, *pi, config.scenarios, config.horizon,
                       seed, rollout_base(round, k), threads, caches);
      spec.write(s, {0, 0}, ep.params,
                 cont_theta.empty() ? nullptr : cont_theta.data(),
                 feat.data());
      xs.insert(xs.end(), feat.begin(), feat.end());
      const int cls = grid.index_of(label);
      if (cls < 0) throw std::logic_error("label outside the decision grid");
      ys.push_back(cls);
      // Step the collection chain with the improved decision.
      const auto fail = engine->sample_failures(
          s, seed, kStepTag + static_cast<std::uint64_t>(round),
          static_cast<std::uint64_t>(k));
      engine->step(s, label, fail);
    }

    std::vector<int> dims;
    dims.push_back(spec.dim());
    for (int h : net_config.hidden) dims.push_back(h);
    dims.push_back(grid.size());
    Mlp net(dims, combine(seed, static_cast<std::uint64_t>(round)));
    const TrainStats ts = train_classifier(
        net, xs, ys, net_config.adam,
        combine(seed, 0xAD00 + static_cast<std::uint64_t>(round)));

    DclRound r;
    r.policy = std::make_shared<ClassifierPolicy>(spec, std::move(net), grid);
    r.train = ts;
    r.validation_cost = validate_policy(env, *r.policy, config, seed, round);
    result.rounds.push_back(std::move(r));
  }
  result.best = 0;
  for (std::size_t i = 1; i < result.rounds.size(); ++i)
    if (result.rounds[i].validation_cost <
        result.rounds[static_cast<std::size_t>(result.best)].validation_cost)
      result.best = static_cast<int>(i);
  return result;
}

std::vector<Decision> dcl_label_states(
    const SimEngine& engine, const std::vector<SimEngine::State>& states,
    const Continuation& pi, int scenarios, int horizon, std::uint64_t master,
    int threads) {
  std::vector<Decision> labels(states.size());
  std::vector<DecisionCache> caches(static_cast<std::size_t>(std::max(threads, 1)));
  for (std::size_t i = 0; i < states.size(); ++i)
    labels[i] = argmin_label(engine, states[i], pi, scenarios, horizon, master,
                             rollout_base(0, static_cast<long>(i)), threads,
                             caches);
  return labels;
}

}  // namespace dsinv
