#include "dualmdp/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualmdp/rng.hpp"

namespace dualmdp {

namespace {
constexpr int kObsDim = 6;
constexpr int kActDim = 4;
}  // namespace

size_t CemPolicy::param_count() {
  return static_cast<size_t>(kHidden) * kObsDim + kHidden +
         static_cast<size_t>(kActDim) * kHidden + kActDim;
}

Action CemPolicy::act(const Obs& obs) const {
  const double* p = params.data();
  double h[kHidden];
  for (int i = 0; i < kHidden; ++i) {
    double a = p[kHidden * kObsDim + i];
    for (int j = 0; j < kObsDim; ++j) a += p[i * kObsDim + j] * obs[static_cast<size_t>(j)];
    h[i] = std::tanh(a);
  }
  const double* w2 = p + kHidden * kObsDim + kHidden;
  const double* b2 = w2 + kActDim * kHidden;
  double u[kActDim];
  for (int i = 0; i < kActDim; ++i) {
    double a = b2[i];
    for (int j = 0; j < kHidden; ++j) a += w2[i * kHidden + j] * h[j];
    u[i] = std::tanh(a);
  }
  return {u[0] * Action::kMaxStep, u[1] * Action::kMaxStep,
          u[2] * Action::kMaxStep, 0.5 + 0.5 * u[3]};
}

EpisodeStats run_cem_episode(const TaskEnv& env, const CemPolicy& pi,
                             uint64_t seed, const RewardFn& reward) {
  EpisodeStats st;
  EnvState s = reset(env, seed);
  double ret = 0.0;
  int t = 0;
  double last_r = 0.0;
  while (!s.done) {
    const StepResult r = step(env, s, pi.act(s.observation()));
    last_r = reward ? reward(r.state.observation()) : r.reward;
    ret += last_r;
    ++t;
    if (r.success && !st.success) {
      st.success = true;
      st.success_step = t;
    }
    s = r.state;
  }
  // Absorbing pad: a finished trial keeps paying its terminal-state reward.
  ret += last_r * static_cast<double>(env.horizon - t);
  st.fitness = ret;
  return st;
}

CemPolicy train_cem(const TaskEnv& env, const RewardFn& reward,
                    const CemConfig& cfg) {
  Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + 13);
  const size_t n = CemPolicy::param_count();
  std::vector<double> mean(n, 0.0), sigma(n, cfg.init_sigma);

  CemPolicy best;
  best.params = mean;
  double best_fit = -1e300;

  std::vector<CemPolicy> pop(static_cast<size_t>(cfg.population));
  std::vector<double> fit(static_cast<size_t>(cfg.population));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (int k = 0; k < cfg.population; ++k) {
      pop[static_cast<size_t>(k)].params.resize(n);
      for (size_t i = 0; i < n; ++i)
        pop[static_cast<size_t>(k)].params[i] = mean[i] + sigma[i] * rng.normal();
      double f = 0.0;
      for (int e = 0; e < cfg.fitness_episodes; ++e)
        f += run_cem_episode(env, pop[static_cast<size_t>(k)],
                             cfg.seed + 7919ull * iter + e, reward)
                 .fitness;
      fit[static_cast<size_t>(k)] = f / cfg.fitness_episodes;
      if (fit[static_cast<size_t>(k)] > best_fit) {
        best_fit = fit[static_cast<size_t>(k)];
        best = pop[static_cast<size_t>(k)];
      }
    }
    std::vector<int> idx(static_cast<size_t>(cfg.population));
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + cfg.elites, idx.end(),
                      [&](int a, int b) {
                        return fit[static_cast<size_t>(a)] >
                               fit[static_cast<size_t>(b)];
                      });
    for (size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (int k = 0; k < cfg.elites; ++k)
        m += pop[static_cast<size_t>(idx[static_cast<size_t>(k)])].params[i];
      m /= cfg.elites;
      double v = 0.0;
      for (int k = 0; k < cfg.elites; ++k) {
        const double d =
            pop[static_cast<size_t>(idx[static_cast<size_t>(k)])].params[i] - m;
        v += d * d;
      }
      v /= cfg.elites;
      mean[i] = m;
      sigma[i] = std::max(std::sqrt(v), cfg.sigma_floor);
    }
  }
  return best;
}

}  // namespace dualmdp
