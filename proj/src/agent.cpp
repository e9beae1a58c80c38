#include "dualmdp/agent.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dualmdp/checkpoint.hpp"
#include "dualmdp/lexicon.hpp"
#include "dualmdp/rng.hpp"

namespace dualmdp {

namespace {

constexpr double kHalfLog2PiE = 1.4189385332046727;  // 0.5*log(2*pi*e)
constexpr double kLogStdMinB = -4.6;
constexpr double kLogStdMaxB = -1.2;

std::vector<double> zero_counts(const Vocab& vocab) {
  return std::vector<double>(static_cast<size_t>(vocab.size()), 0.0);
}

std::vector<double> instruction_counts(const Vocab& vocab,
                                       const std::string& text,
                                       bool use_language) {
  if (!use_language) return zero_counts(vocab);
  return count_vector(tokenize(text), vocab);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

}  // namespace

long EpisodeRecord::live_steps() const {
  long n = 0;
  for (const TrialRollout& t : trials)
    if (!t.demo) n += static_cast<long>(t.traj.size());
  return n;
}

PolicySnapshot make_policy(const TaskSetRegistry& reg, uint64_t seed) {
  std::vector<std::string> corpus;
  for (const auto& [id, text] : reg.instructions) corpus.push_back(text);
  PolicySnapshot p;
  p.vocab = build_vocab(corpus);
  p.params = PolicyParams::init(p.vocab.size(), seed);
  return p;
}

TrialRollout run_trial(const PolicySnapshot& policy, const TaskEnv& env,
                       const std::vector<double>& counts,
                       std::array<double, kHiddenDim>* hidden,
                       const RewardSource& source, uint64_t reset_seed,
                       Rng* action_rng, const TrainConfig& cfg,
                       std::array<double, kActDim>* prev_action,
                       double* prev_reward, bool deterministic) {
  TrialRollout out;
  out.traj.task_id = env.family;
  const std::vector<double> emb = embed_counts(policy.params, counts);

  EnvState s = reset(env, reset_seed);
  double done_flag = 1.0;
  int first_reached = -1;
  CellTrace tr;
  std::array<double, kInputDim> x;
  while (!s.done) {
    if (first_reached < 0 && s.attached)
      first_reached = static_cast<int>(out.traj.size());
    build_input(s.observation(), *prev_action, *prev_reward, done_flag, emb, &x);
    policy_step(policy.params, x, *hidden, &tr);
    if (!std::isfinite(tr.v) || !std::isfinite(tr.mu[0]))
      throw std::runtime_error("run_trial: NaN in policy output");

    std::array<double, kActDim> raw;
    for (int i = 0; i < kActDim; ++i) {
      const double sigma = effective_sigma(policy.params.log_std()[i]);
      raw[static_cast<size_t>(i)] =
          deterministic ? tr.mu[static_cast<size_t>(i)]
                        : tr.mu[static_cast<size_t>(i)] + sigma * action_rng->normal();
    }
    const Action exec = Action{raw[0], raw[1], raw[2], raw[3]}.clamped();
    const StepResult r = step(env, s, exec);
    const double reward_raw =
        source.model ? recover_reward(*source.model, r.state.observation())
                     : r.reward;

    out.traj.steps.push_back({s.observation(), exec, reward_raw});
    out.raw_actions.push_back(raw);
    out.prev_action_in.push_back(*prev_action);
    out.prev_reward_in.push_back(*prev_reward);
    out.done_in.push_back(done_flag);
    out.logp.push_back(gaussian_logp(raw, tr.mu, policy.params.log_std()));
    out.value.push_back(tr.v);

    (*prev_action) = {exec.dx, exec.dy, exec.dz, exec.f};
    *prev_reward = reward_raw / source.scale;
    done_flag = 0.0;
    *hidden = tr.h;
    out.success = r.success;
    s = r.state;
  }
  if (first_reached < 0 && s.attached)
    first_reached = static_cast<int>(out.traj.size());
  out.traj.final_state = s.observation();
  out.traj.reach_index = first_reached < 0 ? 0 : first_reached;
  out.traj.success = out.success;
  return out;
}

namespace {

TrialRollout run_demo_trial(const PolicySnapshot& policy,
                            const std::vector<double>& counts,
                            const Trajectory& demo, const RewardModel* model,
                            std::array<double, kHiddenDim>* hidden,
                            const TrainConfig& cfg,
                            std::array<double, kActDim>* prev_action,
                            double* prev_reward) {
  TrialRollout out;
  out.demo = true;
  out.traj.task_id = demo.task_id;
  out.traj.reach_index = demo.reach_index;
  const std::vector<double> emb = embed_counts(policy.params, counts);

  CellTrace tr;
  std::array<double, kInputDim> x;
  double done_flag = 1.0;
  for (const Step& st : demo.steps) {
    const double reward_raw =
        model ? recover_reward(*model, st.state) : st.reward;
    build_input(st.state, *prev_action, *prev_reward, done_flag, emb, &x);
    policy_step(policy.params, x, *hidden, &tr);

    out.traj.steps.push_back({st.state, st.action, reward_raw});
    out.raw_actions.push_back(
        {st.action.dx, st.action.dy, st.action.dz, st.action.f});
    out.prev_action_in.push_back(*prev_action);
    out.prev_reward_in.push_back(*prev_reward);
    out.done_in.push_back(done_flag);
    out.logp.push_back(0.0);
    out.value.push_back(tr.v);

    (*prev_action) = {st.action.dx, st.action.dy, st.action.dz, st.action.f};
    *prev_reward = reward_raw / cfg.airl_reward_scale;
    done_flag = 0.0;
    *hidden = tr.h;
  }
  out.traj.final_state = demo.final_state;
  out.traj.success = demo.success;
  out.success = demo.success;
  return out;
}

}  // namespace

EpisodeRecord run_episode(const PolicySnapshot& policy, const TaskEnv& env,
                          const std::vector<double>& counts,
                          const RewardSource& source, const Trajectory* demo,
                          uint64_t episode_seed, const TrainConfig& cfg,
                          bool deterministic) {
  if (demo && demo->task_id != env.family)
    throw std::invalid_argument("run_episode: demo/env family mismatch (" +
                                demo->task_id + " vs " + env.family + ")");
  EpisodeRecord ep;
  ep.task_id = env.family;
  ep.counts = counts;
  ep.smdp = source.model != nullptr;
  ep.horizon = env.horizon;

  std::array<double, kHiddenDim> hidden{};
  std::array<double, kActDim> prev_action{};
  double prev_reward = 0.0;
  Rng action_rng(episode_seed ^ 0x5bd1e995u);

  for (int t = 0; t < cfg.trials_per_episode; ++t) {
    if (t == 0 && demo) {
      ep.trials.push_back(run_demo_trial(policy, counts, *demo, source.model,
                                         &hidden, cfg, &prev_action,
                                         &prev_reward));
      continue;
    }
    TrialRollout tr = run_trial(policy, env, counts, &hidden, source,
                                episode_seed * 131ull + static_cast<uint64_t>(t),
                                &action_rng, cfg, &prev_action, &prev_reward,
                                deterministic);
    for (const Step& st : tr.traj.steps) ep.live_return_raw += st.reward;
    ep.trials.push_back(std::move(tr));
  }
  return ep;
}

EpisodeRecord run_episode_smdp(const PolicySnapshot& policy, const TaskEnv& senv,
                               const std::vector<double>& counts_sym,
                               const Trajectory& demo, const RewardModel& model,
                               uint64_t episode_seed, const TrainConfig& cfg) {
  RewardSource src;
  src.model = &model;
  src.scale = cfg.airl_reward_scale;
  return run_episode(policy, senv, counts_sym, src, &demo, episode_seed, cfg,
                     false);
}

void compute_gae(const EpisodeRecord& ep, const TrainConfig& cfg,
                 std::vector<double>* advantages, std::vector<double>* returns) {
  const double gamma = cfg.discount;
  const double lam = cfg.gae_lambda;
  const double scale = ep.smdp ? cfg.airl_reward_scale : cfg.gt_reward_scale;

  struct Flat {
    double reward = 0.0;
    double value = 0.0;
    int pad_after = -1;     // >= 0 at trial ends
    double absorb = 0.0;
  };
  std::vector<Flat> seq;
  for (const TrialRollout& t : ep.trials) {
    if (t.demo) continue;
    const size_t n = t.traj.size();
    for (size_t i = 0; i < n; ++i) {
      Flat f;
      f.reward = t.traj.steps[i].reward / scale;
      f.value = t.value[i];
      if (i + 1 == n) {
        f.pad_after = std::max(0, ep.horizon - static_cast<int>(n));
        f.absorb = f.reward;
      }
      seq.push_back(f);
    }
  }

  advantages->assign(seq.size(), 0.0);
  returns->assign(seq.size(), 0.0);
  double a_next = 0.0;
  double v_next = 0.0;
  for (size_t k = seq.size(); k-- > 0;) {
    const Flat& f = seq[k];
    double adv;
    if (f.pad_after >= 0) {
      const int m = f.pad_after;
      // Bridge across m virtual absorbing steps that keep paying the
      // terminal reward, then land on the next trial's first value.
      const double bridge =
          f.absorb * gamma * (1.0 - std::pow(gamma, m)) / (1.0 - gamma);
      const double delta =
          f.reward + bridge + std::pow(gamma, m + 1) * v_next - f.value;
      adv = delta + std::pow(gamma * lam, m + 1) * a_next;
    } else {
      const double delta = f.reward + gamma * v_next - f.value;
      adv = delta + gamma * lam * a_next;
    }
    (*advantages)[k] = adv;
    (*returns)[k] = adv + f.value;
    a_next = adv;
    v_next = f.value;
  }
}

PpoStats ppo_loss_and_grad(const PolicyParams& params,
                           const std::vector<EpisodeRecord>& batch,
                           const std::vector<std::vector<double>>& advantages,
                           const std::vector<std::vector<double>>& returns,
                           const TrainConfig& cfg, PolicyParams* grad) {
  PpoStats stats;
  long n_total = 0;
  for (const EpisodeRecord& ep : batch) n_total += ep.live_steps();
  if (n_total == 0) throw std::invalid_argument("ppo: empty batch");
  const double inv_n = 1.0 / static_cast<double>(n_total);

  double entropy_per_step = 0.0;
  std::array<bool, kActDim> std_gate;
  for (int i = 0; i < kActDim; ++i) {
    const double ls = params.log_std()[i];
    std_gate[static_cast<size_t>(i)] = ls > kLogStdMinB && ls < kLogStdMaxB;
    entropy_per_step += std::log(effective_sigma(ls)) + kHalfLog2PiE;
  }

  for (size_t e = 0; e < batch.size(); ++e) {
    const EpisodeRecord& ep = batch[e];
    const std::vector<double> emb = embed_counts(params, ep.counts);

    // forward
    std::vector<CellTrace> traces;
    std::vector<int> live_idx;  // advantage index per step, -1 for demo
    traces.reserve(512);
    std::array<double, kHiddenDim> h{};
    std::array<double, kInputDim> x;
    int li = 0;
    for (const TrialRollout& t : ep.trials) {
      for (size_t i = 0; i < t.traj.size(); ++i) {
        build_input(t.traj.steps[i].state, t.prev_action_in[i],
                    t.prev_reward_in[i], t.done_in[i], emb, &x);
        CellTrace tr;
        policy_step(params, x, h, &tr);
        h = tr.h;
        traces.push_back(tr);
        live_idx.push_back(t.demo ? -1 : li++);
      }
    }

    // per-step upstream grads
    const size_t n_steps = traces.size();
    std::vector<std::array<double, kActDim>> dmu(n_steps, {0, 0, 0, 0});
    std::vector<double> dv(n_steps, 0.0);
    std::array<double, kActDim> dlogstd{};
    size_t k = 0;
    for (const TrialRollout& t : ep.trials) {
      for (size_t i = 0; i < t.traj.size(); ++i, ++k) {
        const int a_idx = live_idx[k];
        if (a_idx < 0) continue;
        const CellTrace& tr = traces[k];
        const double A = advantages[e][static_cast<size_t>(a_idx)];
        const double R = returns[e][static_cast<size_t>(a_idx)];
        const double logp_new =
            gaussian_logp(t.raw_actions[i], tr.mu, params.log_std());
        const double ratio = std::exp(logp_new - t.logp[i]);
        const double clipped =
            std::min(std::max(ratio, 1.0 - cfg.clip_ratio), 1.0 + cfg.clip_ratio);
        const double surr1 = ratio * A;
        const double surr2 = clipped * A;
        stats.policy_loss += -std::min(surr1, surr2) * inv_n;
        const double verr = tr.v - R;
        stats.value_loss += verr * verr * inv_n;
        stats.entropy += entropy_per_step * inv_n;

        const double dlogp =
            (surr1 <= surr2) ? -A * ratio * inv_n : 0.0;
        for (int d = 0; d < kActDim; ++d) {
          const double sigma = effective_sigma(params.log_std()[d]);
          const double z =
              (t.raw_actions[i][static_cast<size_t>(d)] -
               tr.mu[static_cast<size_t>(d)]) / sigma;
          dmu[k][static_cast<size_t>(d)] = dlogp * z / sigma;
          if (std_gate[static_cast<size_t>(d)]) {
            dlogstd[static_cast<size_t>(d)] +=
                dlogp * (z * z - 1.0) - cfg.entropy_coef * inv_n;
          }
        }
        dv[k] = 2.0 * cfg.value_coef * verr * inv_n;
      }
    }

    // backward through time
    std::array<double, kHiddenDim> dh{};
    std::array<double, kInputDim> dx;
    std::vector<double> de(kEmbeddingDim, 0.0);
    for (size_t t = n_steps; t-- > 0;) {
      policy_backward_step(params, traces[t], dmu[t], dv[t], &dh, &dx, grad);
      for (int c = 0; c < kEmbeddingDim; ++c)
        de[static_cast<size_t>(c)] +=
            dx[static_cast<size_t>(kObsDim + kActDim + 2 + c)];
    }
    embedding_backward(params, ep.counts, emb, de, grad);
    for (int d = 0; d < kActDim; ++d)
      grad->log_std()[static_cast<size_t>(d)] += dlogstd[static_cast<size_t>(d)];
  }

  stats.loss = stats.policy_loss + cfg.value_coef * stats.value_loss -
               cfg.entropy_coef * stats.entropy;
  return stats;
}

PpoStats ppo_update(PolicySnapshot* policy, std::vector<EpisodeRecord>& batch,
                    const TrainConfig& cfg, Adam* opt) {
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");

  std::vector<std::vector<double>> advantages(batch.size());
  std::vector<std::vector<double>> returns(batch.size());
  double mean = 0.0;
  long n = 0;
  for (size_t e = 0; e < batch.size(); ++e) {
    compute_gae(batch[e], cfg, &advantages[e], &returns[e]);
    for (double a : advantages[e]) {
      mean += a;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("ppo_update: no live steps");
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& ae : advantages)
    for (double a : ae) var += (a - mean) * (a - mean);
  const double stddev = std::sqrt(var / static_cast<double>(n)) + 1e-8;
  for (auto& ae : advantages)
    for (double& a : ae) a = (a - mean) / stddev;

  PpoStats stats;
  PolicyParams grad = policy->params.zeros_like();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.flat.begin(), grad.flat.end(), 0.0);
    stats = ppo_loss_and_grad(policy->params, batch, advantages, returns, cfg,
                              &grad);
    if (!std::isfinite(stats.loss))
      throw std::runtime_error("ppo_update: loss diverged (NaN/inf)");
    const double norm = global_norm(grad.flat);
    stats.grad_norm = norm;
    if (norm > cfg.max_grad_norm && norm > 0.0) {
      const double s = cfg.max_grad_norm / norm;
      for (double& g : grad.flat) g *= s;
    }
    opt->step(policy->params.flat, grad.flat);
  }
  ++policy->iteration;
  return stats;
}

namespace {

struct SuccessWindow {
  std::deque<bool> hits;
  int cap = 50;

  void add(bool s) {
    hits.push_back(s);
    while (static_cast<int>(hits.size()) > cap) hits.pop_front();
  }
  bool full() const { return static_cast<int>(hits.size()) >= cap; }
  double rate() const {
    if (hits.empty()) return 0.0;
    double n = 0.0;
    for (bool b : hits) n += b ? 1.0 : 0.0;
    return n / static_cast<double>(hits.size());
  }
};

void log_line(std::ostream* log, long iter, const std::string& task,
              const std::string& phase, double success, double mean_return) {
  if (!log) return;
  (*log) << iter << "," << task << "," << phase << "," << success << ","
         << mean_return << "," << now_seconds() << "\n";
}

}  // namespace

MetaTrainResult meta_train(const TaskSetRegistry& reg,
                           const std::vector<std::string>& families,
                           const TrainConfig& cfg, std::ostream* log) {
  MetaTrainResult result;
  result.buffer.threshold = cfg.buffer_threshold;

  struct TaskCtx {
    const TaskEnv* train = nullptr;
    const TaskEnv* sym = nullptr;
    std::vector<double> counts_train;
    std::vector<double> counts_sym;
    SuccessWindow window;
    std::vector<size_t> demo_pool;  // buffer indices for this sym family
  };

  PolicySnapshot policy = make_policy(reg, cfg.seed);
  std::vector<TaskCtx> tasks;
  for (const std::string& fam : families) {
    TaskCtx ctx;
    for (size_t i = 0; i < reg.train_tasks.size(); ++i) {
      if (reg.train_tasks[i].family != fam) continue;
      ctx.train = &reg.train_tasks[i];
      ctx.sym = &reg.sym_tasks[i];
    }
    if (!ctx.train)
      throw std::invalid_argument("meta_train: unknown family " + fam);
    ctx.counts_train = instruction_counts(
        policy.vocab, reg.instruction_text(ctx.train->instruction_id),
        cfg.use_language);
    ctx.counts_sym = instruction_counts(
        policy.vocab, reg.instruction_text(ctx.sym->instruction_id),
        cfg.use_language);
    ctx.window.cap = cfg.solved_window;
    tasks.push_back(std::move(ctx));
  }

  const long budget_total =
      cfg.step_budget_per_family * static_cast<long>(tasks.size());
  long steps_used = 0;
  const RewardSource gt_source{nullptr, cfg.gt_reward_scale};

  auto push_symmetrical = [&](const Trajectory& traj, const TaskCtx& ctx) {
    if (!traj.success || traj.steps.empty()) return;
    // Rewards stay 0 in generated trajectories until AIRL exists.
    buffer_push(result.buffer, symmetrize_trajectory(traj, *ctx.train, nullptr));
  };

  uint64_t episode_counter = 1;
  auto omdp_batch = [&](std::vector<EpisodeRecord>* batch, bool to_buffer,
                        bool deterministic) {
    for (TaskCtx& ctx : tasks) {
      for (int e = 0; e < cfg.episodes_per_task; ++e) {
        EpisodeRecord ep = run_episode(
            policy, *ctx.train, ctx.counts_train, gt_source, nullptr,
            cfg.seed * 7907ull + episode_counter++, cfg, deterministic);
        steps_used += ep.live_steps();
        for (const TrialRollout& t : ep.trials) {
          ctx.window.add(t.success);
          if (to_buffer) push_symmetrical(t.traj, ctx);
        }
        if (batch) batch->push_back(std::move(ep));
      }
    }
  };

  Adam opt(policy.params.size(), cfg.lr);
  long iter = 0;

  // ---- Phase 1: OMDP only, fill the buffer with symmetrical trajectories.
  if (cfg.use_smdp) {
    const long phase1_budget =
        static_cast<long>(cfg.phase1_budget_frac * budget_total);
    while (steps_used < phase1_budget) {
      std::vector<EpisodeRecord> batch;
      omdp_batch(&batch, true, false);
      const PpoStats st = ppo_update(&policy, batch, cfg, &opt);
      (void)st;
      ++iter;
      bool all_solved = true;
      double rate = 0.0;
      for (TaskCtx& ctx : tasks) {
        log_line(log, iter, ctx.train->family, "1", ctx.window.rate(), 0.0);
        rate += ctx.window.rate();
        all_solved = all_solved && ctx.window.full() &&
                     ctx.window.rate() >= cfg.solved_threshold;
      }
      result.curve.push_back({steps_used, rate / static_cast<double>(tasks.size())});
      if (all_solved && result.buffer.is_full()) break;
    }
    // Top off the buffer with rollouts of the phase-1 policy (no updates).
    long guard = 0;
    while (!result.buffer.is_full() && guard++ < 20000) {
      for (TaskCtx& ctx : tasks) {
        EpisodeRecord ep = run_episode(
            policy, *ctx.train, ctx.counts_train, gt_source, nullptr,
            cfg.seed * 7907ull + episode_counter++, cfg, false);
        steps_used += ep.live_steps();
        for (const TrialRollout& t : ep.trials) push_symmetrical(t.traj, ctx);
      }
    }
    if (!result.buffer.is_full())
      result.warning += "phase1: buffer below threshold; ";
    result.phase_env_steps["phase1"] = steps_used;

    // ---- Phase 2: offline AIRL per symmetrical task family, then freeze.
    for (TaskCtx& ctx : tasks) {
      AirlConfig acfg = cfg.airl;
      acfg.seed = cfg.seed + 101;
      AirlReport rep;
      result.reward_models[ctx.sym->family] =
          train_airl_family(result.buffer, *ctx.sym, acfg, &rep);
      result.airl_reports.push_back(rep);
      log_line(log, iter, ctx.sym->family, "2", rep.holdout_accuracy,
               rep.final_loss);
    }
    for (TaskCtx& ctx : tasks) {
      ctx.demo_pool.clear();
      for (size_t i = 0; i < result.buffer.entries.size(); ++i)
        if (result.buffer.entries[i].task_id == ctx.sym->family)
          ctx.demo_pool.push_back(i);
    }

    // The training is restarted with the SMDP active.
    policy = make_policy(reg, cfg.seed + 1);
    opt = Adam(policy.params.size(), cfg.lr);
    for (TaskCtx& ctx : tasks) ctx.window.hits.clear();
  }

  // ---- Phase 3 (or the single phase for OMDP-only variants).
  Rng demo_rng(cfg.seed + 4242);
  PolicyParams best_params = policy.params;
  double best_rate = -1.0;
  bool converged = false;
  while (steps_used < budget_total) {
    std::vector<EpisodeRecord> batch;
    omdp_batch(&batch, false, false);
    if (cfg.use_smdp) {
      for (TaskCtx& ctx : tasks) {
        if (ctx.demo_pool.empty()) continue;
        const RewardModel& model = result.reward_models.at(ctx.sym->family);
        for (int e = 0; e < cfg.episodes_per_task; ++e) {
          const Trajectory& demo =
              result.buffer.entries[ctx.demo_pool[demo_rng.index(
                  ctx.demo_pool.size())]];
          EpisodeRecord ep = run_episode_smdp(
              policy, *ctx.sym, ctx.counts_sym, demo, model,
              cfg.seed * 9973ull + episode_counter++, cfg);
          steps_used += ep.live_steps();
          batch.push_back(std::move(ep));
        }
      }
    }
    ppo_update(&policy, batch, cfg, &opt);
    ++iter;

    double rate = 0.0;
    bool windows_full = true;
    for (TaskCtx& ctx : tasks) {
      rate += ctx.window.rate();
      windows_full = windows_full && ctx.window.full();
      log_line(log, iter, ctx.train->family, cfg.use_smdp ? "3" : "omdp",
               ctx.window.rate(), 0.0);
    }
    rate /= static_cast<double>(tasks.size());
    result.curve.push_back({steps_used, rate});
    if (windows_full && rate > best_rate) {
      best_rate = rate;
      best_params = policy.params;
    }
    if (windows_full && rate >= cfg.converge_threshold) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    result.warning += "training budget exhausted before convergence; ";
    if (best_rate >= 0.0) policy.params = best_params;
  }
  result.converged = converged;
  result.policy = policy;
  result.env_steps = steps_used;
  result.phase_env_steps["total"] = steps_used;
  return result;
}

TaskTestMetrics evaluate_task(const PolicySnapshot& policy, const TaskEnv& env,
                              const std::string& instruction_text,
                              const TrainConfig& cfg, int episodes,
                              uint64_t seed) {
  TaskTestMetrics m;
  m.family = env.family;
  m.episodes = episodes;
  const std::vector<double> counts =
      instruction_counts(policy.vocab, instruction_text, cfg.use_language);
  const RewardSource gt_source{nullptr, cfg.gt_reward_scale};
  for (int e = 0; e < episodes; ++e) {
    EpisodeRecord ep =
        run_episode(policy, env, counts, gt_source, nullptr,
                    seed * 677ull + static_cast<uint64_t>(e) + 1, cfg, true);
    for (size_t t = 0; t < ep.trials.size() && t < 3; ++t)
      m.trial_success[t] += ep.trials[t].success ? 1.0 : 0.0;
    m.success_rate += ep.final_trial_success() ? 1.0 : 0.0;
    m.mean_return += ep.live_return_raw;
  }
  m.success_rate /= episodes;
  m.mean_return /= episodes;
  for (double& r : m.trial_success) r /= episodes;
  return m;
}

MetaTestMetrics meta_test(const PolicySnapshot& policy,
                          const TaskSetRegistry& reg,
                          const std::vector<std::string>& train_families,
                          const TrainConfig& cfg, int episodes, uint64_t seed) {
  MetaTestMetrics out;
  out.param_hash_before = policy.hash();
  for (const std::string& fam : train_families) {
    for (size_t i = 0; i < reg.train_tasks.size(); ++i) {
      if (reg.train_tasks[i].family != fam) continue;
      const TaskEnv& test = reg.test_tasks[i];
      out.tasks.push_back(evaluate_task(
          policy, test, reg.instruction_text(test.instruction_id), cfg,
          episodes, seed + i));
    }
  }
  for (const TaskTestMetrics& t : out.tasks) out.aggregate_success += t.success_rate;
  if (!out.tasks.empty())
    out.aggregate_success /= static_cast<double>(out.tasks.size());
  out.param_hash_after = policy.hash();
  return out;
}

void save_policy(const PolicySnapshot& p, const std::string& path) {
  std::string words;
  std::vector<std::pair<int, std::string>> by_index;
  for (const auto& [w, i] : p.vocab.index) by_index.push_back({i, w});
  std::sort(by_index.begin(), by_index.end());
  for (const auto& [i, w] : by_index) {
    if (!words.empty()) words += ',';
    words += w;
  }
  CheckpointWriter w(path);
  w.header({{"kind", "policy"},
            {"topology", "gru64-in28-emb16"},
            {"vocab_hash", std::to_string(p.vocab.hash())},
            {"vocab", words},
            {"seed", std::to_string(p.params.seed)},
            {"iteration", std::to_string(p.iteration)}});
  w.tensor("params", p.params.flat);
}

PolicySnapshot load_policy(const std::string& path) {
  CheckpointReader r(path);
  PolicySnapshot p;
  int next = 1;
  std::istringstream ws(r.header_at("vocab"));
  std::string word;
  while (std::getline(ws, word, ',')) p.vocab.index[word] = next++;
  p.iteration = std::stol(r.header_at("iteration"));
  p.params = PolicyParams::init(p.vocab.size(), 0);
  p.params.seed = std::stoull(r.header_at("seed"));
  const std::vector<double>& flat = r.tensor("params");
  if (flat.size() != p.params.flat.size())
    throw std::runtime_error("load_policy: parameter count mismatch");
  p.params.flat = flat;
  if (std::to_string(p.vocab.hash()) != r.header_at("vocab_hash"))
    throw std::runtime_error("load_policy: vocab hash mismatch");
  return p;
}

}  // namespace dualmdp
