#include "dualmdp/airl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "dualmdp/cem.hpp"
#include "dualmdp/checkpoint.hpp"
#include "dualmdp/rng.hpp"

namespace dualmdp {

namespace {

std::vector<ExpertStep> expert_steps_of(const std::vector<const Trajectory*>& trajs) {
  std::vector<ExpertStep> out;
  for (const Trajectory* t : trajs) {
    for (size_t i = 0; i < t->steps.size(); ++i) {
      ExpertStep e;
      e.s = t->steps[i].state;
      e.s2 = (i + 1 < t->steps.size()) ? t->steps[i + 1].state : t->final_state;
      e.action = t->steps[i].action;
      e.attached = static_cast<int>(i) >= t->reach_index;
      out.push_back(e);
    }
  }
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = p * (static_cast<double>(v.size()) - 1.0);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

}  // namespace

double recover_reward(const RewardModel& model, const Obs& s) {
  const double span = std::max(model.raw_hi - model.raw_lo, 1e-12);
  double u = (model.raw_reward(s) - model.raw_lo) / span;
  u = std::min(std::max(u, 0.0), 1.0);
  return model.rescale_lo + u * (model.rescale_hi - model.rescale_lo);
}

RewardFn reward_fn(const RewardModel& model) {
  return [&model](const Obs& s) { return recover_reward(model, s); };
}

double negative_log_density() {
  // uniform over the action box [-0.05, 0.05]^3 x [0, 1]
  return std::log(1.0 / (0.1 * 0.1 * 0.1 * 1.0));
}

std::vector<Transition> default_negative_transitions(
    const TaskEnv& senv, const std::vector<ExpertStep>& expert, int n,
    uint64_t seed, double noise_sigma) {
  Rng rng(seed);
  std::vector<Transition> out;
  out.reserve(static_cast<size_t>(n));

  // Half: uniform-random-policy rollouts in the symmetrical env.  Episodes
  // are truncated so the sample covers many independent walks rather than a
  // handful of long ones.
  const int n_random = n / 2;
  const int max_len = 40;
  uint64_t episode = 0;
  while (static_cast<int>(out.size()) < n_random) {
    EnvState s = reset(senv, seed * 1000003ull + episode++);
    int len = 0;
    while (!s.done && len++ < max_len &&
           static_cast<int>(out.size()) < n_random) {
      const Action a{rng.uniform(-Action::kMaxStep, Action::kMaxStep),
                     rng.uniform(-Action::kMaxStep, Action::kMaxStep),
                     rng.uniform(-Action::kMaxStep, Action::kMaxStep),
                     rng.uniform(0.0, 1.0)};
      StepResult r = step(senv, s, a);
      out.push_back({s.observation(), r.state.observation()});
      s = r.state;
    }
  }

  // Half: expert transitions re-simulated with Gaussian action noise.
  while (static_cast<int>(out.size()) < n && !expert.empty()) {
    const ExpertStep& e = expert[rng.index(expert.size())];
    EnvState s;
    s.gripper = obs_gripper(e.s);
    s.object_key = obs_object(e.s);
    s.attached = e.attached;
    s.step_count = 0;
    Action a = e.action;
    a.dx += rng.normal(0.0, noise_sigma);
    a.dy += rng.normal(0.0, noise_sigma);
    a.dz += rng.normal(0.0, noise_sigma);
    StepResult r = step(senv, s, a);
    out.push_back({e.s, r.state.observation()});
  }
  return out;
}

RewardModel train_airl_family(const Buffer& buf, const TaskEnv& senv,
                              const AirlConfig& cfg, AirlReport* report,
                              const NegativeSampler& sampler) {
  if (!buf.is_full())
    throw std::invalid_argument("train_airl: buffer below threshold (" +
                                std::to_string(buf.count()) + " <= " +
                                std::to_string(buf.threshold) + ")");

  std::vector<const Trajectory*> trajs;
  for (const Trajectory& t : buf.entries)
    if (t.task_id == senv.family) trajs.push_back(&t);
  if (trajs.empty())
    throw std::invalid_argument("train_airl: no buffer entries for " +
                                senv.family);

  // Hold out whole trajectories so evaluation states are unseen.
  Rng split_rng(cfg.seed ^ fnv1a_str(senv.family));
  std::vector<size_t> order(trajs.size());
  std::iota(order.begin(), order.end(), 0);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[split_rng.index(i)]);
  const size_t n_hold =
      std::max<size_t>(1, static_cast<size_t>(cfg.holdout_fraction *
                                              static_cast<double>(trajs.size())));
  std::vector<const Trajectory*> train_trajs, hold_trajs;
  for (size_t i = 0; i < order.size(); ++i)
    (i < n_hold ? hold_trajs : train_trajs).push_back(trajs[order[i]]);

  const std::vector<ExpertStep> train_expert = expert_steps_of(train_trajs);
  const std::vector<ExpertStep> hold_expert = expert_steps_of(hold_trajs);

  const int n_neg = static_cast<int>(train_expert.size());
  const std::vector<Transition> negatives =
      sampler ? sampler(senv, train_expert, n_neg, cfg.seed + 11)
              : default_negative_transitions(senv, train_expert, n_neg,
                                             cfg.seed + 11, cfg.noise_sigma);
  // Held-out random transitions for the accuracy report (random half only).
  const std::vector<Transition> hold_random = default_negative_transitions(
      senv, {}, static_cast<int>(hold_expert.size()), cfg.seed + 29,
      cfg.noise_sigma);

  RewardModel model;
  model.task_id = senv.family;
  model.gamma = cfg.gamma;
  model.seed = cfg.seed;
  model.g = Mlp::init(6, cfg.seed * 2 + 1);
  model.h = Mlp::init(6, cfg.seed * 2 + 2);
  // Start the reward head at the sampler's log-density so the discriminator
  // boundary is calibrated from the first batch and training shapes g
  // instead of spending its budget shifting the bias.
  model.g.b3 = negative_log_density();

  struct Sample {
    Transition tr;
    double label;
  };
  std::vector<Sample> data;
  data.reserve(train_expert.size() + negatives.size());
  for (const ExpertStep& e : train_expert) data.push_back({{e.s, e.s2}, 1.0});
  for (const Transition& t : negatives) data.push_back({t, 0.0});

  SgdMomentum opt_g(model.g, cfg.lr, cfg.momentum);
  SgdMomentum opt_h(model.h, cfg.lr, cfg.momentum);
  Mlp grad_g = model.g, grad_h = model.h;
  const double log_pi = negative_log_density();

  Rng shuffle_rng(cfg.seed + 97);
  double last_loss = 0.0;
  size_t cursor = data.size();
  double loss_accum = 0.0;
  long loss_count = 0;
  for (int update = 0; update < cfg.updates; ++update) {
    const double frac = static_cast<double>(update) / cfg.updates;
    const double lr = cfg.lr * (frac < 0.6 ? 1.0 : (frac < 0.85 ? 0.5 : 0.25));
    opt_g.lr = lr;
    opt_h.lr = lr;
    grad_g.zero();
    grad_h.zero();
    const int bs = std::min<size_t>(cfg.batch_size, data.size());
    const double inv = 1.0 / bs;
    double batch_loss = 0.0;
    for (int i = 0; i < bs; ++i) {
      if (cursor >= data.size()) {
        for (size_t k = data.size(); k > 1; --k)
          std::swap(data[k - 1], data[shuffle_rng.index(k)]);
        cursor = 0;
      }
      const Sample& smp = data[cursor++];
      const Mlp::Trace tg = model.g.forward_trace(smp.tr.s.data());
      const Mlp::Trace th1 = model.h.forward_trace(smp.tr.s.data());
      const Mlp::Trace th2 = model.h.forward_trace(smp.tr.s2.data());
      const double f = tg.y + cfg.gamma * th2.y - th1.y;
      const double p = logistic(f - log_pi);
      const double eps = 1e-12;
      batch_loss += -(smp.label * std::log(p + eps) +
                      (1.0 - smp.label) * std::log(1.0 - p + eps));
      const double dflogit = (p - smp.label) * inv;
      model.g.backward(tg, dflogit, grad_g);
      model.h.backward(th2, cfg.gamma * dflogit, grad_h);
      model.h.backward(th1, -dflogit, grad_h);
    }
    if (cfg.l2 > 0.0) grad_g.add_scaled(model.g, cfg.l2);
    if (cfg.l2_shaping > 0.0) grad_h.add_scaled(model.h, cfg.l2_shaping);
    opt_g.apply(model.g, grad_g);
    opt_h.apply(model.h, grad_h);
    loss_accum += batch_loss * inv;
    ++loss_count;
    if (!std::isfinite(batch_loss))
      throw std::runtime_error("train_airl: loss diverged (NaN/inf) on " +
                               senv.family + " update " +
                               std::to_string(update));
  }
  last_loss = loss_count > 0 ? loss_accum / loss_count : 0.0;

  // Rescale calibration from the training-split state distribution.
  std::vector<double> raws;
  for (const ExpertStep& e : train_expert) raws.push_back(model.g.forward(e.s.data()));
  model.raw_lo = percentile(raws, 0.01);
  model.raw_hi = percentile(raws, 0.99);
  if (model.raw_hi - model.raw_lo < 1e-9) model.raw_hi = model.raw_lo + 1e-9;

  if (report) {
    report->task_id = senv.family;
    report->expert_transitions = static_cast<int>(train_expert.size());
    report->negative_transitions = static_cast<int>(negatives.size());
    report->final_loss = last_loss;
    double correct = 0.0, total = 0.0;
    double mean_expert = 0.0, mean_random = 0.0;
    for (const ExpertStep& e : hold_expert) {
      const double f = model.g.forward(e.s.data()) +
                       cfg.gamma * model.h.forward(e.s2.data()) -
                       model.h.forward(e.s.data());
      correct += (f - log_pi > 0.0) ? 1.0 : 0.0;
      mean_expert += model.g.forward(e.s.data());
      total += 1.0;
    }
    for (const Transition& t : hold_random) {
      const double f = model.g.forward(t.s.data()) +
                       cfg.gamma * model.h.forward(t.s2.data()) -
                       model.h.forward(t.s.data());
      correct += (f - log_pi <= 0.0) ? 1.0 : 0.0;
      mean_random += model.g.forward(t.s.data());
      total += 1.0;
    }
    report->holdout_accuracy = total > 0 ? correct / total : 0.0;
    if (!hold_expert.empty()) mean_expert /= static_cast<double>(hold_expert.size());
    if (!hold_random.empty()) mean_random /= static_cast<double>(hold_random.size());
    report->expert_margin = mean_expert - mean_random;
  }
  return model;
}

std::map<std::string, RewardModel> train_airl(const Buffer& buf,
                                              const TaskSetRegistry& reg,
                                              const AirlConfig& cfg,
                                              std::vector<AirlReport>* reports) {
  std::map<std::string, RewardModel> models;
  for (const TaskEnv& senv : reg.sym_tasks) {
    bool present = false;
    for (const Trajectory& t : buf.entries)
      if (t.task_id == senv.family) {
        present = true;
        break;
      }
    if (!present) continue;
    AirlReport rep;
    models[senv.family] = train_airl_family(buf, senv, cfg, &rep);
    if (reports) reports->push_back(rep);
  }
  return models;
}

RewardQualityReport evaluate_reward_quality(const RewardModel& model,
                                            const TaskEnv& senv, int episodes,
                                            uint64_t seed) {
  RewardQualityReport rep;
  rep.task_id = senv.family;

  CemConfig cem;
  cem.seed = seed;

  // Policy trained under the recovered reward.
  const RewardFn airl_fn = reward_fn(model);
  const CemPolicy pi_airl = train_cem(senv, airl_fn, cem);
  // Policy trained under the env's ground-truth shaped reward.
  const CemPolicy pi_gt = train_cem(senv, nullptr, cem);

  auto evaluate = [&](const CemPolicy& pi, double* rate, double* mean_step) {
    double succ = 0.0, steps = 0.0;
    for (int e = 0; e < episodes; ++e) {
      const EpisodeStats st = run_cem_episode(senv, pi, seed * 31 + 1000 + e);
      succ += st.success ? 1.0 : 0.0;
      steps += st.success ? st.success_step : senv.horizon;
    }
    *rate = succ / episodes;
    *mean_step = steps / episodes;
  };
  evaluate(pi_airl, &rep.airl_success_rate, &rep.airl_mean_success_step);
  evaluate(pi_gt, &rep.gt_success_rate, &rep.gt_mean_success_step);
  return rep;
}

void save_reward_model(const RewardModel& m, const std::string& path) {
  CheckpointWriter w(path);
  w.header({{"kind", "reward-model"},
            {"task_id", m.task_id},
            {"topology", "6-64-64-1"},
            {"gamma", std::to_string(m.gamma)},
            {"rescale_lo", std::to_string(m.rescale_lo)},
            {"rescale_hi", std::to_string(m.rescale_hi)},
            {"raw_lo", format_double(m.raw_lo)},
            {"raw_hi", format_double(m.raw_hi)},
            {"seed", std::to_string(m.seed)}});
  w.tensor("g", m.g.flatten());
  w.tensor("h", m.h.flatten());
}

RewardModel load_reward_model(const std::string& path) {
  CheckpointReader r(path);
  RewardModel m;
  m.task_id = r.header_at("task_id");
  m.gamma = std::stod(r.header_at("gamma"));
  m.rescale_lo = std::stod(r.header_at("rescale_lo"));
  m.rescale_hi = std::stod(r.header_at("rescale_hi"));
  m.raw_lo = std::stod(r.header_at("raw_lo"));
  m.raw_hi = std::stod(r.header_at("raw_hi"));
  m.seed = std::stoull(r.header_at("seed"));
  m.g = Mlp::init(6, 0);
  m.h = Mlp::init(6, 0);
  m.g.unflatten(r.tensor("g"));
  m.h.unflatten(r.tensor("h"));
  return m;
}

}  // namespace dualmdp
