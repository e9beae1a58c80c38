#include "dualmdp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dualmdp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty())
    throw std::invalid_argument("experiment: seed list is empty");
  if (budget_per_family <= 0)
    throw std::invalid_argument("experiment: budget must be positive");
  if (eval_episodes <= 0)
    throw std::invalid_argument("experiment: eval episodes must be positive");
  if (variant != "dual-mdp" && variant != "omdp-only" && variant != "no-language")
    throw std::invalid_argument("experiment: unknown variant " + variant);
  group_families(group);  // throws on unknown group
}

TrainConfig ExperimentConfig::train_config(uint64_t seed) const {
  TrainConfig cfg = base;
  cfg.seed = seed;
  cfg.step_budget_per_family = budget_per_family;
  cfg.eval_episodes = eval_episodes;
  if (variant == "dual-mdp") {
    cfg.use_smdp = true;
    cfg.use_language = true;
  } else if (variant == "omdp-only") {
    cfg.use_smdp = false;
    cfg.use_language = true;
  } else {  // no-language
    cfg.use_smdp = false;
    cfg.use_language = false;
  }
  return cfg;
}

Aggregate aggregate_of(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  for (double x : xs) a.mean += x;
  a.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double var = 0.0;
    for (double x : xs) var += (x - a.mean) * (x - a.mean);
    var /= static_cast<double>(xs.size() - 1);
    a.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  }
  return a;
}

ResultTable run_experiment(const ExperimentConfig& cfg,
                           std::vector<SeedOutcome>* outcomes) {
  cfg.validate();
  const TaskSetRegistry reg = cfg.registry_config.empty()
                                  ? builtin_registry()
                                  : load_registry(cfg.registry_config);
  const std::vector<std::string> families = group_families(cfg.group);

  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

  ResultTable table;
  table.group = cfg.group;
  table.variant = cfg.variant;
  table.families = families;
  table.seeds_requested = static_cast<int>(cfg.seeds.size());

  std::map<std::string, std::vector<double>> train_rates, test_rates;
  std::vector<double> train_agg, test_agg;
  std::vector<long> steps;
  // curve samples per seed, merged later on a common step grid
  std::vector<std::vector<std::pair<long, double>>> curves;

  for (uint64_t seed : cfg.seeds) {
    SeedOutcome oc;
    oc.seed = seed;
    const std::string seed_dir =
        cfg.out_dir.empty() ? ""
                            : cfg.out_dir + "/seed_" + std::to_string(seed);
    try {
      if (!seed_dir.empty()) fs::create_directories(seed_dir);
      std::ofstream log;
      if (!seed_dir.empty()) {
        log.open(seed_dir + "/train_log.csv");
        log << "iteration,task_id,phase,success_rate,mean_return,wall_time\n";
      }
      const TrainConfig tc = cfg.train_config(seed);
      MetaTrainResult mt =
          meta_train(reg, families, tc, log.is_open() ? &log : nullptr);

      // Final-policy evaluation on the meta-training tasks.
      double tr_sum = 0.0;
      for (const std::string& fam : families) {
        const TaskEnv& env = reg.find(fam);
        const TaskTestMetrics m = evaluate_task(
            mt.policy, env, reg.instruction_text(env.instruction_id), tc,
            cfg.eval_episodes, seed * 50021ull + 3);
        oc.train_success[fam] = m.success_rate;
        tr_sum += m.success_rate;
      }
      // Meta-test on the perturbed symmetrical tasks.
      const MetaTestMetrics tm =
          meta_test(mt.policy, reg, families, tc, cfg.eval_episodes,
                    seed * 60013ull + 7);
      double te_sum = 0.0;
      for (const TaskTestMetrics& m : tm.tasks) {
        oc.test_success[m.family] = m.success_rate;
        te_sum += m.success_rate;
        for (int t = 0; t < 3; ++t)
          oc.trial_success[static_cast<size_t>(t)] +=
              m.trial_success[static_cast<size_t>(t)] /
              static_cast<double>(tm.tasks.size());
      }
      oc.env_steps = mt.env_steps;
      oc.ok = true;

      if (!seed_dir.empty()) {
        json res;
        res["seed"] = seed;
        res["variant"] = cfg.variant;
        res["group"] = cfg.group;
        res["train_success"] = oc.train_success;
        res["test_success"] = oc.test_success;
        res["env_steps"] = oc.env_steps;
        res["converged"] = mt.converged;
        res["warning"] = mt.warning;
        std::ofstream(seed_dir + "/result.json") << res.dump(2) << "\n";
        std::ofstream curve(seed_dir + "/curve.csv");
        curve << "env_steps,train_success\n";
        for (const auto& [s, r] : mt.curve) curve << s << "," << fmt(r) << "\n";
        save_policy(mt.policy, seed_dir + "/policy.ckpt");
      }

      for (const std::string& fam : families) {
        const std::string sym = symmetric_family(fam);
        train_rates[fam].push_back(oc.train_success[fam]);
        test_rates[sym].push_back(oc.test_success[sym]);
      }
      train_agg.push_back(tr_sum / static_cast<double>(families.size()));
      test_agg.push_back(te_sum / static_cast<double>(families.size()));
      steps.push_back(mt.env_steps);
      curves.push_back(mt.curve);
    } catch (const std::exception& ex) {
      oc.ok = false;
      oc.error = ex.what();
    }
    if (outcomes) outcomes->push_back(oc);
  }

  table.seeds_completed = static_cast<int>(train_agg.size());
  if (table.seeds_completed == 0)
    throw std::runtime_error("run_experiment: every seed failed");
  for (const auto& [fam, xs] : train_rates)
    table.train_success[fam] = aggregate_of(xs);
  for (const auto& [fam, xs] : test_rates)
    table.test_success[fam] = aggregate_of(xs);
  table.train_success["aggregate"] = aggregate_of(train_agg);
  table.test_success["aggregate"] = aggregate_of(test_agg);
  long s = 0;
  for (long x : steps) s += x;
  table.mean_env_steps = s / static_cast<long>(steps.size());

  if (!cfg.out_dir.empty())
    write_result_table(table, cfg.out_dir + "/table.csv");
  return table;
}

void write_result_table(const ResultTable& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write result table: " + path);
  out << "group,variant,metric,name,mean,stderr\n";
  auto dump = [&](const char* metric,
                  const std::map<std::string, Aggregate>& m) {
    for (const auto& [name, a] : m)
      out << t.group << "," << t.variant << "," << metric << "," << name << ","
          << fmt(a.mean) << "," << fmt(a.stderr_) << "\n";
  };
  dump("meta_train", t.train_success);
  dump("meta_test", t.test_success);
  out << t.group << "," << t.variant << ",seeds,completed,"
      << t.seeds_completed << "," << t.seeds_requested << "\n";
  out << t.group << "," << t.variant << ",env_steps,mean," << t.mean_env_steps
      << ",0\n";
}

ResultTable read_result_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open result table: " + path);
  ResultTable t;
  std::string line;
  std::getline(in, line);  // header
  if (line != "group,variant,metric,name,mean,stderr")
    throw std::runtime_error("result table schema mismatch: " + path);
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string group, variant, metric, name, mean, se;
    std::getline(ls, group, ',');
    std::getline(ls, variant, ',');
    std::getline(ls, metric, ',');
    std::getline(ls, name, ',');
    std::getline(ls, mean, ',');
    std::getline(ls, se, ',');
    t.group = group;
    t.variant = variant;
    if (metric == "meta_train")
      t.train_success[name] = {std::stod(mean), std::stod(se)};
    else if (metric == "meta_test")
      t.test_success[name] = {std::stod(mean), std::stod(se)};
    else if (metric == "seeds")
      t.seeds_completed = std::stoi(mean);
    else if (metric == "env_steps")
      t.mean_env_steps = std::stol(mean);
  }
  for (const auto& [name, a] : t.train_success)
    if (name != "aggregate") t.families.push_back(name);
  return t;
}

void report(const std::vector<std::string>& result_dirs,
            const std::string& out_dir) {
  if (result_dirs.empty())
    throw std::invalid_argument("report: no result directories");
  std::vector<ResultTable> tables;
  for (const std::string& dir : result_dirs)
    tables.push_back(read_result_table(dir + "/table.csv"));

  for (const ResultTable& t : tables) {
    if (t.group != tables.front().group)
      throw std::runtime_error("report: group mismatch across runs");
    if (t.families != tables.front().families)
      throw std::runtime_error("report: family set mismatch across runs");
    if (t.test_success.find("aggregate") == t.test_success.end())
      throw std::runtime_error("report: missing meta-test aggregate column");
  }

  fs::create_directories(out_dir);
  std::ofstream out(out_dir + "/comparison.csv");
  out << "method,meta_train_mean,meta_train_stderr,meta_test_mean,"
         "meta_test_stderr\n";
  for (const ResultTable& t : tables) {
    const Aggregate& tr = t.train_success.at("aggregate");
    const Aggregate& te = t.test_success.at("aggregate");
    out << t.variant << "," << fmt(tr.mean) << "," << fmt(tr.stderr_) << ","
        << fmt(te.mean) << "," << fmt(te.stderr_) << "\n";
  }
  // Meta-test delta of the first variant over each other variant.
  if (tables.size() > 1) {
    std::ofstream delta(out_dir + "/deltas.csv");
    delta << "method_a,method_b,meta_test_delta\n";
    for (size_t i = 1; i < tables.size(); ++i)
      delta << tables.front().variant << "," << tables[i].variant << ","
            << fmt(tables.front().test_success.at("aggregate").mean -
                   tables[i].test_success.at("aggregate").mean)
            << "\n";
  }

  // Per-family learning curves, one column per method.
  for (const std::string& fam : tables.front().families) {
    std::ofstream curve(out_dir + "/curve_" + fam + ".csv");
    curve << "env_steps";
    std::vector<std::vector<std::pair<long, double>>> per_method;
    for (size_t i = 0; i < result_dirs.size(); ++i) {
      curve << "," << tables[i].variant;
      // average the per-seed curves of this run
      std::vector<std::pair<long, double>> merged;
      for (const auto& entry : fs::directory_iterator(result_dirs[i])) {
        if (!entry.is_directory()) continue;
        const fs::path p = entry.path() / "curve.csv";
        if (!fs::exists(p)) continue;
        std::ifstream in(p);
        std::string line;
        std::getline(in, line);
        size_t k = 0;
        while (std::getline(in, line)) {
          const size_t comma = line.find(',');
          const long s = std::stol(line.substr(0, comma));
          const double r = std::stod(line.substr(comma + 1));
          if (k >= merged.size())
            merged.push_back({s, r});
          else {
            merged[k].first = std::max(merged[k].first, s);
            merged[k].second += r;
          }
          ++k;
        }
      }
      int n_seeds = 0;
      for (const auto& entry : fs::directory_iterator(result_dirs[i]))
        if (entry.is_directory() && fs::exists(entry.path() / "curve.csv"))
          ++n_seeds;
      for (auto& [s, r] : merged) r /= std::max(1, n_seeds);
      per_method.push_back(std::move(merged));
    }
    curve << "\n";
    size_t rows = 0;
    for (const auto& m : per_method) rows = std::max(rows, m.size());
    for (size_t r = 0; r < rows; ++r) {
      long s = 0;
      for (const auto& m : per_method)
        if (r < m.size()) s = std::max(s, m[r].first);
      curve << s;
      for (const auto& m : per_method) {
        curve << ",";
        if (r < m.size()) curve << fmt(m[r].second);
      }
      curve << "\n";
    }
  }
}

}  // namespace dualmdp
