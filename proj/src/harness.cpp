#include "mbrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mbrl/cyber_model.hpp"

namespace mbrl {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::size_t> parse_size_list(const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    out.push_back(static_cast<std::size_t>(std::stoul(part)));
  }
  if (out.empty()) throw std::invalid_argument("empty size list");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

TrainerKind trainer_kind_from_name(const std::string& name) {
  if (name == "dqn") return TrainerKind::Dqn;
  if (name == "dqn5") return TrainerKind::Dqn5;
  if (name == "dqn-mem2000") return TrainerKind::DqnLargeMemory;
  if (name == "reinforce") return TrainerKind::Reinforce;
  if (name == "random") return TrainerKind::Random;
  if (name == "fixed") return TrainerKind::Fixed;
  if (name == "nocyber") return TrainerKind::NoCyber;
  if (name == "ensemble") return TrainerKind::Ensemble;
  throw std::invalid_argument("unknown trainer kind: " + name);
}

std::string trainer_kind_name(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::Dqn: return "dqn";
    case TrainerKind::Dqn5: return "dqn5";
    case TrainerKind::DqnLargeMemory: return "dqn-mem2000";
    case TrainerKind::Reinforce: return "reinforce";
    case TrainerKind::Random: return "random";
    case TrainerKind::Fixed: return "fixed";
    case TrainerKind::NoCyber: return "nocyber";
    case TrainerKind::Ensemble: return "ensemble";
  }
  return "?";
}

ExperimentConfig default_config(Task task) {
  ExperimentConfig c;
  c.task = task;
  if (task == Task::MountainCar) {
    c.budget_n = 30000;
    c.k_real = 1;
    c.t_real = 1;
    c.init_samples = 1000;
    c.eval_interval = 300;
    c.ensemble_c = 100;
  }
  return c;
}

long ExperimentConfig::trainer_step_limit() const {
  long init = trainer == TrainerKind::Ensemble ? 3 * init_samples : init_samples;
  long remaining = std::max<long>(budget_n - init, 1);
  return (remaining + k_real - 1) / k_real;
}

void ExperimentConfig::validate() const {
  if (budget_n <= 0) throw ConfigError("budget_n must be positive");
  if (k_real < 1) throw ConfigError("k_real must be >= 1");
  if (t_real < 0) throw ConfigError("t_real must be >= 0");
  if (init_samples < 0) throw ConfigError("init_samples must be >= 0");
  if (init_samples > budget_n) throw ConfigError("init_samples exceeds budget_n");
  if (eval_interval < 1) throw ConfigError("eval_interval must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (m1 <= m2 || m2 <= 0) throw ConfigError("need m1 > m2 > 0");
  if (model_epochs < 0) throw ConfigError("model_epochs must be >= 0");
  if (!(anneal_fraction > 0.0 && anneal_fraction <= 1.0)) {
    throw ConfigError("anneal_fraction must be in (0, 1]");
  }
  if (ensemble_c < 1) throw ConfigError("ensemble_c must be >= 1");
  if (!(phi_max > phi_min)) throw ConfigError("need phi_max > phi_min");
  try {
    fixed_action.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("fixed action invalid: ") + e.what());
  }
  if (trainer == TrainerKind::Ensemble) {
    if (k_real % 3 != 0) throw ConfigError("ensemble requires k_real divisible by 3");
    if (3 * init_samples > budget_n) {
      throw ConfigError("ensemble requires budget_n >= 3 * init_samples");
    }
  }
}

namespace {

void apply_kv(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_long = [&] { return std::stol(value); };
  auto as_double = [&] { return std::stod(value); };
  auto as_size = [&] { return static_cast<std::size_t>(std::stoul(value)); };

  if (key == "task") c.task = task_from_name(value);
  else if (key == "trainer") c.trainer = trainer_kind_from_name(value);
  else if (key == "tpe_obs") c.tpe_obs = obs_mode_from_name(value);
  else if (key == "budget_n") c.budget_n = as_long();
  else if (key == "k_real") c.k_real = as_long();
  else if (key == "t_real") c.t_real = as_long();
  else if (key == "init_samples") c.init_samples = as_long();
  else if (key == "eval_interval") c.eval_interval = as_long();
  else if (key == "eval_episodes") c.eval_episodes = as_long();
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "output_dir") c.output_dir = value;
  else if (key == "gamma") c.ddpg.gamma = as_double();
  else if (key == "tau") c.ddpg.tau = as_double();
  else if (key == "actor_lr") c.ddpg.actor_lr = as_double();
  else if (key == "critic_lr") c.ddpg.critic_lr = as_double();
  else if (key == "batch_size") c.ddpg.batch_size = as_size();
  else if (key == "noise_scale") c.ddpg.noise_scale = as_double();
  else if (key == "warmup_size") c.ddpg.warmup_size = as_size();
  else if (key == "actor_hidden") c.ddpg.actor_hidden = parse_size_list(value);
  else if (key == "critic_hidden") c.ddpg.critic_hidden = parse_size_list(value);
  else if (key == "buffer_capacity") c.buffer_capacity = as_size();
  else if (key == "model_hidden") c.model_hidden = parse_size_list(value);
  else if (key == "model_lr") c.model_lr = as_double();
  else if (key == "model_batch") c.model_batch = as_size();
  else if (key == "model_epochs") c.model_epochs = static_cast<int>(as_long());
  else if (key == "m1") c.m1 = static_cast<int>(as_long());
  else if (key == "m2") c.m2 = static_cast<int>(as_long());
  else if (key == "trainer_gamma") c.trainer_gamma = as_double();
  else if (key == "trainer_lr") c.trainer_lr = as_double();
  else if (key == "trainer_hidden") c.trainer_hidden = as_size();
  else if (key == "final_epsilon") c.final_epsilon = as_double();
  else if (key == "anneal_fraction") c.anneal_fraction = as_double();
  else if (key == "dqn_memory") c.dqn_memory = as_size();
  else if (key == "reinforce_episode") c.reinforce_episode = static_cast<int>(as_long());
  else if (key == "a0") c.fixed_action.a0 = as_double();
  else if (key == "a1") c.fixed_action.a1 = as_double();
  else if (key == "a2") c.fixed_action.a2 = as_double();
  else if (key == "ensemble_c") c.ensemble_c = as_long();
  else if (key == "stop_at_return") {
    if (value == "none") c.stop_at_return.reset();
    else c.stop_at_return = as_double();
  }
  else if (key == "phi_max") c.phi_max = as_double();
  else if (key == "phi_min") c.phi_min = as_double();
  else throw ConfigError("unknown key: " + key);
}

struct ParsedLine {
  std::string key;
  std::string value;
  int line_number;
};

std::vector<ParsedLine> tokenize_config(const std::string& text) {
  std::vector<ParsedLine> entries;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    entries.push_back({trim(t.substr(0, eq)), trim(t.substr(eq + 1)), number});
  }
  return entries;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<ConfigOverride>& overrides) {
  std::vector<ParsedLine> entries = tokenize_config(text);

  // Task decides the baseline defaults; the command line wins over the file.
  Task task = Task::Pendulum;
  for (const ParsedLine& e : entries) {
    if (e.key == "task") task = task_from_name(e.value);
  }
  for (const ConfigOverride& o : overrides) {
    if (o.key == "task") task = task_from_name(o.value);
  }

  ExperimentConfig config = default_config(task);
  for (const ParsedLine& e : entries) {
    try {
      apply_kv(config, e.key, e.value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError("line " + std::to_string(e.line_number) + ": bad value for '" + e.key +
                        "': " + ex.what());
    }
  }
  for (const ConfigOverride& o : overrides) {
    try {
      apply_kv(config, o.key, o.value);
    } catch (const ConfigError& ex) {
      throw ConfigError(std::string("override ") + o.key + ": " + ex.what());
    } catch (const std::exception& ex) {
      throw ConfigError("override " + o.key + ": bad value: " + ex.what());
    }
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::string& path,
                                   const std::vector<ConfigOverride>& overrides) {
  std::string text;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(text, overrides);
}

// ---------------------------------------------------------------------------

double rollout_return(Environment& env, const DdpgController& controller, RngStream& rng,
                      const std::vector<double>* start) {
  if (start) {
    env.reset_to(*start);
  } else {
    env.reset_random(rng);
  }
  double total = 0.0;
  while (!env.episode_done()) {
    std::vector<double> state = env.current_state();
    std::vector<double> action = controller.act(state, false, rng);
    StepResult res = env.step(action);
    total += res.reward;
  }
  return total;
}

std::pair<double, double> evaluate(const DdpgController& controller, Environment& test_env,
                                   long episodes, RngStream& rng) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  std::vector<double> returns(static_cast<std::size_t>(episodes));
  for (double& r : returns) r = rollout_return(test_env, controller, rng);
  double mean = 0.0;
  for (double r : returns) mean += r;
  mean /= static_cast<double>(episodes);
  double var = 0.0;
  for (double r : returns) var += (r - mean) * (r - mean);
  var /= static_cast<double>(episodes);
  return {mean, std::sqrt(var)};
}

// ---------------------------------------------------------------------------

namespace {

}  // namespace

std::unique_ptr<Trainer> make_trainer(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<double> two{0.2, 1.0};
  std::vector<double> five{0.2, 0.4, 0.6, 0.8, 1.0};
  switch (config.trainer) {
    case TrainerKind::Dqn:
    case TrainerKind::DqnLargeMemory:
    case TrainerKind::Dqn5: {
      DqnTrainerConfig tc;
      tc.memory = config.trainer == TrainerKind::DqnLargeMemory ? 2000 : config.dqn_memory;
      tc.total_steps = config.trainer_step_limit();
      tc.final_epsilon = config.final_epsilon;
      tc.anneal_fraction = config.anneal_fraction;
      tc.gamma = config.trainer_gamma;
      tc.learning_rate = config.trainer_lr;
      tc.hidden = config.trainer_hidden;
      auto table = ActionTable::uniform(config.trainer == TrainerKind::Dqn5 ? five : two);
      return std::make_unique<DqnTrainer>(std::move(table), tc, seed);
    }
    case TrainerKind::Reinforce: {
      ReinforceTrainerConfig rc;
      rc.episode_length = config.reinforce_episode;
      rc.learning_rate = config.trainer_lr;
      rc.hidden = config.trainer_hidden;
      return std::make_unique<ReinforceTrainer>(ActionTable::uniform(two), rc, seed);
    }
    case TrainerKind::Random:
      return std::make_unique<BaselineTrainer>(BaselineKind::Random, ActionTable::uniform(two));
    case TrainerKind::Fixed:
      return std::make_unique<BaselineTrainer>(BaselineTrainer::fixed(config.fixed_action));
    case TrainerKind::NoCyber:
      return std::make_unique<BaselineTrainer>(BaselineKind::NoCyber);
    case TrainerKind::Ensemble:
      throw std::logic_error("make_trainer: the ensemble wires its slots itself");
  }
  throw std::logic_error("make_trainer: unreachable");
}

namespace {

TpeConfig make_tpe_config(const ExperimentConfig& config, long k_real) {
  TpeConfig tc;
  tc.k_real = k_real;
  tc.t_real = config.t_real;
  tc.init_samples = config.init_samples;
  tc.m1 = config.m1;
  tc.m2 = config.m2;
  tc.model_epochs = config.model_epochs;
  tc.obs_mode = config.tpe_obs;
  tc.real_buffer_capacity = config.buffer_capacity;
  tc.cyber_buffer_capacity = config.buffer_capacity;
  return tc;
}

DynamicsModelConfig make_model_config(const ExperimentConfig& config) {
  return {config.model_hidden, config.model_lr, config.model_batch};
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["task"] = task_name(c.task);
  j["trainer"] = trainer_kind_name(c.trainer);
  j["tpe_obs"] = c.tpe_obs == TpeObsMode::Constant
                     ? "const"
                     : (c.tpe_obs == TpeObsMode::LastAvgReward ? "v1" : "v2");
  j["budget_n"] = c.budget_n;
  j["k_real"] = c.k_real;
  j["t_real"] = c.t_real;
  j["init_samples"] = c.init_samples;
  j["eval_interval"] = c.eval_interval;
  j["eval_episodes"] = c.eval_episodes;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["gamma"] = c.ddpg.gamma;
  j["tau"] = c.ddpg.tau;
  j["actor_lr"] = c.ddpg.actor_lr;
  j["critic_lr"] = c.ddpg.critic_lr;
  j["batch_size"] = c.ddpg.batch_size;
  j["noise_scale"] = c.ddpg.noise_scale;
  j["warmup_size"] = c.ddpg.warmup_size;
  j["actor_hidden"] = c.ddpg.actor_hidden;
  j["critic_hidden"] = c.ddpg.critic_hidden;
  j["buffer_capacity"] = c.buffer_capacity;
  j["model_hidden"] = c.model_hidden;
  j["model_lr"] = c.model_lr;
  j["model_batch"] = c.model_batch;
  j["model_epochs"] = c.model_epochs;
  j["m1"] = c.m1;
  j["m2"] = c.m2;
  j["trainer_gamma"] = c.trainer_gamma;
  j["trainer_lr"] = c.trainer_lr;
  j["trainer_hidden"] = c.trainer_hidden;
  j["final_epsilon"] = c.final_epsilon;
  j["anneal_fraction"] = c.anneal_fraction;
  j["dqn_memory"] = c.dqn_memory;
  j["reinforce_episode"] = c.reinforce_episode;
  j["fixed_action"] = {c.fixed_action.a0, c.fixed_action.a1, c.fixed_action.a2};
  j["ensemble_c"] = c.ensemble_c;
  if (c.stop_at_return) j["stop_at_return"] = *c.stop_at_return;
  j["phi_max"] = c.phi_max;
  j["phi_min"] = c.phi_min;
  return j;
}

class RunWriter {
 public:
  RunWriter(const std::string& dir) : dir_(dir) {
    std::filesystem::create_directories(dir);
    curve_.open(dir + "/learning_curve.csv");
    actions_.open(dir + "/actions.csv");
    if (!curve_ || !actions_) throw std::runtime_error("cannot write outputs in " + dir);
    curve_ << "tpe_step,real_samples,mean_return,return_std\n";
    actions_ << "tpe_step,a0,a1,a2,trainer_reward\n";
  }

  void eval_row(const EvalRecord& r) {
    curve_ << r.tpe_step << ',' << r.real_samples_used << ',' << format_double(r.mean_return)
           << ',' << format_double(r.return_std) << '\n';
  }

  void action_row(long step, const TpeAction& a, double trainer_reward) {
    actions_ << step << ',' << format_double(a.a0) << ',' << format_double(a.a1) << ','
             << format_double(a.a2) << ',' << format_double(trainer_reward) << '\n';
  }

  void manifest(const ExperimentConfig& config, const RunResult& result,
                const std::string& started, const std::string& finished) {
    nlohmann::json j;
    j["config"] = config_to_json(config);
    j["started_at"] = started;
    j["finished_at"] = finished;
    for (const char* module : {"numerics", "envs", "cyber_model", "controller", "tpe",
                               "trainers", "ensemble", "harness"}) {
      j["modules"][module] = kVersion;
    }
    j["final"]["tpe_steps"] = result.tpe_steps;
    j["final"]["real_samples_used"] = result.real_samples_used;
    if (!result.curve.empty()) {
      j["final"]["last_eval_mean"] = result.curve.back().mean_return;
      double best = result.curve.front().mean_return;
      for (const auto& r : result.curve) best = std::max(best, r.mean_return);
      j["final"]["best_eval_mean"] = best;
    }
    std::ofstream out(dir_ + "/manifest.json");
    out << j.dump(2) << '\n';
  }

 private:
  std::string dir_;
  std::ofstream curve_;
  std::ofstream actions_;
};

std::string timestamp_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

RunResult run_uni_head(const ExperimentConfig& config) {
  auto budget = std::make_shared<SampleBudget>(config.budget_n);
  auto train_env = make_env(config.task);
  auto test_env = make_env(config.task);

  DdpgParams ddpg = config.ddpg;
  DdpgController controller(train_env->spec(), ddpg, derive_seed(config.seed, 2));
  DynamicsModel model(train_env->spec(), make_model_config(config), derive_seed(config.seed, 3));
  Tpe tpe(make_tpe_config(config, config.k_real), *train_env, controller, model, budget,
          derive_seed(config.seed, 4));
  std::unique_ptr<Trainer> trainer = make_trainer(config, derive_seed(config.seed, 5));
  RngStream trainer_rng(derive_seed(config.seed, 6));
  RngStream eval_rng(derive_seed(config.seed, 7));

  std::string started = timestamp_now();
  RunWriter writer(config.output_dir);
  RunResult result;
  result.output_dir = config.output_dir;

  tpe.initialize();
  auto record_eval = [&](long step) {
    auto [mean, stddev] = evaluate(controller, *test_env, config.eval_episodes, eval_rng);
    EvalRecord rec{step, budget->used(), mean, stddev};
    result.curve.push_back(rec);
    writer.eval_row(rec);
    return mean;
  };
  record_eval(0);

  long step = 0;
  while (!tpe.done()) {
    double obs = tpe.observation();
    std::size_t index = trainer->select(obs, trainer_rng);
    TpeAction action = trainer->table().entry(index);
    TpeStepReport report = tpe.step(action);
    trainer->observe(obs, index, report.reward, report.observation, trainer_rng);
    ++step;
    writer.action_row(step, action, report.reward);
    if (step % config.eval_interval == 0 || report.done) {
      double mean = record_eval(step);
      if (config.stop_at_return && mean >= *config.stop_at_return) break;
    }
  }

  result.tpe_steps = step;
  result.real_samples_used = budget->used();
  writer.manifest(config, result, started, timestamp_now());
  return result;
}

RunResult run_ensemble(const ExperimentConfig& config) {
  auto budget = std::make_shared<SampleBudget>(config.budget_n);
  auto test_env = make_env(config.task);
  std::vector<double> two{0.2, 1.0};

  std::array<TrainerSlot, 3> slots;
  for (std::size_t i = 0; i < 3; ++i) {
    TrainerSlot& s = slots[i];
    s.env = make_env(config.task);
    s.controller = std::make_unique<DdpgController>(s.env->spec(), config.ddpg,
                                                    derive_seed(config.seed, 20 + i));
    s.model = std::make_unique<DynamicsModel>(s.env->spec(), make_model_config(config),
                                              derive_seed(config.seed, 30 + i));
    s.tpe = std::make_unique<Tpe>(make_tpe_config(config, config.k_real / 3), *s.env,
                                  *s.controller, *s.model, budget,
                                  derive_seed(config.seed, 40 + i));
  }
  DqnTrainerConfig tc;
  tc.memory = config.dqn_memory;
  tc.total_steps = config.trainer_step_limit();
  tc.final_epsilon = config.final_epsilon;
  tc.anneal_fraction = config.anneal_fraction;
  tc.gamma = config.trainer_gamma;
  tc.learning_rate = config.trainer_lr;
  tc.hidden = config.trainer_hidden;
  slots[0].trainer =
      std::make_unique<DqnTrainer>(ActionTable::uniform(two), tc, derive_seed(config.seed, 50));
  slots[1].trainer =
      std::make_unique<BaselineTrainer>(BaselineKind::Random, ActionTable::uniform(two));
  slots[2].trainer = std::make_unique<BaselineTrainer>(BaselineKind::NoCyber);

  EnsembleTrainer ensemble(std::move(slots),
                           {config.ensemble_c, config.phi_max, config.phi_min});
  RngStream rng(derive_seed(config.seed, 6));
  RngStream eval_rng(derive_seed(config.seed, 7));

  std::string started = timestamp_now();
  RunWriter writer(config.output_dir);
  RunResult result;
  result.output_dir = config.output_dir;

  ensemble.initialize();
  auto record_eval = [&](long step) {
    auto [mean, stddev] =
        evaluate(ensemble.best_controller(), *test_env, config.eval_episodes, eval_rng);
    EvalRecord rec{step, budget->used(), mean, stddev};
    result.curve.push_back(rec);
    writer.eval_row(rec);
    return mean;
  };
  record_eval(0);

  long step = 0;
  while (!ensemble.done()) {
    auto out = ensemble.step(rng);
    ++step;
    writer.action_row(step, out.actions[0], out.ranks[0]);
    if (step % config.eval_interval == 0 || out.done) {
      double mean = record_eval(step);
      if (config.stop_at_return && mean >= *config.stop_at_return) break;
    }
  }

  result.tpe_steps = step;
  result.real_samples_used = budget->used();
  writer.manifest(config, result, started, timestamp_now());
  return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.trainer == TrainerKind::Ensemble) return run_ensemble(config);
  return run_uni_head(config);
}

// ---------------------------------------------------------------------------

std::string plot_learning_curve(const std::string& run_dir) {
  std::ifstream in(run_dir + "/learning_curve.csv");
  if (!in) throw std::runtime_error("cannot open " + run_dir + "/learning_curve.csv");
  std::string header;
  std::getline(in, header);
  std::vector<double> xs, means, stds;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> fields;
    while (std::getline(ss, field, ',')) fields.push_back(std::stod(field));
    if (fields.size() != 4) throw std::runtime_error("malformed learning_curve.csv row");
    xs.push_back(fields[1]);
    means.push_back(fields[2]);
    stds.push_back(fields[3]);
  }
  if (xs.empty()) throw std::runtime_error("learning_curve.csv has no data rows");

  double xmin = xs.front(), xmax = xs.front();
  double ymin = means.front() - stds.front(), ymax = means.front() + stds.front();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, means[i] - stds[i]);
    ymax = std::max(ymax, means[i] + stds[i]);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double w = 900, h = 540, ml = 80, mr = 20, mt = 30, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  svg << "<polygon fill=\"#aaccee\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    svg << px(xs[i]) << ',' << py(means[i] + stds[i]) << ' ';
  }
  for (std::size_t i = xs.size(); i-- > 0;) {
    svg << px(xs[i]) << ',' << py(means[i] - stds[i]) << ' ';
  }
  svg << "\"/>\n";

  svg << "<polyline fill=\"none\" stroke=\"#1f5fa6\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) svg << px(xs[i]) << ',' << py(means[i]) << ' ';
  svg << "\"/>\n";

  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (w / 2) << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"14\">real samples</text>\n";
  svg << "<text x=\"16\" y=\"" << (h / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << (h / 2)
      << ")\">mean return</text>\n";
  svg << "<text x=\"" << ml << "\" y=\"" << h - mb + 18 << "\" font-size=\"12\">"
      << format_double(xmin) << "</text>\n";
  svg << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"end\" font-size=\"12\">" << format_double(xmax) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb << "\" text-anchor=\"end\" font-size=\"12\">"
      << format_double(ymin) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << format_double(ymax) << "</text>\n";
  svg << "</svg>\n";

  std::string out_path = run_dir + "/learning_curve.svg";
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << svg.str();
  return out_path;
}

}  // namespace mbrl
