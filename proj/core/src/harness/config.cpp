#include "dfx/harness/config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace dfx::harness {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("invalid config: " + message);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void ExperimentConfig::validate() const {
  require(dataset.classes >= 2, "dataset needs at least two classes");
  require(dataset.geometry.pixels() > 0, "image geometry must be nonzero");
  require(dataset.geometry.height % 4 == 0 && dataset.geometry.width % 4 == 0,
          "image height and width must be divisible by 4");
  require(query_budget > 0, "budget must be positive");
  require(batch_size >= 2, "batch must be at least 2");
  require(batch_size <= query_budget, "batch (" + std::to_string(batch_size) + ") exceeds budget (" +
                                          std::to_string(query_budget) + ")");
  require(noise_dim > 0, "noise dimension must be positive");
  require(substitute_steps >= 1, "substitute steps must be at least 1");
  try {
    generator_optimizer.validate();
    substitute_optimizer.validate();
    objective.validate();
    mixup.validate();
  } catch (const std::invalid_argument& e) {
    require(false, e.what());
  }
  require(!attacks.empty(), "at least one attack is required");
  require(in_unit(epsilon), "epsilon must lie in [0, 1]");
  require(attack_steps >= 1, "attack steps must be at least 1");
  require(attack_step_size >= 0.0 && std::isfinite(attack_step_size), "attack step size must be >= 0");
  require(eval_examples > 0, "eval examples must be positive");
  require(diversity_examples >= 2, "diversity examples must be at least 2");
  require(probe_size > 0, "probe size must be positive");
  require(target_training.epochs > 0, "target epochs must be positive");
  require(target_training.batch_size > 0, "target batch must be positive");
  require(target_training.learning_rate > 0.0 && std::isfinite(target_training.learning_rate),
          "target learning rate must be positive");
}

models::GeneratorConfig ExperimentConfig::generator_config() const {
  models::GeneratorConfig g;
  g.noise_dim = noise_dim;
  g.geometry = dataset.geometry;
  return g;
}

models::SubstituteConfig ExperimentConfig::substitute_config() const {
  models::SubstituteConfig s;
  s.geometry = dataset.geometry;
  s.classes = dataset.classes;
  return s;
}

models::TargetConfig ExperimentConfig::target_config() const {
  models::TargetConfig t;
  t.geometry = dataset.geometry;
  t.classes = dataset.classes;
  return t;
}

attacks::AttackConfig ExperimentConfig::attack_config(attacks::AttackMethod method, bool targeted_scenario) const {
  attacks::AttackConfig a;
  a.method = method;
  a.epsilon = epsilon;
  a.steps = attack_steps;
  a.step_size = attack_step_size;
  a.targeted = targeted_scenario;
  return a;
}

std::string join_attacks(const std::vector<attacks::AttackMethod>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i > 0) out += ',';
    out += attacks::to_string(methods[i]);
  }
  return out;
}

std::vector<attacks::AttackMethod> parse_attack_list(const std::string& text) {
  std::vector<attacks::AttackMethod> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(attacks::parse_attack_method(item));
  }
  if (out.empty()) throw std::invalid_argument("empty attack list");
  return out;
}

std::string to_ini(const ExperimentConfig& c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string s;
  s += fmt::format("dataset = {}\n", c.dataset.name);
  s += fmt::format("data-dir = \"{}\"\n", c.dataset.directory.generic_string());
  s += fmt::format("target = \"{}\"\n", c.target_checkpoint.generic_string());
  s += fmt::format("epochs = {}\n", c.target_training.epochs);
  s += fmt::format("target-batch = {}\n", c.target_training.batch_size);
  s += fmt::format("target-lr = {:.17g}\n", c.target_training.learning_rate);
  s += fmt::format("label-mode = {}\n", oracle::to_string(c.label_mode));
  s += fmt::format("budget = {}\n", c.query_budget);
  s += fmt::format("batch = {}\n", c.batch_size);
  s += fmt::format("noise-dim = {}\n", c.noise_dim);
  s += fmt::format("generator-lr = {:.17g}\n", c.generator_optimizer.learning_rate);
  s += fmt::format("substitute-lr = {:.17g}\n", c.substitute_optimizer.learning_rate);
  s += fmt::format("substitute-optimizer = {}\n", nn::to_string(c.substitute_optimizer.kind));
  s += fmt::format("momentum = {:.17g}\n", c.substitute_optimizer.momentum);
  s += fmt::format("substitute-steps = {}\n", c.substitute_steps);
  s += fmt::format("replay = {}\n", b(c.replay_queries));
  s += fmt::format("alpha = {:.17g}\n", c.objective.alpha);
  s += fmt::format("beta = {:.17g}\n", c.mixup.beta_param);
  s += fmt::format("inter-mode = {}\n", losses::to_string(c.objective.inter_mode));
  s += fmt::format("no-intra = {}\n", b(!c.objective.use_intra));
  s += fmt::format("no-inter = {}\n", b(!c.objective.use_inter));
  s += fmt::format("no-mixup = {}\n", b(!c.use_mixup));
  s += fmt::format("noise-queries = {}\n", b(c.random_noise_queries));
  s += fmt::format("attack = {}\n", join_attacks(c.attacks));
  s += fmt::format("epsilon = {:.17g}\n", c.epsilon);
  s += fmt::format("steps = {}\n", c.attack_steps);
  s += fmt::format("step-size = {:.17g}\n", c.attack_step_size);
  s += fmt::format("targeted = {}\n", b(c.targeted));
  s += fmt::format("eval-examples = {}\n", c.eval_examples);
  s += fmt::format("diversity-examples = {}\n", c.diversity_examples);
  s += fmt::format("probe-size = {}\n", c.probe_size);
  s += fmt::format("export-embeddings = {}\n", b(c.export_embeddings));
  s += fmt::format("seed = {}\n", c.seed);
  return s;
}

}  // namespace dfx::harness
