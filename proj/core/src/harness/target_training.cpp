#include "dfx/harness/target_training.hpp"

#include <fstream>

#include <json.hpp>

namespace dfx::harness {

TargetTrainingResult train_target(const DatasetStore& data, const models::TargetConfig& config,
                                  const TargetTrainingConfig& training, std::uint64_t seed,
                                  const EpochObserver& observer) {
  if (data.train_images.rank() != 4 || data.train_labels.empty()) throw DatasetError("training split is empty");
  nn::Rng rng(seed);
  TargetTrainingResult result{models::build_target(config, rng.split(1).next_u64()), 0.0, 0};
  nn::Optimizer opt(result.target.parameters(),
                    nn::OptimizerConfig{nn::OptimizerKind::Adam, training.learning_rate});
  nn::Rng order_rng = rng.split(2);
  const std::size_t n = data.train_labels.size();
  for (std::size_t epoch = 0; epoch < training.epochs; ++epoch) {
    const auto order = order_rng.permutation(n);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += training.batch_size) {
      const std::size_t end = std::min(n, start + training.batch_size);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> labels(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = data.train_labels[rows[i]];
      nn::Tape tape;
      const nn::Tensor logits = result.target.logits(tape, nn::gather_rows(data.train_images, rows));
      const nn::Tensor loss = nn::softmax_cross_entropy(tape, logits, nn::one_hot(labels, config.classes));
      tape.backward(loss);
      opt.step();
      opt.zero_grad();
      loss_sum += loss.item();
      ++batches;
    }
    if (observer) observer(epoch + 1, loss_sum / static_cast<double>(batches));
  }
  result.steps = opt.steps();
  result.test_accuracy = classification_accuracy(result.target, data.test_images, data.test_labels);
  return result;
}

double classification_accuracy(const models::Classifier& model, const nn::Tensor& images,
                               std::span<const int> labels) {
  if (images.rank() == 0 || images.dim(0) != labels.size() || labels.empty()) {
    throw nn::ShapeError("accuracy needs one label per image");
  }
  const auto predicted = nn::argmax_rows(models::predict_logits(model, images));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

void save_target(const TargetTrainingResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  result.target.save(path);
  std::ofstream meta(path.string() + ".json", std::ios::trunc);
  if (!meta) throw std::runtime_error("cannot write " + path.string() + ".json");
  meta << nlohmann::json{{"test_accuracy", result.test_accuracy}, {"steps", result.steps}}.dump(2) << '\n';
}

double read_target_accuracy(const std::filesystem::path& checkpoint) {
  const std::filesystem::path meta = checkpoint.string() + ".json";
  std::ifstream in(meta);
  if (!in) throw std::runtime_error("no accuracy record at " + meta.string());
  return nlohmann::json::parse(in).at("test_accuracy").get<double>();
}

}  // namespace dfx::harness
