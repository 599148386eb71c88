#include "dfx/oracle/oracle.hpp"

#include <ostream>

#include "dfx/models/target.hpp"

namespace dfx::oracle {

std::string to_string(LabelMode mode) { return mode == LabelMode::Hard ? "hard" : "soft"; }

LabelMode parse_label_mode(const std::string& name) {
  if (name == "hard") return LabelMode::Hard;
  if (name == "soft") return LabelMode::Soft;
  throw std::invalid_argument("unknown label mode '" + name + "' (expected hard or soft)");
}

BudgetExhausted::BudgetExhausted(std::size_t used, std::size_t limit, std::size_t requested)
    : std::runtime_error("query budget exhausted: " + std::to_string(used) + " of " + std::to_string(limit) +
                         " used, batch of " + std::to_string(requested) + " requested"),
      used_(used),
      limit_(limit),
      requested_(requested) {}

Oracle::Oracle(std::unique_ptr<models::TargetNet> target, std::size_t budget_limit)
    : target_(std::move(target)), budget_{budget_limit, 0} {
  if (!target_) throw std::invalid_argument("oracle needs a target model");
  if (budget_limit == 0) throw std::invalid_argument("query budget must be positive");
}

Oracle Oracle::from_checkpoint(const std::filesystem::path& checkpoint, const models::TargetConfig& config,
                               std::size_t budget_limit) {
  auto target = std::make_unique<models::TargetNet>(models::build_target(config, 0));
  target->load(checkpoint);
  return Oracle(std::move(target), budget_limit);
}

Oracle::~Oracle() = default;
Oracle::Oracle(Oracle&&) noexcept = default;
Oracle& Oracle::operator=(Oracle&&) noexcept = default;

std::size_t Oracle::classes() const { return target_->classes(); }
const models::ImageGeometry& Oracle::geometry() const { return target_->geometry(); }

void Oracle::set_audit_log(std::ostream* log) {
  audit_ = log;
  if (audit_ != nullptr) *audit_ << "query_index,batch_size,mode,budget_used_after\n";
}

OracleReply Oracle::answer(const Tensor& batch, LabelMode mode) const {
  models::require_geometry(batch, target_->geometry(), "oracle query");
  for (double v : batch.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::domain_error("oracle query images must lie in [0, 1]");
  }
  nn::Tape tape = nn::Tape::inference();
  const Tensor probs = nn::softmax(tape, models::predict_logits(*target_, batch));
  OracleReply reply;
  reply.mode = mode;
  reply.labels = nn::argmax_rows(probs);
  reply.targets = mode == LabelMode::Hard ? nn::one_hot(reply.labels, target_->classes()) : probs;
  return reply;
}

OracleReply Oracle::query(const Tensor& batch, LabelMode mode) {
  const std::size_t n = batch.rank() > 0 ? batch.dim(0) : 0;
  if (n > budget_.remaining()) throw BudgetExhausted(budget_.used, budget_.limit, n);
  OracleReply reply = answer(batch, mode);
  budget_.used += n;
  ++query_calls_;
  if (audit_ != nullptr) {
    *audit_ << query_calls_ << ',' << n << ',' << to_string(mode) << ',' << budget_.used << '\n';
  }
  return reply;
}

OracleReply Oracle::evaluation_query(const Tensor& batch, LabelMode mode) {
  OracleReply reply = answer(batch, mode);
  evaluation_used_ += reply.size();
  return reply;
}

}  // namespace dfx::oracle
