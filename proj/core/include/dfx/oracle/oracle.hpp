#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfx/models/layers.hpp"

namespace dfx::models {
class TargetNet;
struct TargetConfig;
}  // namespace dfx::models

namespace dfx::oracle {

using nn::Tensor;

enum class LabelMode { Hard, Soft };

std::string to_string(LabelMode mode);
LabelMode parse_label_mode(const std::string& name);

struct QueryBudget {
  std::size_t limit = 0;
  std::size_t used = 0;

  std::size_t remaining() const { return limit - used; }
};

class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(std::size_t used, std::size_t limit, std::size_t requested);

  std::size_t used() const { return used_; }
  std::size_t limit() const { return limit_; }
  std::size_t requested() const { return requested_; }

 private:
  std::size_t used_, limit_, requested_;
};

/// Per-example answers from the target.
///   Hard: labels holds the class index, targets the matching one-hot rows.
///   Soft: targets holds probability rows; labels holds their argmax.
struct OracleReply {
  LabelMode mode = LabelMode::Hard;
  std::vector<int> labels;
  Tensor targets;

  std::size_t size() const { return labels.size(); }
};

/// Black-box access to a trained target. Extraction queries are charged to a
/// budget that can never be exceeded; evaluation queries (measuring attack
/// success after extraction) go to a separate, unbounded meter. Only labels or
/// probabilities leave this class, never parameters or gradients.
class Oracle {
 public:
  Oracle(std::unique_ptr<models::TargetNet> target, std::size_t budget_limit);
  static Oracle from_checkpoint(const std::filesystem::path& checkpoint, const models::TargetConfig& config,
                                std::size_t budget_limit);
  ~Oracle();
  Oracle(Oracle&&) noexcept;
  Oracle& operator=(Oracle&&) noexcept;

  /// Throws BudgetExhausted, without charging anything, if the batch does not fit.
  OracleReply query(const Tensor& batch, LabelMode mode);
  OracleReply evaluation_query(const Tensor& batch, LabelMode mode);

  const QueryBudget& budget() const { return budget_; }
  std::size_t evaluation_queries() const { return evaluation_used_; }
  std::size_t classes() const;
  const models::ImageGeometry& geometry() const;

  /// Appends `query_index,batch_size,mode,budget_used_after` rows for every
  /// extraction query. The stream must outlive the oracle or be reset to null.
  void set_audit_log(std::ostream* log);

 private:
  OracleReply answer(const Tensor& batch, LabelMode mode) const;

  std::unique_ptr<models::TargetNet> target_;
  QueryBudget budget_;
  std::size_t evaluation_used_ = 0;
  std::size_t query_calls_ = 0;
  std::ostream* audit_ = nullptr;
};

}  // namespace dfx::oracle
