#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dfx/metrics/metrics.hpp"

namespace dfx::harness {

struct RoundRecord {
  std::size_t round = 0;
  std::size_t queries_used = 0;
  double l_g = 0.0;
  double l_intra = 0.0;
  double l_inter = 0.0;
  double l_train = 0.0;
  /// Substitute vs target top-1 agreement on the probe images.
  double agreement = 0.0;
  /// Boundary value of the round's query batch under the target.
  double bv = 0.0;
};

struct AttackCell {
  std::string attack;
  std::string scenario;
  std::string label_mode;
  double asr = 0.0;
  std::size_t evaluated = 0;
  std::size_t fooled = 0;
};

struct DiversityReport {
  metrics::DiversityStats stats;
  std::size_t examples = 0;
  double bv_plain = 0.0;
  double bv_mixup = 0.0;
  /// Parameter checksums of the networks that produced these numbers.
  std::uint64_t generator_checksum = 0;
  std::uint64_t substitute_checksum = 0;
};

struct ExtractionReport {
  std::string config_ini;
  std::vector<RoundRecord> rounds;
  std::size_t budget_limit = 0;
  std::size_t budget_used = 0;
  double initial_agreement = 0.0;
  std::vector<AttackCell> attacks;
  std::optional<DiversityReport> diversity;
  std::size_t evaluation_queries = 0;
  double extraction_seconds = 0.0;
  double evaluation_seconds = 0.0;
};

// rounds.csv, final.csv and diversity.csv hold no timing, so identical runs
// give identical files. Timings go to timing.json.
void write_rounds_csv(const ExtractionReport& report, const std::filesystem::path& path);
void write_final_csv(const ExtractionReport& report, const std::filesystem::path& path);
void write_diversity_csv(const ExtractionReport& report, const std::filesystem::path& path);

/// Writes rounds.csv, final.csv, diversity.csv (when present), summary.json,
/// timing.json and config.ini into `dir`, creating it if needed.
void write_report(const ExtractionReport& report, const std::filesystem::path& dir);

/// Reads summary.json and timing.json back from a run directory.
ExtractionReport read_report(const std::filesystem::path& dir);

std::string render_text(const ExtractionReport& report);

}  // namespace dfx::harness
