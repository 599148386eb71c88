#include "dfx/harness/report.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace dfx::harness {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

json to_json(const ExtractionReport& r) {
  json j;
  j["budget_limit"] = r.budget_limit;
  j["budget_used"] = r.budget_used;
  j["evaluation_queries"] = r.evaluation_queries;
  j["initial_agreement"] = r.initial_agreement;
  j["config"] = r.config_ini;
  json rounds = json::array();
  for (const RoundRecord& x : r.rounds) {
    rounds.push_back({{"round", x.round},     {"queries_used", x.queries_used}, {"l_g", x.l_g},
                      {"l_intra", x.l_intra}, {"l_inter", x.l_inter},           {"l_train", x.l_train},
                      {"agreement", x.agreement}, {"bv", x.bv}});
  }
  j["rounds"] = rounds;
  json cells = json::array();
  for (const AttackCell& c : r.attacks) {
    cells.push_back({{"attack", c.attack},
                     {"scenario", c.scenario},
                     {"label_mode", c.label_mode},
                     {"asr", c.asr},
                     {"evaluated", c.evaluated},
                     {"fooled", c.fooled}});
  }
  j["attacks"] = cells;
  if (r.diversity) {
    const DiversityReport& d = *r.diversity;
    j["diversity"] = {{"examples", d.examples},
                      {"bv_plain", d.bv_plain},
                      {"bv_mixup", d.bv_mixup},
                      {"generator_checksum", d.generator_checksum},
                      {"substitute_checksum", d.substitute_checksum},
                      {"histogram", d.stats.histogram},
                      {"shares", d.stats.shares},
                      {"min_share", d.stats.min_share},
                      {"max_share", d.stats.max_share},
                      {"histogram_entropy", d.stats.histogram_entropy},
                      {"mean_pairwise_similarity", d.stats.mean_pairwise_similarity},
                      {"similarity_rows", d.stats.similarity_rows},
                      {"subsample_seed", d.stats.subsample_seed}};
  }
  return j;
}

}  // namespace

void write_rounds_csv(const ExtractionReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "round,queries_used,l_g,l_intra,l_inter,l_train,agreement,bv\n";
  for (const RoundRecord& r : report.rounds) {
    out << r.round << ',' << r.queries_used << ',' << num(r.l_g) << ',' << num(r.l_intra) << ',' << num(r.l_inter)
        << ',' << num(r.l_train) << ',' << num(r.agreement) << ',' << num(r.bv) << '\n';
  }
}

void write_final_csv(const ExtractionReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "attack,scenario,label_mode,asr\n";
  for (const AttackCell& c : report.attacks) {
    out << c.attack << ',' << c.scenario << ',' << c.label_mode << ',' << num(c.asr) << '\n';
  }
}

void write_diversity_csv(const ExtractionReport& report, const std::filesystem::path& path) {
  if (!report.diversity) throw std::logic_error("report has no diversity section");
  auto out = open_out(path);
  out << "class,count,share\n";
  const auto& s = report.diversity->stats;
  for (std::size_t c = 0; c < s.histogram.size(); ++c) {
    out << c << ',' << s.histogram[c] << ',' << num(s.shares[c]) << '\n';
  }
}

void write_report(const ExtractionReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_rounds_csv(report, dir / "rounds.csv");
  write_final_csv(report, dir / "final.csv");
  if (report.diversity) write_diversity_csv(report, dir / "diversity.csv");
  open_out(dir / "summary.json") << to_json(report).dump(2) << '\n';
  open_out(dir / "timing.json") << json{{"extraction_seconds", report.extraction_seconds},
                                        {"evaluation_seconds", report.evaluation_seconds}}
                                       .dump(2)
                                << '\n';
  open_out(dir / "config.ini") << report.config_ini;
}

ExtractionReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw std::runtime_error("no summary.json in " + dir.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error((dir / "summary.json").string() + ": " + e.what());
  }
  ExtractionReport r;
  r.budget_limit = j.at("budget_limit");
  r.budget_used = j.at("budget_used");
  r.evaluation_queries = j.at("evaluation_queries");
  r.initial_agreement = j.at("initial_agreement");
  r.config_ini = j.at("config");
  for (const json& x : j.at("rounds")) {
    r.rounds.push_back({x.at("round"), x.at("queries_used"), x.at("l_g"), x.at("l_intra"), x.at("l_inter"),
                        x.at("l_train"), x.at("agreement"), x.at("bv")});
  }
  for (const json& c : j.at("attacks")) {
    r.attacks.push_back({c.at("attack"), c.at("scenario"), c.at("label_mode"), c.at("asr"), c.at("evaluated"),
                         c.at("fooled")});
  }
  if (j.contains("diversity")) {
    const json& d = j["diversity"];
    DiversityReport div;
    div.examples = d.at("examples");
    div.bv_plain = d.at("bv_plain");
    div.bv_mixup = d.at("bv_mixup");
    div.generator_checksum = d.at("generator_checksum");
    div.substitute_checksum = d.at("substitute_checksum");
    div.stats.histogram = d.at("histogram").get<std::vector<std::size_t>>();
    div.stats.shares = d.at("shares").get<std::vector<double>>();
    div.stats.min_share = d.at("min_share");
    div.stats.max_share = d.at("max_share");
    div.stats.histogram_entropy = d.at("histogram_entropy");
    div.stats.mean_pairwise_similarity = d.at("mean_pairwise_similarity");
    div.stats.similarity_rows = d.at("similarity_rows");
    div.stats.subsample_seed = d.at("subsample_seed");
    r.diversity = div;
  }
  std::ifstream timing(dir / "timing.json");
  if (timing) {
    const json t = json::parse(timing);
    r.extraction_seconds = t.value("extraction_seconds", 0.0);
    r.evaluation_seconds = t.value("evaluation_seconds", 0.0);
  }
  return r;
}

std::string render_text(const ExtractionReport& r) {
  std::string s;
  s += fmt::format("queries used      {} / {}\n", r.budget_used, r.budget_limit);
  s += fmt::format("evaluation meter  {}\n", r.evaluation_queries);
  s += fmt::format("rounds            {}\n", r.rounds.size());
  if (!r.rounds.empty()) {
    const RoundRecord& last = r.rounds.back();
    s += fmt::format("agreement         {:.4f} -> {:.4f}\n", r.rounds.front().agreement, last.agreement);
    s += fmt::format("final losses      L_G {:.4f}  L_intra {:.4f}  L_inter {:.4f}  L_train {:.6f}\n", last.l_g,
                     last.l_intra, last.l_inter, last.l_train);
  }
  s += fmt::format("wall clock        extraction {:.1f}s, evaluation {:.1f}s\n", r.extraction_seconds,
                   r.evaluation_seconds);
  if (!r.attacks.empty()) {
    s += "\nattack  scenario    labels  ASR      fooled/evaluated\n";
    for (const AttackCell& c : r.attacks) {
      s += fmt::format("{:<7} {:<11} {:<7} {:<8.4f} {}/{}\n", c.attack, c.scenario, c.label_mode, c.asr, c.fooled,
                       c.evaluated);
    }
  }
  if (r.diversity) {
    const DiversityReport& d = *r.diversity;
    s += fmt::format("\ndiversity over {} generated examples (generator {:016x}, substitute {:016x})\n", d.examples,
                     d.generator_checksum, d.substitute_checksum);
    s += fmt::format("  BV plain {:.2f}, BV with mixup {:.2f}\n", d.bv_plain, d.bv_mixup);
    s += fmt::format("  class shares min {:.4f} max {:.4f}, entropy {:.4f} nats\n", d.stats.min_share,
                     d.stats.max_share, d.stats.histogram_entropy);
    s += fmt::format("  mean pairwise latent cosine {:.4f} over {} rows\n", d.stats.mean_pairwise_similarity,
                     d.stats.similarity_rows);
    s += "  class  count  share\n";
    for (std::size_t c = 0; c < d.stats.histogram.size(); ++c) {
      s += fmt::format("  {:>5}  {:>5}  {:.4f}\n", c, d.stats.histogram[c], d.stats.shares[c]);
    }
  }
  return s;
}

}  // namespace dfx::harness
