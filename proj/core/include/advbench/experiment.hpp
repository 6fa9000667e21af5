#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "advbench/attacks.hpp"
#include "advbench/datagen.hpp"
#include "advbench/defenses.hpp"
#include "advbench/net.hpp"

namespace advbench {

// Raised for invalid experiment configurations; the message names the
// offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetSource {
  std::optional<std::size_t> generate_n;  // synthesize generate(seed, n)
  std::optional<std::string> load_images;
  std::optional<std::string> load_labels;
};

struct ModelSource {
  std::optional<TrainConfig> train;  // train the reference architecture
  std::optional<std::string> load_path;
};

struct AttackEntry {
  std::string name;  // family string, used in report rows
  AttackSpec spec;
};

struct DefenseEntry {
  std::string name;
  DefenseSpec spec;
};

enum class ReportFormat { Csv, Md };

// Declarative description of a benchmark run. Parsed from a JSON document
// with exactly these keys; unknown keys are hard errors so a config never
// silently falls back to defaults.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  DatasetSource dataset;
  ModelSource model;
  std::vector<AttackEntry> attacks;
  std::vector<DefenseEntry> defenses;
  std::optional<double> distill_temperature;
  std::string output_dir = "out";
  std::vector<ReportFormat> report_formats{ReportFormat::Csv, ReportFormat::Md};
  bool dump_adversarials = false;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

// One report row per (attack, defense) pair; defense "none" rows carry the
// attack-only metrics and leave the defense columns unset ("na" in CSV).
struct MetricRow {
  std::string attack;
  std::string defense;  // "none", a preprocessing family, or "distill"
  double attack_success_rate = 0.0;
  std::optional<double> defense_success_rate;
  double mean_perturbation_adv = 0.0;
  std::optional<double> mean_perturbation_defended;
  std::optional<double> psnr_defended_db;  // may be +infinity
};

struct ReportHeader {
  std::string toolkit_version;
  std::uint64_t seed = 0;
  std::string model_fingerprint;
};

struct AttackAggregate {
  std::string attack;
  double attack_success_rate = 0.0;
  double mean_perturbation = 0.0;
};

struct EvaluationReport {
  ReportHeader header;
  std::vector<MetricRow> rows;
  std::vector<AttackAggregate> attack_summary;
};

// Per-attack evaluation artifacts kept in memory so callers (and the
// acceptance suite) can inspect outcomes beyond the aggregated rows.
struct AttackEvaluation {
  std::string name;
  std::vector<AttackOutcome> outcomes;  // one per test image
  std::vector<Tensor> adv_images;       // f32-quantized adversarials
  std::vector<int> adv_preds;
  double elapsed_seconds = 0.0;
};

struct ExperimentResult {
  Dataset dataset;
  Model model;
  std::optional<Model> student;
  std::vector<int> clean_preds;  // over the test split
  std::vector<AttackEvaluation> attacks;
  EvaluationReport report;
};

// Full pipeline: obtain dataset and model, run every attack over the test
// split, apply every defense to the (32-bit quantized) adversarials,
// evaluate the distilled student on the same adversarials when configured,
// and assemble the report. Deterministic: all randomness forks from
// cfg.seed. When cfg.dump_adversarials is set, writes the dataset, model(s)
// and every adversarial tensor under cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes the configured report files (report.csv / report.md) under
// cfg.output_dir and returns their paths.
std::vector<std::string> write_reports(const ExperimentConfig& cfg,
                                       const EvaluationReport& report);

// Recomputes every metric row from the artifacts dumped by a previous run
// and compares against the stored report.csv byte for byte.
struct VerifyResult {
  bool ok = false;
  std::string message;
};
VerifyResult verify_dumped_run(const ExperimentConfig& cfg);

// Fraction of images whose prediction matches the dataset label.
double accuracy(const Model& model, const Dataset& ds);

// Named RNG streams forked from the experiment seed (documented so external
// tooling can reproduce any stage in isolation).
namespace rng_streams {
inline constexpr std::uint64_t kModelInit = 1;
inline constexpr std::uint64_t kDistill = 2;
inline constexpr std::uint64_t kAttackBase = 16;  // + attack index, then fork(image index)
}  // namespace rng_streams

}  // namespace advbench
