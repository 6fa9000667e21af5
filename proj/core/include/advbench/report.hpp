#pragma once

#include <string>

#include "advbench/experiment.hpp"

namespace advbench {

// CSV layout:
//   # toolkit: <version>
//   # seed: <seed>
//   # model: <fingerprint>
//   attack,defense,attack_success_rate,defense_success_rate,
//   mean_perturbation_adv,mean_perturbation_defended,psnr_defended_db
// Rates use 4 decimal places; other numbers use shortest round-trip
// formatting; +infinity serializes as "inf"; unset defense columns as "na".
std::string render_csv(const EvaluationReport& report);

// Same grid as a markdown table, plus the per-attack summary table.
std::string render_markdown(const EvaluationReport& report);

// Parses a document produced by render_csv back into a report (the
// attack_summary section is recomputed from the rows).
EvaluationReport parse_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Shortest round-trip decimal form of a double ("inf" for +infinity).
std::string format_double(double value);

}  // namespace advbench
