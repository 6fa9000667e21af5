#include "advbench/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace advbench {

namespace {

constexpr const char* kColumns =
    "attack,defense,attack_success_rate,defense_success_rate,"
    "mean_perturbation_adv,mean_perturbation_defended,psnr_defended_db";

std::string format_rate(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

std::string opt_cell(const std::optional<double>& value, bool rate) {
  if (!value) return "na";
  if (rate) return format_rate(*value);
  return format_double(*value);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, const char* what) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error(std::string("report: bad numeric cell for ") + what +
                             ": \"" + cell + "\"");
  return value;
}

std::optional<double> parse_opt_cell(const std::string& cell, const char* what) {
  if (cell == "na") return std::nullopt;
  return parse_cell(cell, what);
}

}  // namespace

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

std::string render_csv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# toolkit: " << report.header.toolkit_version << "\n";
  out << "# seed: " << report.header.seed << "\n";
  out << "# model: " << report.header.model_fingerprint << "\n";
  out << kColumns << "\n";
  for (const MetricRow& row : report.rows) {
    out << row.attack << ',' << row.defense << ','
        << format_rate(row.attack_success_rate) << ','
        << opt_cell(row.defense_success_rate, true) << ','
        << format_double(row.mean_perturbation_adv) << ','
        << opt_cell(row.mean_perturbation_defended, false) << ','
        << opt_cell(row.psnr_defended_db, false) << "\n";
  }
  return out.str();
}

std::string render_markdown(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# Robustness benchmark report\n\n";
  out << "- toolkit: " << report.header.toolkit_version << "\n";
  out << "- seed: " << report.header.seed << "\n";
  out << "- model: `" << report.header.model_fingerprint << "`\n\n";

  out << "## Attack efficacy\n\n";
  out << "| attack | success rate | mean perturbation |\n";
  out << "| --- | --- | --- |\n";
  for (const AttackAggregate& agg : report.attack_summary)
    out << "| " << agg.attack << " | " << format_rate(agg.attack_success_rate)
        << " | " << format_double(agg.mean_perturbation) << " |\n";

  out << "\n## Attack x defense grid\n\n";
  out << "| attack | defense | attack success | defense success | mean pert "
         "(adv) | mean pert (defended) | PSNR defended (dB) |\n";
  out << "| --- | --- | --- | --- | --- | --- | --- |\n";
  for (const MetricRow& row : report.rows) {
    out << "| " << row.attack << " | " << row.defense << " | "
        << format_rate(row.attack_success_rate) << " | "
        << opt_cell(row.defense_success_rate, true) << " | "
        << format_double(row.mean_perturbation_adv) << " | "
        << opt_cell(row.mean_perturbation_defended, false) << " | "
        << opt_cell(row.psnr_defended_db, false) << " |\n";
  }
  return out.str();
}

EvaluationReport parse_csv(const std::string& text) {
  EvaluationReport report;
  std::istringstream in(text);
  std::string line;
  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# toolkit: ", 0) == 0) {
      report.header.toolkit_version = line.substr(11);
      continue;
    }
    if (line.rfind("# seed: ", 0) == 0) {
      report.header.seed = std::stoull(line.substr(8));
      continue;
    }
    if (line.rfind("# model: ", 0) == 0) {
      report.header.model_fingerprint = line.substr(9);
      continue;
    }
    if (line[0] == '#') continue;
    if (!saw_columns) {
      if (line != kColumns)
        throw std::runtime_error("report: unexpected column header: " + line);
      saw_columns = true;
      continue;
    }
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 7)
      throw std::runtime_error("report: expected 7 cells, got " +
                               std::to_string(cells.size()));
    MetricRow row;
    row.attack = cells[0];
    row.defense = cells[1];
    row.attack_success_rate = parse_cell(cells[2], "attack_success_rate");
    row.defense_success_rate = parse_opt_cell(cells[3], "defense_success_rate");
    row.mean_perturbation_adv = parse_cell(cells[4], "mean_perturbation_adv");
    row.mean_perturbation_defended =
        parse_opt_cell(cells[5], "mean_perturbation_defended");
    row.psnr_defended_db = parse_opt_cell(cells[6], "psnr_defended_db");
    report.rows.push_back(std::move(row));
  }
  if (!saw_columns) throw std::runtime_error("report: no column header found");
  for (const MetricRow& row : report.rows)
    if (row.defense == "none")
      report.attack_summary.push_back(AttackAggregate{
          row.attack, row.attack_success_rate, row.mean_perturbation_adv});
  return report;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace advbench
