#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "artlab/experiment.hpp"

namespace artlab {

enum class ReportFormat { csv, markdown, both };

ReportFormat parse_report_format(const std::string& text);

// Human-readable method name used in markdown tables.
std::string display_name(const std::string& method);

// Writes, under `out_dir`:
//   metrics_{macro_f1,accuracy,precision,recall}.{csv,md}   mean +- std per method
//   significance.{csv,md}                                   ART vs each method, both tests
//   runs.csv                                                every (method, seed) cell
//   history/<method>_<seed>.csv                             per-epoch lr and losses
//   boosts/art_<seed>.csv                                   ART distribution updates
void emit_report(const RunReport& report, const std::filesystem::path& out_dir, ReportFormat format);

// Markdown table of mean +- std for one metric ("macro_f1", "accuracy",
// "precision" or "recall").
std::string metric_markdown(const RunReport& report, const std::string& metric);
std::string significance_markdown(const RunReport& report);
std::string runs_csv(const RunReport& report);

// Parses runs.csv content back into cells (histories are not included).
std::vector<CellResult> parse_runs_csv(const std::string& text);

void emit_ablation(const std::vector<AblationPoint>& points, const std::string& variable,
                   const std::filesystem::path& out_dir, ReportFormat format);

}  // namespace artlab
