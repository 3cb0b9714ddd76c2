#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "socfedcs/config.hpp"
#include "socfedcs/simulation.hpp"

namespace socfedcs {

inline constexpr const char* kMetricsSchema = "socfedcs.metrics.v1";

/// Header line (no trailing newline). The first field is the schema tag and
/// every row repeats it.
std::string metrics_header();
std::string metrics_row(const RoundRecord& record);
void write_metrics_csv(std::ostream& out, std::span<const RoundRecord> records);

nlohmann::json summary_to_json(const RunSummary& summary);

/// The output directory: SOCFEDCS_OUT_DIR if set, else the config's out_dir.
std::filesystem::path resolve_out_dir(const ExperimentConfig& config);

/// Runs every (selector, seed) pair, writing metrics_<selector>_<seed>.csv
/// under out_dir and a summary.json listing all runs. Pairs run concurrently.
std::vector<RunSummary> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct ComparisonRow {
    std::string selector;
    int scenario = 1;
    int seeds = 0;
    double cost_mean = 0.0;
    double cost_stddev = 0.0;
    std::optional<double> accuracy_mean;
    std::optional<double> accuracy_stddev;
};

/// Mean and sample standard deviation (0 for a single seed) per selector.
std::vector<ComparisonRow> summarize(std::span<const RunSummary> runs, int scenario,
                                     std::span<const std::string> selectors);

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);
std::string format_comparison_table(std::span<const ComparisonRow> rows);

/// Runs each scenario with the given selectors and writes comparison.csv and
/// comparison.txt. With several scenarios each gets its own scenario_<n>
/// subdirectory for the per-run files.
std::vector<ComparisonRow> compare(const ExperimentConfig& config, std::span<const std::string> selectors,
                                   std::span<const int> scenarios, const std::filesystem::path& out_dir);

} // namespace socfedcs
