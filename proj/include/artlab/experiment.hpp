#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "artlab/art.hpp"
#include "artlab/dataset.hpp"
#include "artlab/stats.hpp"
#include "artlab/trainer.hpp"

namespace artlab {

// Every method the runner knows, in report order.
const std::vector<std::string>& method_registry();
bool is_known_method(const std::string& name);

// The twenty evaluation seeds used by default.
const std::vector<std::uint64_t>& default_seeds();

// Hyperparameters of the individual methods.
struct MethodParams {
    std::size_t smote_k = 5;
    std::size_t msmote_k = 5;
    int nearmiss_version = 1;  // 1, 2, 3, or 0 to pick the best on validation macro-F1
    std::size_t nearmiss_v3_candidates = 3;
    std::string oversample_target = "majority";   // ros / smote / msmote: "majority" or "minority"
    std::string undersample_target = "minority";  // rus / nearmiss
    double focal_gamma = 2.0;
    double ohem_fraction = 0.7;
    double ldam_max_margin = 0.5;
    int drw_start_epoch = 0;  // 0: half of the epoch budget
    double art_blending_constant = 0.5;
    int art_boost_frequency = 1;
};

struct AblationSpec {
    std::string variable;        // blending_constant | boost_frequency | model_width | imbalance_ratio
    std::vector<double> values;  // swept values; empty selects the defaults
    std::vector<double> series;  // bf values for the c sweep, c values for the bf sweep
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::filesystem::path dataset_path;
    std::string label_column;
    std::vector<std::string> methods = method_registry();
    std::vector<std::uint64_t> seeds = default_seeds();
    SplitFractions split;
    TrainerConfig trainer;
    std::map<std::string, TrainerConfig> method_trainers;  // per-method replacements for `trainer`
    MethodParams params;
    std::optional<double> imbalance_ratio;  // applied to the full dataset before splitting
    std::optional<AblationSpec> ablation;
    unsigned threads = 1;
    bool keep_histories = true;

    const TrainerConfig& trainer_for(const std::string& method) const;
};

// Applies "dotted.key=value" overrides to config JSON text and returns the result.
std::string apply_config_overrides(const std::string& json_text, const std::vector<std::string>& overrides);

// Parses the JSON text of a config file. Relative dataset paths resolve
// against `base_dir`. Overrides are "dotted.key=value" strings applied to the
// JSON before parsing; values are read as JSON when possible, else as strings.
ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

struct CellResult {
    std::string method;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double macro_f1 = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double accuracy = 0.0;
    double val_macro_f1 = 0.0;  // of the returned model, used for tuning
    int epochs_trained = 0;
    int best_epoch = 0;
    std::vector<EpochRecord> history;
    std::vector<BoostRecord> boosts;  // ART only
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;
};

struct MethodSummary {
    std::string method;
    std::size_t n_ok = 0;
    MetricSummary macro_f1, macro_precision, macro_recall, accuracy;
    double average_rank = 0.0;
    std::optional<SignificanceResult> t_test;    // ART vs this method
    std::optional<SignificanceResult> wilcoxon;  // ART vs this method
};

struct RunReport {
    std::string dataset;
    std::vector<std::string> class_names;
    std::vector<std::string> methods;
    std::vector<std::uint64_t> seeds;
    std::vector<CellResult> cells;  // method-major: cells[m * seeds.size() + s]
    std::vector<MethodSummary> summaries;

    const CellResult& cell(std::size_t method, std::size_t seed) const { return cells[method * seeds.size() + seed]; }
    const MethodSummary* summary(const std::string& method) const;
};

// Split, normalised data for one seed.
struct PreparedData {
    SplitBundle split;
    std::vector<std::string> class_names;
};

PreparedData prepare_data(const Dataset& full, const ExperimentConfig& config, std::uint64_t seed);

// Trains and tests one method on one seed. Failures are recorded in the result.
CellResult run_cell(const PreparedData& data, const std::string& method, std::uint64_t seed,
                    const ExperimentConfig& config);

RunReport run_experiment(const ExperimentConfig& config);
RunReport run_experiment(const ExperimentConfig& config, const Dataset& full);

// Recomputes aggregates, ranks and significance from report.cells.
void summarize(RunReport& report);

struct AblationPoint {
    std::string series;  // e.g. "bf=4", "c=0.5" or empty
    double value = 0.0;
    RunReport report;
};

std::vector<AblationPoint> run_ablation(const ExperimentConfig& config);
std::vector<AblationPoint> run_ablation(const ExperimentConfig& config, const Dataset& full);

}  // namespace artlab
