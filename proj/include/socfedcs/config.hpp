#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "socfedcs/baselines.hpp"
#include "socfedcs/cost_model.hpp"
#include "socfedcs/fl_training.hpp"
#include "socfedcs/network_model.hpp"
#include "socfedcs/scheduler.hpp"
#include "socfedcs/sghs.hpp"

namespace socfedcs {

struct TrainingConfig {
    bool enabled = false;
    std::string dataset = "synthetic"; // "synthetic" or "idx"
    int classes = 10;
    int dim = 20;
    double separation = 4.0;
    int test_samples = 2000;
    std::string idx_train_images;
    std::string idx_train_labels;
    std::string idx_test_images;
    std::string idx_test_labels;
    int scenario = 1;
    double heterogeneity = 0.3;
    NoiseConfig noise;
    TrainParams params;
    int eval_every = 10;
};

struct ExperimentConfig {
    PopulationConfig population;
    double trust_edge_prob = 0.7;
    bool resample_trust_each_round = false;
    std::optional<std::string> topology_path;
    MobilityConfig mobility;
    SnapshotConfig snapshot;
    CostParams cost;
    SchedulerParams scheduler;
    SghsParams sghs;
    BaselineParams baselines;
    TrainingConfig training;
    int rounds = 2000;
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::string> selectors{"socfedcs"};
    std::string out_dir = "out";
    bool check_invariants = true;

    int num_clients() const { return population.num_fc + population.num_sc; }
};

/// Full document with every key at its default; doubles as the schema.
nlohmann::json default_config_json();

nlohmann::json config_to_json(const ExperimentConfig& config);

/// Builds a config from a document that may omit keys. Unknown keys, wrong
/// types and out-of-range values throw ConfigError. When `source_text` is
/// given, messages carry the line where the offending key appears.
ExperimentConfig config_from_json(const nlohmann::json& doc, std::string_view source_text = {});

/// Parses JSON text; syntax errors report line and column.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Applies "section.key=value" to a document. The value is parsed as JSON
/// when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Cross-field checks run after parsing (pools, bounds, selector names).
void validate(const ExperimentConfig& config);

} // namespace socfedcs
