#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "socfedcs/baselines.hpp"
#include "socfedcs/config.hpp"
#include "socfedcs/fl_training.hpp"
#include "socfedcs/network_model.hpp"
#include "socfedcs/scheduler.hpp"

namespace socfedcs {

struct RoundRecord {
    int round = 0;
    std::string selector;
    double max_cost = 0.0;
    double time_avg_cost = 0.0; // running mean of max_cost
    std::vector<Assignment> alpha;
    double theta = 0.0;
    double objective = 0.0;
    double queue_l1 = 0.0;
    int conflicts = 0;
    std::vector<double> queues;     // after the update
    std::vector<int> participation; // cumulative selections per FC
    double min_participation_rate = 0.0;
    std::optional<double> test_accuracy;
    /// L(z') - L(z) minus (Gamma + sum z (Delta - a)); must be <= 0.
    double drift_excess = 0.0;
};

struct RunSummary {
    std::string selector;
    std::uint64_t seed = 0;
    int rounds = 0;
    std::optional<double> time_avg_cost;
    std::optional<double> final_accuracy;
    std::optional<double> min_participation_rate;
    std::optional<double> max_queue_ratio; // max_m z_m / R
    int drift_violations = 0;
    int total_conflicts = 0;
    double mean_selected = 0.0;
};

/// One selector on one seed. The environment (population, trust, mobility,
/// channel, data) depends only on the seed, so runs with different
/// selectors see identical rounds.
class Simulation {
public:
    Simulation(const ExperimentConfig& config, SelectorKind selector, std::uint64_t seed);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Advances one round. Throws InvariantViolation if a check fails and
    /// config.check_invariants is set.
    RoundRecord step();

    RunSummary summary() const;

    int round() const { return round_; }
    const VirtualQueues& queues() const { return queues_; }
    std::span<const ClientProfile> population() const { return population_; }
    const TrustGraph& trust() const { return trust_; }
    const NetworkSnapshot& snapshot() const { return snapshot_; }
    const GlobalModel* model() const;

private:
    struct Training;

    SelectionDecision select(const RoundContext& ctx);
    std::optional<double> train(const SelectionDecision& decision, bool evaluate_now);

    ExperimentConfig config_;
    SelectorKind selector_;
    std::uint64_t seed_;
    int round_ = 0;

    std::vector<ClientProfile> population_;
    TrustGraph trust_;
    std::vector<MobilityState> mobility_;
    NetworkSnapshot snapshot_;
    VirtualQueues queues_;
    std::vector<int> participation_;
    OortState oort_;
    std::unique_ptr<Training> training_;

    double cost_sum_ = 0.0;
    int drift_violations_ = 0;
    int total_conflicts_ = 0;
    long total_selected_ = 0;
    std::optional<double> last_accuracy_;
};

/// Runs config.rounds rounds and returns every record.
std::vector<RoundRecord> run_simulation(const ExperimentConfig& config, SelectorKind selector, std::uint64_t seed,
                                        RunSummary* summary = nullptr);

} // namespace socfedcs
