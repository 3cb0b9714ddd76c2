#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "socfedcs/fl_training.hpp"
#include "socfedcs/scheduler.hpp"

namespace socfedcs {

enum class SelectorKind { socfedcs, random, greedy, powcs, fedcs, oort };

std::string_view selector_name(SelectorKind kind);
/// Throws ConfigError for unknown names.
SelectorKind parse_selector(std::string_view name);

/// Baseline knobs. All baselines pick FCs only and run at a fixed theta.
struct BaselineParams {
    double theta = 0.5;
    /// PowCS |M_0|; unset means M / 2.
    std::optional<int> candidate_set_size;
    double deadline_s = 2.0;
    double exploit_fraction = 0.8;
    double preferred_round_time = 1.0; // Oort T_pref, seconds
};

void validate(const BaselineParams& params, int num_fc, int L);

/// FCs that could be selected this round, ascending id.
std::vector<int> eligible_fcs(const RoundContext& ctx);

/// Uniform sample without replacement of min(L, #eligible) FCs.
SelectionDecision select_random(const RoundContext& ctx, int L, double theta, Rng& rng);

/// The L eligible FCs with the lowest G_{m,m}; ties to the lowest id.
SelectionDecision select_greedy(const RoundContext& ctx, int L, double theta);

/// What PowCS needs from the training loop.
struct TrainingView {
    const GlobalModel* model = nullptr;
    const Dataset* dataset = nullptr;
    std::span<const ClientShard> shards;
};

/// Samples candidate_set_size eligible FCs uniformly, then keeps the L with the
/// highest squared-error local loss (ties to the lowest id). Throws ConfigError
/// without a training backend.
SelectionDecision select_powcs(const RoundContext& ctx, int L, int candidate_set_size,
                               const std::optional<TrainingView>& training, double theta, Rng& rng);

/// Adds eligible FCs in ascending round time while the parallel-upload
/// schedule max(T) stays within the deadline. No L cap.
SelectionDecision select_fedcs(const RoundContext& ctx, double deadline_s, double theta);

/// Running Oort statistics; an FC is explored once it has a value.
struct OortState {
    std::vector<std::optional<double>> statistical_utility;

    explicit OortState(int num_fc = 0) : statistical_utility(static_cast<std::size_t>(num_fc)) {}
    void record(int fc, double utility) { statistical_utility[static_cast<std::size_t>(fc)] = utility; }
};

/// |shard| sqrt(mean squared per-sample loss).
double oort_statistical_utility(std::span<const double> sample_losses);

/// stat (T_pref / T)^1[T > T_pref].
double oort_utility(double statistical, double round_time, double preferred_round_time);

/// Exploits the top ceil(f L) explored FCs by utility, explores the remainder
/// uniformly among unexplored ones and tops up from explored FCs if short.
SelectionDecision select_oort(const RoundContext& ctx, int L, const OortState& state, double exploit_fraction,
                              double preferred_round_time, double theta, Rng& rng);

} // namespace socfedcs
