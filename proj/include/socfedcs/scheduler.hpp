#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "socfedcs/cost_model.hpp"
#include "socfedcs/network_model.hpp"
#include "socfedcs/sghs.hpp"

namespace socfedcs {

/// Per-FC backlog z_m >= 0 against the participation target.
struct VirtualQueues {
    std::vector<double> z;

    VirtualQueues() = default;
    explicit VirtualQueues(int num_fc) : z(static_cast<std::size_t>(num_fc), 0.0) {}

    /// L(Theta) = 1/2 sum z_m^2.
    double lyapunov() const;
    double l1() const;
    int size() const { return static_cast<int>(z.size()); }
};

/// alpha_{m,i} = 1: FC m's branch is served by client i.
struct Assignment {
    int fc = 0;
    int client = 0;

    bool operator==(const Assignment&) const = default;
};

struct SelectionDecision {
    std::vector<Assignment> alpha;
    std::vector<CostBreakdown> costs; // parallel to alpha
    double theta = 0.5;
    double objective_value = 0.0;
    int conflicts = 0;
    int alternations = 0;

    /// max G over the selection, 0 when empty.
    double max_cost() const;
    /// Number of selections charged to each FC (0 or 1 for valid decisions).
    std::vector<int> per_fc_counts(int num_fc) const;
};

/// Read-only view of one round: who is eligible and what they cost.
/// Holds references; the referenced objects must outlive it.
class RoundContext {
public:
    RoundContext(std::span<const ClientProfile> population, const TrustGraph& trust,
                 const NetworkSnapshot& snapshot, const CostParams& params);

    /// Available, in coverage and straggler-feasible.
    bool eligible(int client) const { return inputs_[static_cast<std::size_t>(client)].has_value(); }
    bool in_candidate_set(int fc, int client) const;

    /// G_{m,i}(theta). Requires eligible(client).
    double cost(int fc, int client, double theta) const;
    CostBreakdown breakdown(int fc, int client, double theta) const;

    std::span<const ClientProfile> population() const { return population_; }
    const TrustGraph& trust() const { return *trust_; }
    const NetworkSnapshot& snapshot() const { return *snapshot_; }
    const CostParams& params() const { return *params_; }
    int num_fc() const { return trust_->num_fc(); }

private:
    std::span<const ClientProfile> population_;
    const TrustGraph* trust_;
    const NetworkSnapshot* snapshot_;
    const CostParams* params_;
    std::vector<std::optional<ClientRoundInputs>> inputs_;
};

/// Per-candidate drift-plus-penalty score V G_{m,i}(theta) - z_m; lower is
/// better. Empty when i is outside N_m-bar or not eligible.
std::optional<double> score(const RoundContext& ctx, int fc, int client, double theta,
                            const VirtualQueues& queues);

struct Recommendation {
    int fc = 0;
    int client = 0;
    double cost = 0.0;  // G at the round's theta
    double score = 0.0; // V G - z_m
};

/// FC m's lowest-score eligible candidate, ties to the lowest client id.
std::optional<Recommendation> fc_recommend(const RoundContext& ctx, int fc, double theta,
                                           const VirtualQueues& queues);

struct ServerChoice {
    std::vector<Recommendation> accepted;
    /// Recommendations dropped because another FC won the same client.
    int conflicts = 0;
};

/// Server stage. Duplicate clients keep the lowest-score pair (the losing FC
/// idles). Over the surviving recommendations, the subset of size <= L that
/// minimises max V G - sum z_m is chosen exactly by scanning every candidate
/// as the cost threshold; below the threshold, the largest backlogs are taken
/// first and remaining slots are filled in cost order.
ServerChoice server_select(std::span<const Recommendation> recommendations, int L, const VirtualQueues& queues,
                           double V);

/// z_m <- max(0, z_m + Delta 1[m unselected] - #selections of m).
VirtualQueues update_queues(const VirtualQueues& queues, std::span<const Assignment> alpha, double delta);

/// max over selected of V G plus sum_m z_m (Delta - sum_i alpha_{m,i}); 0 for
/// the max term of an empty selection.
double round_objective(std::span<const Assignment> alpha, std::span<const double> costs,
                       const VirtualQueues& queues, double delta, double V);
double round_objective(const SelectionDecision& decision, const VirtualQueues& queues, double delta, double V);

/// Gamma = M (1 + Delta^2) / 2.
double drift_bound_gamma(int num_fc, double delta);

/// Two-stage selection at a fixed theta, with costs and objective filled in.
SelectionDecision select_at_theta(const RoundContext& ctx, double theta, const VirtualQueues& queues);

struct SchedulerParams {
    double theta_init = 0.5;
    int max_alternations = 10;
    double tolerance = 1e-6;
    Bounds theta_bounds{kThetaMin, kThetaMax};
};

/// Alternates selection at fixed theta with an SGHS search over theta at
/// fixed alpha until the objective improves by less than the tolerance or the
/// alternation budget is spent. Returns the best pair seen.
SelectionDecision alternating_optimize(const RoundContext& ctx, const VirtualQueues& queues,
                                       const SchedulerParams& params, const SghsParams& sghs, Rng& rng);

inline constexpr std::uint64_t kBruteForceCap = 1'000'000;

/// Exact minimiser of the round objective over all per-FC choices (none or
/// one member of N_m-bar), subject to distinct clients, eligibility and
/// |alpha| <= L. Throws InstanceTooLarge when (K + 1)^M exceeds the cap.
SelectionDecision brute_force_select(const RoundContext& ctx, const VirtualQueues& queues, double theta,
                                     std::uint64_t cap = kBruteForceCap);

} // namespace socfedcs
