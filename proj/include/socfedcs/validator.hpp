#pragma once

#include <optional>
#include <span>

#include "socfedcs/network_model.hpp"
#include "socfedcs/scheduler.hpp"

namespace socfedcs {

struct ValidationRules {
    std::optional<int> max_selected; // |alpha| <= L; FedCS has no cap
    bool first_order_only = false;   // baselines never select SCs
    double t_max_cmp = 0.1;
    std::optional<double> min_snr_db;
    double bandwidth = 0.2e6;
    double noise_density = thermal_noise_density();
};

/// Re-checks a decision from the raw inputs without going through the
/// selector code paths: one client per FC, one FC per client, the size cap,
/// two-hop trust membership, availability, coverage, the straggler bound, outage and
/// finite non-negative costs. Throws InvariantViolation naming the rule.
void validate_decision(const SelectionDecision& decision, std::span<const ClientProfile> population,
                       const TrustGraph& trust, const NetworkSnapshot& snapshot, const ValidationRules& rules);

} // namespace socfedcs
