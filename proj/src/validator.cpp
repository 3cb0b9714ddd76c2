#include "socfedcs/validator.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

void validate_decision(const SelectionDecision& decision, std::span<const ClientProfile> population,
                       const TrustGraph& trust, const NetworkSnapshot& snapshot, const ValidationRules& rules)
{
    auto fail = [&](const std::string& what) {
        throw InvariantViolation(fmt::format("round {}: {}", snapshot.round, what));
    };

    if (decision.costs.size() != decision.alpha.size()) {
        fail("cost breakdowns do not match the selection");
    }
    if (rules.max_selected && static_cast<int>(decision.alpha.size()) > *rules.max_selected) {
        fail(fmt::format("|alpha| = {} exceeds L = {}", decision.alpha.size(), *rules.max_selected));
    }
    if (!(decision.theta > 0.0 && decision.theta < 1.0)) {
        fail(fmt::format("theta {} outside (0,1)", decision.theta));
    }

    const int M = trust.num_fc();
    const int N = static_cast<int>(population.size());
    std::set<int> fcs;
    std::set<int> clients;
    for (std::size_t j = 0; j < decision.alpha.size(); ++j) {
        const auto [m, i] = decision.alpha[j];
        if (m < 0 || m >= M || i < 0 || i >= N) {
            fail(fmt::format("pair ({}, {}) out of range", m, i));
        }
        if (!fcs.insert(m).second) {
            fail(fmt::format("FC {} selects more than one client", m));
        }
        if (!clients.insert(i).second) {
            fail(fmt::format("client {} selected under more than one FC", i));
        }
        if (rules.first_order_only && i != m) {
            fail(fmt::format("tier restriction: baseline selected SC {} under FC {}", i, m));
        }
        if (i != m && (i < M || trust.weight(m, i - M) <= 0.0)) {
            fail(fmt::format("client {} is not in FC {}'s candidate set", i, m));
        }
        const auto idx = static_cast<std::size_t>(i);
        if (!snapshot.in_coverage[idx] || !snapshot.available[idx]) {
            fail(fmt::format("client {} selected while unavailable or out of coverage", i));
        }
        const auto& p = population[idx];
        if (p.num_samples * p.cycles_per_sample / p.cpu_frequency > rules.t_max_cmp) {
            fail(fmt::format("straggler bound: client {} needs {} s per iteration", i,
                             p.num_samples * p.cycles_per_sample / p.cpu_frequency));
        }
        if (rules.min_snr_db) {
            const double snr_db =
                10.0 * std::log10(snapshot.channel_gains[idx] * p.transmit_power / (rules.noise_density * rules.bandwidth));
            if (snr_db < *rules.min_snr_db) {
                fail(fmt::format("client {} selected in outage (SNR {:.2f} dB)", i, snr_db));
            }
        }
        const auto& c = decision.costs[j];
        for (double v : {c.rate, c.t_com, c.e_com, c.t_cmp_iter, c.e_cmp_iter, c.t_round, c.e_round, c.wset, c.total}) {
            if (!std::isfinite(v) || v < 0.0) {
                fail(fmt::format("client {} has a non-finite or negative cost component", i));
            }
        }
        if (c.total < c.wset) {
            fail(fmt::format("client {}: total cost below WSET", i));
        }
    }
}

} // namespace socfedcs
