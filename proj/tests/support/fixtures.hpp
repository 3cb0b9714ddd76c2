#pragma once

#include <cmath>
#include <vector>

#include "socfedcs/network_model.hpp"
#include "socfedcs/rng.hpp"
#include "socfedcs/scheduler.hpp"

namespace fixtures {

using namespace socfedcs;

/// Hand-built round: every client available and in coverage unless changed.
struct Round {
    std::vector<ClientProfile> population;
    TrustGraph trust;
    NetworkSnapshot snapshot;
    CostParams params;

    Round(int num_fc, int num_sc) : trust(num_fc, num_sc)
    {
        const int n = num_fc + num_sc;
        for (int id = 0; id < n; ++id) {
            ClientProfile p;
            p.id = id;
            p.tier = id < num_fc ? Tier::first_order : Tier::second_order;
            population.push_back(p);
        }
        snapshot.channel_gains.assign(static_cast<std::size_t>(n), 1e-9);
        snapshot.available.assign(static_cast<std::size_t>(n), true);
        snapshot.in_coverage.assign(static_cast<std::size_t>(n), true);
        params.min_snr_db.reset();
    }

    RoundContext context() const { return RoundContext(population, trust, snapshot, params); }
};

/// Random small instance with varied resources and channels. Candidate
/// sets are disjoint when `disjoint` is set (each SC trusted by at most one FC).
inline Round random_round(int num_fc, int num_sc, bool disjoint, Rng& rng)
{
    Round r(num_fc, num_sc);
    for (auto& p : r.population) {
        p.transmit_power = rng.uniform(0.1, 0.5);
        p.cpu_frequency = rng.uniform(5e7, 2e8);
        p.num_samples = static_cast<int>(rng.uniform_int(200, 1000));
        p.cycles_per_sample = rng.uniform(1e3, 9e3);
    }
    for (std::size_t i = 0; i < r.snapshot.channel_gains.size(); ++i) {
        r.snapshot.channel_gains[i] = 1e-10 * rng.uniform(0.2, 5.0);
        r.snapshot.available[i] = rng.bernoulli(0.85);
    }
    for (int k = 0; k < num_sc; ++k) {
        if (disjoint) {
            const auto m = static_cast<int>(rng.uniform_int(-1, num_fc - 1));
            if (m >= 0) {
                r.trust.set_weight(m, k, rng.uniform(0.1, 1.0));
            }
        } else {
            for (int m = 0; m < num_fc; ++m) {
                if (rng.bernoulli(0.6)) {
                    r.trust.set_weight(m, k, rng.uniform(0.1, 1.0));
                }
            }
        }
    }
    return r;
}

inline VirtualQueues random_queues(int num_fc, double scale, Rng& rng)
{
    VirtualQueues q(num_fc);
    for (auto& z : q.z) {
        z = rng.bernoulli(0.3) ? 0.0 : rng.uniform(0.0, scale);
    }
    return q;
}

inline bool close_rel(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace fixtures
