#include "socfedcs/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

double VirtualQueues::lyapunov() const
{
    double s = 0.0;
    for (double v : z) {
        s += v * v;
    }
    return 0.5 * s;
}

double VirtualQueues::l1() const
{
    return std::accumulate(z.begin(), z.end(), 0.0);
}

double SelectionDecision::max_cost() const
{
    double m = 0.0;
    for (const auto& c : costs) {
        m = std::max(m, c.total);
    }
    return m;
}

std::vector<int> SelectionDecision::per_fc_counts(int num_fc) const
{
    std::vector<int> counts(static_cast<std::size_t>(num_fc), 0);
    for (const auto& a : alpha) {
        ++counts[static_cast<std::size_t>(a.fc)];
    }
    return counts;
}

RoundContext::RoundContext(std::span<const ClientProfile> population, const TrustGraph& trust,
                           const NetworkSnapshot& snapshot, const CostParams& params)
    : population_(population), trust_(&trust), snapshot_(&snapshot), params_(&params),
      inputs_(population.size())
{
    if (static_cast<int>(population.size()) != trust.num_clients()
        || snapshot.available.size() != population.size()) {
        throw ConfigError("round context: population, trust graph and snapshot sizes disagree");
    }
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& profile = population[i];
        if (snapshot.available[i] && snapshot.in_coverage[i] && is_feasible(profile, params.t_max_cmp)
            && link_usable(profile, snapshot.channel_gains[i], params)) {
            inputs_[i] = client_round_inputs(profile, snapshot.channel_gains[i], params);
        }
    }
}

bool RoundContext::in_candidate_set(int fc, int client) const
{
    if (client == fc) {
        return true;
    }
    const int k = client - trust_->num_fc();
    return k >= 0 && k < trust_->num_sc() && trust_->weight(fc, k) > 0.0;
}

double RoundContext::cost(int fc, int client, double theta) const
{
    const auto i = static_cast<std::size_t>(client);
    return total_cost_at(population_[i], *inputs_[i], fc, theta, *params_);
}

CostBreakdown RoundContext::breakdown(int fc, int client, double theta) const
{
    const auto i = static_cast<std::size_t>(client);
    return socfedcs::breakdown(population_[i], *inputs_[i], fc, theta, *params_);
}

std::optional<double> score(const RoundContext& ctx, int fc, int client, double theta, const VirtualQueues& queues)
{
    if (!ctx.in_candidate_set(fc, client) || !ctx.eligible(client)) {
        return std::nullopt;
    }
    return ctx.params().V * ctx.cost(fc, client, theta) - queues.z[static_cast<std::size_t>(fc)];
}

std::optional<Recommendation> fc_recommend(const RoundContext& ctx, int fc, double theta,
                                           const VirtualQueues& queues)
{
    std::optional<Recommendation> best;
    // candidate_clients is in ascending id order, so strict < keeps the lowest id on ties.
    for (int client : ctx.trust().candidate_clients(fc)) {
        const auto s = score(ctx, fc, client, theta, queues);
        if (s && (!best || *s < best->score)) {
            best = Recommendation{fc, client, ctx.cost(fc, client, theta), *s};
        }
    }
    return best;
}

ServerChoice server_select(std::span<const Recommendation> recommendations, int L, const VirtualQueues& queues,
                           double V)
{
    std::vector<Recommendation> ranked(recommendations.begin(), recommendations.end());
    std::sort(ranked.begin(), ranked.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.score != b.score) return a.score < b.score;
        if (a.client != b.client) return a.client < b.client;
        return a.fc < b.fc;
    });

    ServerChoice choice;
    std::vector<Recommendation> survivors;
    std::vector<int> taken;
    for (const auto& r : ranked) {
        if (std::find(taken.begin(), taken.end(), r.client) != taken.end()) {
            ++choice.conflicts;
            continue;
        }
        taken.push_back(r.client);
        survivors.push_back(r);
    }
    if (L <= 0 || survivors.empty()) {
        return choice;
    }

    std::sort(survivors.begin(), survivors.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.client != b.client) return a.client < b.client;
        return a.fc < b.fc;
    });
    auto backlog = [&](std::size_t idx) { return queues.z[static_cast<std::size_t>(survivors[idx].fc)]; };

    // Relative objective: max V G - sum of served backlogs. The empty set scores 0.
    double best_value = 0.0;
    std::vector<std::size_t> best_set;
    std::vector<std::size_t> prefix;
    for (std::size_t j = 0; j < survivors.size(); ++j) {
        const std::size_t extra = std::min<std::size_t>(static_cast<std::size_t>(L - 1), prefix.size());
        std::partial_sort(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(extra), prefix.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (backlog(a) != backlog(b)) return backlog(a) > backlog(b);
                              return a < b;
                          });
        double value = V * survivors[j].cost - backlog(j);
        for (std::size_t e = 0; e < extra; ++e) {
            value -= backlog(prefix[e]);
        }
        if (value < best_value) {
            best_value = value;
            best_set.assign(prefix.begin(), prefix.begin() + static_cast<std::ptrdiff_t>(extra));
            best_set.push_back(j);
        }
        prefix.push_back(j);
        std::sort(prefix.begin(), prefix.end());
    }

    std::sort(best_set.begin(), best_set.end());
    for (std::size_t idx : best_set) {
        choice.accepted.push_back(survivors[idx]);
    }
    return choice;
}

VirtualQueues update_queues(const VirtualQueues& queues, std::span<const Assignment> alpha, double delta)
{
    std::vector<int> served(queues.z.size(), 0);
    for (const auto& a : alpha) {
        ++served[static_cast<std::size_t>(a.fc)];
    }
    VirtualQueues next = queues;
    for (std::size_t m = 0; m < next.z.size(); ++m) {
        const double arrival = served[m] == 0 ? delta : 0.0;
        next.z[m] = std::max(0.0, queues.z[m] + arrival - served[m]);
    }
    return next;
}

double round_objective(std::span<const Assignment> alpha, std::span<const double> costs,
                       const VirtualQueues& queues, double delta, double V)
{
    double max_penalty = 0.0;
    for (double c : costs) {
        max_penalty = std::max(max_penalty, V * c);
    }
    std::vector<int> served(queues.z.size(), 0);
    for (const auto& a : alpha) {
        ++served[static_cast<std::size_t>(a.fc)];
    }
    double queue_term = 0.0;
    for (std::size_t m = 0; m < queues.z.size(); ++m) {
        queue_term += queues.z[m] * (delta - served[m]);
    }
    return max_penalty + queue_term;
}

double round_objective(const SelectionDecision& decision, const VirtualQueues& queues, double delta, double V)
{
    std::vector<double> costs;
    costs.reserve(decision.costs.size());
    for (const auto& c : decision.costs) {
        costs.push_back(c.total);
    }
    return round_objective(decision.alpha, costs, queues, delta, V);
}

double drift_bound_gamma(int num_fc, double delta)
{
    return num_fc * (1.0 + delta * delta) / 2.0;
}

namespace {

SelectionDecision make_decision(const RoundContext& ctx, std::vector<Assignment> alpha, double theta,
                                const VirtualQueues& queues)
{
    std::sort(alpha.begin(), alpha.end(), [](const Assignment& a, const Assignment& b) { return a.fc < b.fc; });
    SelectionDecision d;
    d.theta = theta;
    d.alpha = std::move(alpha);
    for (const auto& a : d.alpha) {
        d.costs.push_back(ctx.breakdown(a.fc, a.client, theta));
    }
    d.objective_value = round_objective(d, queues, ctx.params().delta, ctx.params().V);
    return d;
}

} // namespace

SelectionDecision select_at_theta(const RoundContext& ctx, double theta, const VirtualQueues& queues)
{
    std::vector<Recommendation> recs;
    for (int m = 0; m < ctx.num_fc(); ++m) {
        if (auto r = fc_recommend(ctx, m, theta, queues)) {
            recs.push_back(*r);
        }
    }
    const ServerChoice choice = server_select(recs, ctx.params().L, queues, ctx.params().V);
    std::vector<Assignment> alpha;
    for (const auto& r : choice.accepted) {
        alpha.push_back({r.fc, r.client});
    }
    SelectionDecision d = make_decision(ctx, std::move(alpha), theta, queues);
    d.conflicts = choice.conflicts;
    return d;
}

SelectionDecision alternating_optimize(const RoundContext& ctx, const VirtualQueues& queues,
                                       const SchedulerParams& params, const SghsParams& sghs, Rng& rng)
{
    const double V = ctx.params().V;

    SelectionDecision current = select_at_theta(ctx, clamp_theta(params.theta_init), queues);
    SelectionDecision best = current;
    int alternations = 0;
    while (alternations < params.max_alternations && sghs.ni > 0 && !current.alpha.empty()) {
        ++alternations;
        const double before = best.objective_value;

        const auto& alpha = current.alpha;
        auto objective = [&](double theta) {
            double max_penalty = 0.0;
            for (const auto& a : alpha) {
                max_penalty = std::max(max_penalty, V * ctx.cost(a.fc, a.client, theta));
            }
            return max_penalty;
        };
        const SghsResult found = minimize(objective, params.theta_bounds, sghs, rng);

        SelectionDecision fixed_alpha = make_decision(ctx, current.alpha, found.theta, queues);
        fixed_alpha.conflicts = current.conflicts;
        if (fixed_alpha.objective_value < best.objective_value) {
            best = fixed_alpha;
        }
        current = select_at_theta(ctx, found.theta, queues);
        if (current.objective_value < best.objective_value) {
            best = current;
        }
        if (before - best.objective_value < params.tolerance) {
            break;
        }
    }
    best.alternations = alternations;
    return best;
}

SelectionDecision brute_force_select(const RoundContext& ctx, const VirtualQueues& queues, double theta,
                                     std::uint64_t cap)
{
    const int M = ctx.num_fc();
    const int K = ctx.trust().num_sc();
    std::uint64_t strategies = 1;
    for (int m = 0; m < M; ++m) {
        strategies *= static_cast<std::uint64_t>(K) + 1;
        if (strategies > cap) {
            throw InstanceTooLarge(fmt::format("brute force: (K+1)^M with K={}, M={} exceeds cap {}", K, M, cap));
        }
    }

    struct Option {
        int client;
        double penalty; // V G
    };
    const double V = ctx.params().V;
    std::vector<std::vector<Option>> options(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        for (int client : ctx.trust().candidate_clients(m)) {
            if (ctx.eligible(client)) {
                options[static_cast<std::size_t>(m)].push_back({client, V * ctx.cost(m, client, theta)});
            }
        }
    }

    const int L = ctx.params().L;
    double best_value = 0.0; // empty selection, relative to the constant Delta sum z
    std::vector<Assignment> best_alpha;
    std::vector<Assignment> stack;
    std::vector<int> used;

    auto recurse = [&](auto&& self, int m, double max_penalty, double served_backlog) -> void {
        if (m == M) {
            const double value = max_penalty - served_backlog;
            if (value < best_value) {
                best_value = value;
                best_alpha = stack;
            }
            return;
        }
        self(self, m + 1, max_penalty, served_backlog);
        if (static_cast<int>(stack.size()) >= L) {
            return;
        }
        for (const auto& opt : options[static_cast<std::size_t>(m)]) {
            if (std::find(used.begin(), used.end(), opt.client) != used.end()) {
                continue;
            }
            stack.push_back({m, opt.client});
            used.push_back(opt.client);
            self(self, m + 1, std::max(max_penalty, opt.penalty),
                 served_backlog + queues.z[static_cast<std::size_t>(m)]);
            used.pop_back();
            stack.pop_back();
        }
    };
    recurse(recurse, 0, 0.0, 0.0);

    return make_decision(ctx, std::move(best_alpha), theta, queues);
}

} // namespace socfedcs
