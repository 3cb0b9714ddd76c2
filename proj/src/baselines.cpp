#include "socfedcs/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

namespace {

constexpr SelectorKind kAllSelectors[] = {SelectorKind::socfedcs, SelectorKind::random, SelectorKind::greedy,
                                          SelectorKind::powcs,    SelectorKind::fedcs,  SelectorKind::oort};

SelectionDecision fc_decision(const RoundContext& ctx, std::vector<int> fcs, double theta)
{
    std::sort(fcs.begin(), fcs.end());
    SelectionDecision d;
    d.theta = theta;
    for (int m : fcs) {
        d.alpha.push_back({m, m});
        d.costs.push_back(ctx.breakdown(m, m, theta));
    }
    return d;
}

// Sorts ids by key ascending (or descending), ties to the lowest id.
void rank_by(std::vector<int>& ids, const std::vector<double>& key, bool descending)
{
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        const double ka = key[static_cast<std::size_t>(a)];
        const double kb = key[static_cast<std::size_t>(b)];
        if (ka != kb) return descending ? ka > kb : ka < kb;
        return a < b;
    });
}

} // namespace

std::string_view selector_name(SelectorKind kind)
{
    switch (kind) {
    case SelectorKind::socfedcs: return "socfedcs";
    case SelectorKind::random: return "random";
    case SelectorKind::greedy: return "greedy";
    case SelectorKind::powcs: return "powcs";
    case SelectorKind::fedcs: return "fedcs";
    case SelectorKind::oort: return "oort";
    }
    return "unknown";
}

SelectorKind parse_selector(std::string_view name)
{
    for (auto kind : kAllSelectors) {
        if (selector_name(kind) == name) {
            return kind;
        }
    }
    throw ConfigError(fmt::format("unknown selector '{}' (expected socfedcs, random, greedy, powcs, fedcs, oort)",
                                  name));
}

void validate(const BaselineParams& p, int num_fc, int L)
{
    if (!(p.theta > 0.0 && p.theta < 1.0)) {
        throw ConfigError(fmt::format("baselines.theta must lie in (0,1), got {}", p.theta));
    }
    if (p.candidate_set_size && (*p.candidate_set_size < L || *p.candidate_set_size > num_fc)) {
        throw ConfigError(fmt::format("baselines.candidate_set_size must lie in [L, M] = [{}, {}], got {}", L, num_fc,
                                      *p.candidate_set_size));
    }
    if (!(p.deadline_s > 0.0)) {
        throw ConfigError("baselines.deadline_s must be positive");
    }
    if (!(p.exploit_fraction >= 0.0 && p.exploit_fraction <= 1.0)) {
        throw ConfigError("baselines.exploit_fraction must lie in [0,1]");
    }
    if (!(p.preferred_round_time > 0.0)) {
        throw ConfigError("baselines.preferred_round_time must be positive");
    }
}

std::vector<int> eligible_fcs(const RoundContext& ctx)
{
    std::vector<int> out;
    for (int m = 0; m < ctx.num_fc(); ++m) {
        if (ctx.eligible(m)) {
            out.push_back(m);
        }
    }
    return out;
}

SelectionDecision select_random(const RoundContext& ctx, int L, double theta, Rng& rng)
{
    const auto pool = eligible_fcs(ctx);
    std::vector<int> chosen;
    for (std::size_t idx : rng.sample_indices(pool.size(), static_cast<std::size_t>(std::max(0, L)))) {
        chosen.push_back(pool[idx]);
    }
    return fc_decision(ctx, std::move(chosen), theta);
}

SelectionDecision select_greedy(const RoundContext& ctx, int L, double theta)
{
    auto pool = eligible_fcs(ctx);
    std::vector<double> cost(static_cast<std::size_t>(ctx.num_fc()), 0.0);
    for (int m : pool) {
        cost[static_cast<std::size_t>(m)] = ctx.cost(m, m, theta);
    }
    rank_by(pool, cost, false);
    pool.resize(std::min(pool.size(), static_cast<std::size_t>(std::max(0, L))));
    return fc_decision(ctx, std::move(pool), theta);
}

SelectionDecision select_powcs(const RoundContext& ctx, int L, int candidate_set_size,
                               const std::optional<TrainingView>& training, double theta, Rng& rng)
{
    if (!training || training->model == nullptr || training->dataset == nullptr) {
        throw ConfigError("powcs needs a training backend to compute local losses (enable training)");
    }
    const auto pool = eligible_fcs(ctx);
    std::vector<int> candidates;
    for (std::size_t idx : rng.sample_indices(pool.size(), static_cast<std::size_t>(candidate_set_size))) {
        candidates.push_back(pool[idx]);
    }
    std::vector<double> loss(static_cast<std::size_t>(ctx.num_fc()), 0.0);
    for (int m : candidates) {
        loss[static_cast<std::size_t>(m)] =
            squared_loss(*training->model, *training->dataset, training->shards[static_cast<std::size_t>(m)]);
    }
    rank_by(candidates, loss, true);
    candidates.resize(std::min(candidates.size(), static_cast<std::size_t>(std::max(0, L))));
    return fc_decision(ctx, std::move(candidates), theta);
}

SelectionDecision select_fedcs(const RoundContext& ctx, double deadline_s, double theta)
{
    auto pool = eligible_fcs(ctx);
    std::vector<double> round_time(static_cast<std::size_t>(ctx.num_fc()), 0.0);
    for (int m : pool) {
        round_time[static_cast<std::size_t>(m)] = ctx.breakdown(m, m, theta).t_round;
    }
    rank_by(pool, round_time, false);
    std::vector<int> chosen;
    for (int m : pool) {
        // Uploads run in parallel, so the schedule length is the slowest member.
        if (round_time[static_cast<std::size_t>(m)] > deadline_s) {
            break;
        }
        chosen.push_back(m);
    }
    return fc_decision(ctx, std::move(chosen), theta);
}

double oort_statistical_utility(std::span<const double> sample_losses)
{
    if (sample_losses.empty()) {
        return 0.0;
    }
    double sq = 0.0;
    for (double l : sample_losses) {
        sq += l * l;
    }
    const auto n = static_cast<double>(sample_losses.size());
    return n * std::sqrt(sq / n);
}

double oort_utility(double statistical, double round_time, double preferred_round_time)
{
    if (round_time > preferred_round_time) {
        return statistical * (preferred_round_time / round_time);
    }
    return statistical;
}

SelectionDecision select_oort(const RoundContext& ctx, int L, const OortState& state, double exploit_fraction,
                              double preferred_round_time, double theta, Rng& rng)
{
    const auto pool = eligible_fcs(ctx);
    std::vector<int> explored;
    std::vector<int> unexplored;
    std::vector<double> utility(static_cast<std::size_t>(ctx.num_fc()), 0.0);
    for (int m : pool) {
        const auto& stat = state.statistical_utility[static_cast<std::size_t>(m)];
        if (stat) {
            utility[static_cast<std::size_t>(m)] =
                oort_utility(*stat, ctx.breakdown(m, m, theta).t_round, preferred_round_time);
            explored.push_back(m);
        } else {
            unexplored.push_back(m);
        }
    }
    rank_by(explored, utility, true);

    const auto slots = static_cast<std::size_t>(std::max(0, L));
    const auto exploit_target = static_cast<std::size_t>(std::ceil(exploit_fraction * static_cast<double>(slots)));
    const std::size_t exploit = std::min(exploit_target, explored.size());
    std::vector<int> chosen(explored.begin(), explored.begin() + static_cast<std::ptrdiff_t>(exploit));

    const std::size_t explore = std::min(slots - exploit, unexplored.size());
    for (std::size_t idx : rng.sample_indices(unexplored.size(), explore)) {
        chosen.push_back(unexplored[idx]);
    }
    for (std::size_t i = exploit; i < explored.size() && chosen.size() < slots; ++i) {
        chosen.push_back(explored[i]);
    }
    return fc_decision(ctx, std::move(chosen), theta);
}

} // namespace socfedcs
