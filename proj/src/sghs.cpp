#include "socfedcs/sghs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

void validate(const SghsParams& p, double lo, double hi)
{
    if (!(lo < hi)) {
        throw ConfigError(fmt::format("sghs: bounds need lo < hi, got [{}, {}]", lo, hi));
    }
    if (p.hms < 2) {
        throw ConfigError(fmt::format("sghs.hms must be >= 2, got {}", p.hms));
    }
    if (p.ni < 0 || (p.ni > 0 && p.ni < p.hms)) {
        throw ConfigError(fmt::format("sghs.ni must be 0 or >= hms ({}), got {}", p.hms, p.ni));
    }
    if (p.lp < 1) {
        throw ConfigError("sghs.lp must be >= 1");
    }
    const double bw_max = p.bw_max.value_or((hi - lo) / 20.0);
    if (!(p.bw_min > 0.0) || !(bw_max >= p.bw_min)) {
        throw ConfigError(fmt::format("sghs: need 0 < bw_min <= bw_max, got {} and {}", p.bw_min, bw_max));
    }
    if (p.hmcr_stddev < 0.0 || p.par_stddev < 0.0) {
        throw ConfigError("sghs: standard deviations must be >= 0");
    }
}

HarmonyMemory::HarmonyMemory(std::vector<Harmony> entries) : entries_(std::move(entries))
{
    if (entries_.empty()) {
        throw ConfigError("harmony memory cannot be empty");
    }
    reindex();
}

void HarmonyMemory::reindex()
{
    best_ = 0;
    worst_ = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].value < entries_[best_].value) {
            best_ = i;
        }
        if (entries_[i].value > entries_[worst_].value) {
            worst_ = i;
        }
    }
}

bool HarmonyMemory::offer(const Harmony& candidate)
{
    if (!(candidate.value < entries_[worst_].value)) {
        return false;
    }
    entries_[worst_] = candidate;
    reindex();
    return true;
}

Improvisation improvise(const HarmonyMemory& memory, const SghsParams& params, const ImprovisationState& state,
                        Bounds bounds, Rng& rng)
{
    Improvisation out;
    out.hmcr = std::clamp(rng.normal(state.hmcr_mean, params.hmcr_stddev), 0.0, 1.0);
    out.par = std::clamp(rng.normal(state.par_mean, params.par_stddev), 0.0, 1.0);

    double theta = 0.0;
    if (rng.uniform01() < out.hmcr) {
        const auto entries = memory.entries();
        theta = entries[rng.index(entries.size())].theta;
        if (rng.uniform01() < out.par) {
            theta = memory.best().theta;
        }
        theta += rng.uniform(-1.0, 1.0) * state.bw;
    } else {
        theta = rng.uniform(bounds.lo, bounds.hi);
    }
    out.theta = std::clamp(theta, bounds.lo, bounds.hi);
    return out;
}

double bandwidth_at(int k, int ni, double bw_max, double bw_min)
{
    const int half = ni / 2;
    if (k >= half || half == 0) {
        return bw_min;
    }
    return bw_max - (bw_max - bw_min) * static_cast<double>(k) / half;
}

AdaptedMeans adapt_parameters(std::span<const Improvisation> improving, AdaptedMeans current)
{
    if (improving.empty()) {
        return current;
    }
    double hmcr = 0.0;
    double par = 0.0;
    for (const auto& imp : improving) {
        hmcr += imp.hmcr;
        par += imp.par;
    }
    const auto n = static_cast<double>(improving.size());
    return {hmcr / n, par / n};
}

SghsResult minimize(const Objective& objective, Bounds bounds, const SghsParams& params, Rng& rng)
{
    validate(params, bounds.lo, bounds.hi);
    const double bw_max = params.bw_max.value_or((bounds.hi - bounds.lo) / 20.0);

    int evaluations = 0;
    auto evaluate = [&](double theta) {
        const double v = objective(theta);
        ++evaluations;
        if (!std::isfinite(v)) {
            throw std::domain_error(fmt::format(
                "sghs: objective is not finite at theta={} (singular point inside bounds [{}, {}]?)", theta,
                bounds.lo, bounds.hi));
        }
        return v;
    };

    std::vector<Harmony> initial;
    initial.reserve(static_cast<std::size_t>(params.hms));
    for (int i = 0; i < params.hms; ++i) {
        const double theta = rng.uniform(bounds.lo, bounds.hi);
        initial.push_back({theta, evaluate(theta)});
    }
    HarmonyMemory memory(std::move(initial));

    AdaptedMeans means{params.hmcr_mean, params.par_mean};
    std::vector<Improvisation> improving;
    for (int k = 0; k < params.ni; ++k) {
        const ImprovisationState state{means.hmcr_mean, means.par_mean,
                                       bandwidth_at(k, params.ni, bw_max, params.bw_min)};
        const Improvisation imp = improvise(memory, params, state, bounds, rng);
        if (memory.offer({imp.theta, evaluate(imp.theta)})) {
            improving.push_back(imp);
        }
        if ((k + 1) % params.lp == 0) {
            means = adapt_parameters(improving, means);
            improving.clear();
        }
    }

    return {memory.best().theta, memory.best().value, evaluations, means};
}

} // namespace socfedcs
