#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "socfedcs/rng.hpp"

namespace socfedcs {

/// Self-adaptive global-best harmony search over a closed interval.
struct SghsParams {
    int hms = 10;
    double hmcr_mean = 0.98;
    double hmcr_stddev = 0.01;
    double par_mean = 0.9;
    double par_stddev = 0.05;
    /// Unset means (hi - lo) / 20 for the bounds being searched.
    std::optional<double> bw_max;
    double bw_min = 5e-4;
    /// Improvisations after initialization; 0 disables the search.
    int ni = 200;
    /// Learning period between parameter adaptations.
    int lp = 50;
};

/// Throws ConfigError on hms < 2, 0 < ni < hms, lp < 1 or bw_min > bw_max.
void validate(const SghsParams& params, double lo, double hi);

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

struct Harmony {
    double theta = 0.0;
    double value = 0.0;
};

class HarmonyMemory {
public:
    explicit HarmonyMemory(std::vector<Harmony> entries);

    std::span<const Harmony> entries() const { return entries_; }
    const Harmony& best() const { return entries_[best_]; }
    const Harmony& worst() const { return entries_[worst_]; }
    std::size_t best_index() const { return best_; }
    std::size_t worst_index() const { return worst_; }

    /// Replaces the worst entry iff the candidate is strictly better.
    bool offer(const Harmony& candidate);

private:
    void reindex();

    std::vector<Harmony> entries_;
    std::size_t best_ = 0;
    std::size_t worst_ = 0;
};

/// Per-improvisation control values: the running means and the current bandwidth.
struct ImprovisationState {
    double hmcr_mean = 0.98;
    double par_mean = 0.9;
    double bw = 0.0;
};

struct Improvisation {
    double theta = 0.0;
    double hmcr = 0.0; // value drawn for this improvisation
    double par = 0.0;
};

/// With probability HMCR take a random memory value, with probability PAR
/// replace it by the global best, and shift it by U(-bw, bw); otherwise sample
/// uniformly in bounds. The result is clamped to bounds.
Improvisation improvise(const HarmonyMemory& memory, const SghsParams& params, const ImprovisationState& state,
                        Bounds bounds, Rng& rng);

/// Bandwidth for improvisation k: linear from bw_max to bw_min over the first
/// ni / 2 improvisations, then bw_min.
double bandwidth_at(int k, int ni, double bw_max, double bw_min);

struct AdaptedMeans {
    double hmcr_mean = 0.0;
    double par_mean = 0.0;
};

/// Means of the HMCR/PAR values that produced memory-improving harmonies in
/// the last learning period; unchanged when there were none.
AdaptedMeans adapt_parameters(std::span<const Improvisation> improving, AdaptedMeans current);

struct SghsResult {
    double theta = 0.0;
    double value = 0.0;
    int evaluations = 0;
    AdaptedMeans final_means;
};

using Objective = std::function<double(double)>;

/// Minimizes objective on [lo, hi]. Exactly hms + ni evaluations. Throws
/// std::domain_error if the objective returns a non-finite value.
SghsResult minimize(const Objective& objective, Bounds bounds, const SghsParams& params, Rng& rng);

} // namespace socfedcs
