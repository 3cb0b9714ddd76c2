#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "socfedcs/rng.hpp"

namespace socfedcs {

enum class Tier { first_order, second_order };

/// Static per-client resources. Client ids are global: FCs occupy
/// [0, M) and SCs occupy [M, M + K), so SC k has client id M + k.
struct ClientProfile {
    int id = 0;
    Tier tier = Tier::first_order;
    double transmit_power = 0.1;      // W
    double cpu_frequency = 1e8;       // cycles/s
    double cycles_per_sample = 5e3;   // cycles
    int num_samples = 500;
    double model_size_bits = 1e5;
    double capacitance = 1e-24;       // J s^(zeta-1) / cycle^zeta
    double zeta = 3.0;
    double weight_time = 0.5;
    double weight_energy = 0.5;
};

/// Throws ConfigError when a profile breaks the positivity or weight-sum rules.
void validate_profile(const ClientProfile& profile);

struct PopulationConfig {
    int num_fc = 40;
    int num_sc = 80;
    std::vector<double> power_pool{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<double> cpu_pool = default_cpu_pool();
    int samples_min = 200;
    int samples_max = 1000;
    double cycles_min = 3e3;
    double cycles_max = 9e3;
    double model_size_bits = 1e5;
    double capacitance = 1e-24;
    double zeta = 3.0;
    double weight_time = 0.5;

    /// {2e7, 3e7, ..., 2e8} cycles/s.
    static std::vector<double> default_cpu_pool();
};

std::vector<ClientProfile> generate_population(const PopulationConfig& config, Rng& rng);

/// FC-to-SC trust weights, row-major M x K, entries in [0, 1] (0 = no edge).
class TrustGraph {
public:
    TrustGraph() = default;
    TrustGraph(int num_fc, int num_sc);
    TrustGraph(int num_fc, int num_sc, std::vector<double> weights);

    int num_fc() const { return num_fc_; }
    int num_sc() const { return num_sc_; }
    int num_clients() const { return num_fc_ + num_sc_; }

    double weight(int fc, int sc) const { return weights_[index(fc, sc)]; }
    void set_weight(int fc, int sc, double w);
    std::span<const double> weights() const { return weights_; }

    /// SC indices k with w(m, k) > 0.
    std::vector<int> trusted_scs(int fc) const;

    /// Client ids of the candidate set: FC m itself first, then M + k for
    /// every trusted SC k. Never empty.
    std::vector<int> candidate_clients(int fc) const;

    double row_sum(int fc) const;
    double column_sum(int sc) const;
    double total_weight() const;

    bool operator==(const TrustGraph&) const = default;

private:
    std::size_t index(int fc, int sc) const;

    int num_fc_ = 0;
    int num_sc_ = 0;
    std::vector<double> weights_;
};

/// Erdos-Renyi bipartite graph: every (m, k) is an edge with probability
/// edge_prob, edge weights Uniform(0, 1].
TrustGraph generate_trust_graph(int num_fc, int num_sc, double edge_prob, Rng& rng);

struct Position {
    double x = 0.0;
    double y = 0.0;

    double norm() const;
};

struct MobilityState {
    Position position;
    double speed = 1.5;          // m/s
    double direction = 0.0;      // rad
    double mean_direction = 0.0; // rad, used while inside coverage
    double gm_memory = 0.75;
    double mean_speed = 1.5;
    double speed_stddev = 0.5;
    double direction_stddev = 0.3;
};

struct MobilityConfig {
    double gm_memory = 0.75;
    double mean_speed = 1.5;
    double speed_stddev = 0.5;
    double direction_stddev = 0.3;
    double dt = 1.0;
    /// Coverage disk radius around the server at the origin.
    double coverage_radius = 100.0;
    /// Half side of the reflecting square; clients never leave it.
    double box_half_width = 150.0;
    /// Outside coverage, the Gauss-Markov mean direction is reset to point at the
    /// server, so returning clients cross the disk instead of hovering at its edge.
    bool steer_to_server = true;
};

/// Initial states: positions uniform in the coverage disk, speed at the mean,
/// direction and mean direction uniform.
std::vector<MobilityState> initial_mobility(std::size_t count, const MobilityConfig& config, Rng& rng);

/// One Gauss-Markov step:
///   s' = g s + (1 - g) s_mean + sqrt(1 - g^2) N(0, speed_sd)
///   d' = d + (1 - g) wrap(d_mean - d) + sqrt(1 - g^2) N(0, dir_sd)
/// then the position advances by s' dt along d'. Speed is clamped at 0.
/// Box edges reflect position and direction.
MobilityState step_mobility(const MobilityState& state, double dt, Rng& rng,
                            const MobilityConfig& bounds = {});

struct ChannelConfig {
    double path_loss_exponent = 3.76;
    double reference_distance = 1.0;
    double reference_gain = calibrated_reference_gain();

    /// Gain g0 at the reference distance such that the median SNR at 50 m,
    /// p = 0.3 W, B = 0.2 MHz, N0 = -174 dBm/Hz is 20 dB under Rayleigh fading.
    static double calibrated_reference_gain();
};

/// Thermal noise density, -174 dBm/Hz in W/Hz.
double thermal_noise_density();

/// Deterministic part g0 (d / d0)^-kappa, with d clamped below at d0.
double path_loss(double distance, const ChannelConfig& config);

/// Path loss times an Exponential(1) Rayleigh power draw.
double channel_gain(double distance, Rng& rng, const ChannelConfig& config = {});

struct NetworkSnapshot {
    int round = 0;
    std::vector<double> channel_gains; // 0 for out-of-coverage clients
    std::vector<bool> available;
    std::vector<bool> in_coverage;

    bool usable(int client) const { return available[static_cast<std::size_t>(client)]; }
};

struct SnapshotConfig {
    double availability = 0.6;
    double coverage_radius = 100.0;
    ChannelConfig channel;
};

/// Draws availability and channel for every client in id order. A Bernoulli
/// and a fading draw are consumed for every client so the stream layout does
/// not depend on positions.
NetworkSnapshot build_snapshot(std::span<const ClientProfile> population,
                               std::span<const MobilityState> mobility, int round,
                               Rng& rng, const SnapshotConfig& config = {});

} // namespace socfedcs
