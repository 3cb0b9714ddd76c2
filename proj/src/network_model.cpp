#include "socfedcs/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

void validate_profile(const ClientProfile& p)
{
    if (!(p.transmit_power > 0.0 && p.cpu_frequency > 0.0 && p.cycles_per_sample > 0.0
          && p.num_samples > 0 && p.model_size_bits > 0.0 && p.capacitance > 0.0)) {
        throw ConfigError(fmt::format("client {}: resources must be positive", p.id));
    }
    if (!(p.zeta >= 2.0)) {
        throw ConfigError(fmt::format("client {}: zeta must be >= 2, got {}", p.id, p.zeta));
    }
    if (p.weight_time < 0.0 || p.weight_time > 1.0 || p.weight_energy < 0.0 || p.weight_energy > 1.0
        || std::abs(p.weight_time + p.weight_energy - 1.0) > 1e-12) {
        throw ConfigError(fmt::format("client {}: time/energy weights must lie in [0,1] and sum to 1", p.id));
    }
}

std::vector<double> PopulationConfig::default_cpu_pool()
{
    std::vector<double> pool;
    for (int step = 2; step <= 20; ++step) {
        pool.push_back(step * 1e7);
    }
    return pool;
}

std::vector<ClientProfile> generate_population(const PopulationConfig& config, Rng& rng)
{
    if (config.num_fc <= 0) {
        throw ConfigError(fmt::format("population.num_fc must be positive, got {}", config.num_fc));
    }
    if (config.num_sc < config.num_fc) {
        throw ConfigError(fmt::format("population.num_sc ({}) must be >= num_fc ({})", config.num_sc,
                                      config.num_fc));
    }
    if (config.power_pool.empty() || config.cpu_pool.empty()) {
        throw ConfigError("population power and cpu pools must be non-empty");
    }
    if (config.samples_min <= 0 || config.samples_max < config.samples_min || config.cycles_min <= 0.0
        || config.cycles_max < config.cycles_min) {
        throw ConfigError("population sample/cycle ranges are invalid");
    }

    const int total = config.num_fc + config.num_sc;
    std::vector<ClientProfile> clients;
    clients.reserve(static_cast<std::size_t>(total));
    for (int id = 0; id < total; ++id) {
        ClientProfile p;
        p.id = id;
        p.tier = id < config.num_fc ? Tier::first_order : Tier::second_order;
        p.transmit_power = config.power_pool[rng.index(config.power_pool.size())];
        p.cpu_frequency = config.cpu_pool[rng.index(config.cpu_pool.size())];
        p.num_samples = static_cast<int>(rng.uniform_int(config.samples_min, config.samples_max));
        p.cycles_per_sample = rng.uniform(config.cycles_min, config.cycles_max);
        p.model_size_bits = config.model_size_bits;
        p.capacitance = config.capacitance;
        p.zeta = config.zeta;
        p.weight_time = config.weight_time;
        p.weight_energy = 1.0 - config.weight_time;
        validate_profile(p);
        clients.push_back(p);
    }
    return clients;
}

TrustGraph::TrustGraph(int num_fc, int num_sc)
    : num_fc_(num_fc), num_sc_(num_sc),
      weights_(static_cast<std::size_t>(num_fc) * static_cast<std::size_t>(num_sc), 0.0)
{
    if (num_fc < 0 || num_sc < 0) {
        throw ConfigError("trust graph dimensions must be non-negative");
    }
}

TrustGraph::TrustGraph(int num_fc, int num_sc, std::vector<double> weights) : TrustGraph(num_fc, num_sc)
{
    if (weights.size() != weights_.size()) {
        throw ConfigError(fmt::format("trust graph expects {} weights, got {}", weights_.size(), weights.size()));
    }
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw ConfigError(fmt::format("trust weight {} outside [0,1]", w));
        }
    }
    weights_ = std::move(weights);
}

std::size_t TrustGraph::index(int fc, int sc) const
{
    return static_cast<std::size_t>(fc) * static_cast<std::size_t>(num_sc_) + static_cast<std::size_t>(sc);
}

void TrustGraph::set_weight(int fc, int sc, double w)
{
    if (!(w >= 0.0 && w <= 1.0)) {
        throw ConfigError(fmt::format("trust weight {} outside [0,1]", w));
    }
    weights_[index(fc, sc)] = w;
}

std::vector<int> TrustGraph::trusted_scs(int fc) const
{
    std::vector<int> out;
    for (int k = 0; k < num_sc_; ++k) {
        if (weight(fc, k) > 0.0) {
            out.push_back(k);
        }
    }
    return out;
}

std::vector<int> TrustGraph::candidate_clients(int fc) const
{
    std::vector<int> out{fc};
    for (int k : trusted_scs(fc)) {
        out.push_back(num_fc_ + k);
    }
    return out;
}

double TrustGraph::row_sum(int fc) const
{
    double s = 0.0;
    for (int k = 0; k < num_sc_; ++k) {
        s += weight(fc, k);
    }
    return s;
}

double TrustGraph::column_sum(int sc) const
{
    double s = 0.0;
    for (int m = 0; m < num_fc_; ++m) {
        s += weight(m, sc);
    }
    return s;
}

double TrustGraph::total_weight() const
{
    double s = 0.0;
    for (double w : weights_) {
        s += w;
    }
    return s;
}

TrustGraph generate_trust_graph(int num_fc, int num_sc, double edge_prob, Rng& rng)
{
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
        throw ConfigError(fmt::format("trust.edge_prob must lie in [0,1], got {}", edge_prob));
    }
    TrustGraph graph(num_fc, num_sc);
    for (int m = 0; m < num_fc; ++m) {
        for (int k = 0; k < num_sc; ++k) {
            // Both draws always happen so edge_prob does not shift the stream.
            const bool edge = rng.bernoulli(edge_prob);
            const double w = 1.0 - rng.uniform01(); // (0, 1]
            if (edge) {
                graph.set_weight(m, k, w);
            }
        }
    }
    return graph;
}

double Position::norm() const
{
    return std::hypot(x, y);
}

std::vector<MobilityState> initial_mobility(std::size_t count, const MobilityConfig& config, Rng& rng)
{
    std::vector<MobilityState> states(count);
    for (auto& s : states) {
        const double r = config.coverage_radius * std::sqrt(rng.uniform01());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        s.position = {r * std::cos(phi), r * std::sin(phi)};
        s.direction = rng.uniform(0.0, 2.0 * std::numbers::pi);
        s.mean_direction = rng.uniform(0.0, 2.0 * std::numbers::pi);
        s.gm_memory = config.gm_memory;
        s.mean_speed = config.mean_speed;
        s.speed = config.mean_speed;
        s.speed_stddev = config.speed_stddev;
        s.direction_stddev = config.direction_stddev;
    }
    return states;
}

namespace {

double wrap_angle(double a)
{
    return std::remainder(a, 2.0 * std::numbers::pi);
}

// Mirror coordinate into [-h, h], flipping the matching velocity component.
void reflect(double& coord, double& velocity, double h)
{
    for (int guard = 0; guard < 8 && (coord > h || coord < -h); ++guard) {
        coord = coord > h ? 2.0 * h - coord : -2.0 * h - coord;
        velocity = -velocity;
    }
}

} // namespace

MobilityState step_mobility(const MobilityState& state, double dt, Rng& rng, const MobilityConfig& bounds)
{
    if (!(dt > 0.0)) {
        throw ConfigError(fmt::format("mobility step needs dt > 0, got {}", dt));
    }
    MobilityState next = state;
    const double g = state.gm_memory;
    const double innovation = std::sqrt(std::max(0.0, 1.0 - g * g));

    double target_direction = state.mean_direction;
    if (bounds.steer_to_server && state.position.norm() > bounds.coverage_radius) {
        target_direction = std::atan2(-state.position.y, -state.position.x);
        next.mean_direction = target_direction;
    }

    const double speed_noise = rng.normal(0.0, state.speed_stddev);
    const double direction_noise = rng.normal(0.0, state.direction_stddev);
    next.speed = std::max(0.0, g * state.speed + (1.0 - g) * state.mean_speed + innovation * speed_noise);
    next.direction = state.direction + (1.0 - g) * wrap_angle(target_direction - state.direction)
        + innovation * direction_noise;

    double vx = std::cos(next.direction);
    double vy = std::sin(next.direction);
    next.position.x += next.speed * dt * vx;
    next.position.y += next.speed * dt * vy;
    if (bounds.box_half_width > 0.0) {
        const double before_x = vx;
        const double before_y = vy;
        reflect(next.position.x, vx, bounds.box_half_width);
        reflect(next.position.y, vy, bounds.box_half_width);
        if (vx != before_x || vy != before_y) {
            next.direction = std::atan2(vy, vx);
        }
    }
    return next;
}

double ChannelConfig::calibrated_reference_gain()
{
    constexpr double target_snr = 100.0; // 20 dB
    constexpr double distance = 50.0;
    constexpr double power = 0.3;
    constexpr double bandwidth = 0.2e6;
    constexpr double kappa = 3.76;
    const double median_fading = std::numbers::ln2; // median of Exponential(1)
    const double noise = thermal_noise_density() * bandwidth;
    return target_snr * noise * std::pow(distance, kappa) / (median_fading * power);
}

double thermal_noise_density()
{
    return std::pow(10.0, (-174.0 - 30.0) / 10.0);
}

double path_loss(double distance, const ChannelConfig& config)
{
    const double d = std::max(distance, config.reference_distance);
    return config.reference_gain * std::pow(d / config.reference_distance, -config.path_loss_exponent);
}

double channel_gain(double distance, Rng& rng, const ChannelConfig& config)
{
    return path_loss(distance, config) * rng.exponential();
}

NetworkSnapshot build_snapshot(std::span<const ClientProfile> population, std::span<const MobilityState> mobility,
                               int round, Rng& rng, const SnapshotConfig& config)
{
    if (population.size() != mobility.size()) {
        throw ConfigError(fmt::format("snapshot: {} profiles but {} mobility states", population.size(),
                                      mobility.size()));
    }
    NetworkSnapshot snap;
    snap.round = round;
    const std::size_t n = population.size();
    snap.channel_gains.assign(n, 0.0);
    snap.available.assign(n, false);
    snap.in_coverage.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const double distance = mobility[i].position.norm();
        const bool covered = distance <= config.coverage_radius;
        const bool up = rng.bernoulli(config.availability);
        const double gain = channel_gain(distance, rng, config.channel);
        snap.in_coverage[i] = covered;
        snap.available[i] = covered && up;
        // Exponential(1) can return exactly 0 only when uniform01() == 0.
        snap.channel_gains[i] = covered ? std::max(gain, std::numeric_limits<double>::min()) : 0.0;
    }
    return snap;
}

} // namespace socfedcs
