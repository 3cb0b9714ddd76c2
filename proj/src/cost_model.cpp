#include "socfedcs/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

void validate(const CostParams& p)
{
    if (!(p.bandwidth > 0.0) || !(p.noise_density > 0.0)) {
        throw ConfigError("cost: bandwidth and noise_density must be positive");
    }
    if (!(p.theta > 0.0 && p.theta < 1.0)) {
        throw ConfigError(fmt::format("cost: theta must lie in (0,1), got {}", p.theta));
    }
    if (!(p.sigma >= 0.0) || !(p.recommendation_cost > 0.0)) {
        throw ConfigError("cost: sigma must be >= 0 and recommendation_cost > 0");
    }
    if (!(p.V >= 0.0) || !(p.t_max_cmp > 0.0) || p.L < 0) {
        throw ConfigError("cost: V >= 0, t_max_cmp > 0 and L >= 0 required");
    }
    if (!(p.delta >= 0.0 && p.delta <= 1.0)) {
        throw ConfigError(fmt::format("cost: delta must lie in [0,1], got {}", p.delta));
    }
}

bool link_usable(const ClientProfile& profile, double gain, const CostParams& params)
{
    if (!params.min_snr_db) {
        return gain > 0.0;
    }
    const double snr = gain * profile.transmit_power / (params.noise_density * params.bandwidth);
    return snr >= std::pow(10.0, *params.min_snr_db / 10.0);
}

double data_rate(bool selected, double bandwidth, double gain, double power, double noise_density)
{
    if (!selected) {
        return 0.0;
    }
    return bandwidth * std::log1p(gain * power / (noise_density * bandwidth)) / std::numbers::ln2;
}

TimeEnergy comm_cost(const ClientProfile& profile, double rate)
{
    if (profile.model_size_bits == 0.0) {
        return {};
    }
    if (!(rate > 0.0)) {
        throw InfeasibleLink(fmt::format("client {} has zero uplink rate", profile.id));
    }
    const double t = profile.model_size_bits / rate;
    return {t, profile.transmit_power * t};
}

TimeEnergy cmp_cost_per_iter(const ClientProfile& profile)
{
    const double cycles = profile.num_samples * profile.cycles_per_sample;
    return {cycles / profile.cpu_frequency,
            profile.capacitance * cycles * std::pow(profile.cpu_frequency, profile.zeta - 1.0)};
}

TimeEnergy round_cost(double theta, TimeEnergy com, TimeEnergy cmp)
{
    if (!(theta > 0.0 && theta < 1.0)) {
        throw std::domain_error(fmt::format("theta must lie in (0,1), got {}", theta));
    }
    const double iterations = std::log(1.0 / theta);
    const double scale = 1.0 / (1.0 - theta);
    return {scale * (iterations * cmp.time + com.time), scale * (iterations * cmp.energy + com.energy)};
}

double total_cost(const ClientProfile& profile, int fc, int client, TimeEnergy round, double sigma,
                  double recommendation_cost)
{
    const double wset = profile.weight_time * round.time + profile.weight_energy * round.energy;
    return client != fc ? wset + sigma * recommendation_cost : wset;
}

bool is_feasible(const ClientProfile& profile, double t_max_cmp, bool selected)
{
    if (!selected) {
        return true;
    }
    return profile.num_samples * profile.cycles_per_sample / profile.cpu_frequency <= t_max_cmp;
}

double clamp_theta(double theta)
{
    return std::clamp(theta, kThetaMin, kThetaMax);
}

ClientRoundInputs client_round_inputs(const ClientProfile& profile, double gain, const CostParams& params)
{
    ClientRoundInputs in;
    in.rate = data_rate(true, params.bandwidth, gain, profile.transmit_power, params.noise_density);
    in.com = comm_cost(profile, in.rate);
    in.cmp = cmp_cost_per_iter(profile);
    return in;
}

CostBreakdown breakdown(const ClientProfile& profile, const ClientRoundInputs& inputs, int fc, double theta,
                        const CostParams& params)
{
    const TimeEnergy round = round_cost(theta, inputs.com, inputs.cmp);
    CostBreakdown b;
    b.rate = inputs.rate;
    b.t_com = inputs.com.time;
    b.e_com = inputs.com.energy;
    b.t_cmp_iter = inputs.cmp.time;
    b.e_cmp_iter = inputs.cmp.energy;
    b.t_round = round.time;
    b.e_round = round.energy;
    b.wset = profile.weight_time * round.time + profile.weight_energy * round.energy;
    b.total = total_cost(profile, fc, profile.id, round, params.sigma, params.recommendation_cost);
    return b;
}

double total_cost_at(const ClientProfile& profile, const ClientRoundInputs& inputs, int fc, double theta,
                     const CostParams& params)
{
    return total_cost(profile, fc, profile.id, round_cost(theta, inputs.com, inputs.cmp), params.sigma,
                      params.recommendation_cost);
}

} // namespace socfedcs
