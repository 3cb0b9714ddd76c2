#pragma once

#include <optional>

#include "socfedcs/network_model.hpp"

namespace socfedcs {

inline constexpr double kThetaMin = 0.01;
inline constexpr double kThetaMax = 0.99;

/// Shared cost and scheduling parameters.
struct CostParams {
    double bandwidth = 0.2e6;                         // Hz
    double noise_density = thermal_noise_density();  // W/Hz
    double theta = 0.5;                               // local accuracy, (0, 1)
    double sigma = 1.0;                               // recommendation preference
    double recommendation_cost = 0.05;                // C0
    double V = 10.0;                                  // Lyapunov penalty weight
    double t_max_cmp = 0.1;                           // s per local iteration
    int L = 14;                                       // clients per round
    double delta = 14.0 / 120.0;                      // target participation rate
    /// Links with a lower SNR are in outage and cannot be selected; unset disables.
    std::optional<double> min_snr_db = 0.0;

    /// Delta = L / N, as used by the default experiment.
    static double participation_target(int L, int num_clients) { return static_cast<double>(L) / num_clients; }
};

/// Throws ConfigError on out-of-domain parameters.
void validate(const CostParams& params);

struct CostBreakdown {
    double rate = 0.0;
    double t_com = 0.0;
    double e_com = 0.0;
    double t_cmp_iter = 0.0;
    double e_cmp_iter = 0.0;
    double t_round = 0.0;
    double e_round = 0.0;
    double wset = 0.0;
    double total = 0.0;
};

struct TimeEnergy {
    double time = 0.0;
    double energy = 0.0;
};

/// Shannon rate B log2(1 + h p / (N0 B)) for a selected client, 0 otherwise.
double data_rate(bool selected, double bandwidth, double gain, double power, double noise_density);

/// Upload time C / R and energy p C / R. Throws InfeasibleLink when R = 0 and
/// there is something to send.
TimeEnergy comm_cost(const ClientProfile& profile, double rate);

/// One local iteration: D Q / f seconds and rho D Q f^(zeta-1) joules.
TimeEnergy cmp_cost_per_iter(const ClientProfile& profile);

/// Round totals [ln(1/theta) x_cmp + x_com] / (1 - theta). theta must lie in (0, 1).
TimeEnergy round_cost(double theta, TimeEnergy com, TimeEnergy cmp);

/// Weighted cost of FC m selecting client i; SCs (i != m) carry sigma C0.
double total_cost(const ClientProfile& profile, int fc, int client, TimeEnergy round, double sigma,
                  double recommendation_cost);

/// SNR h p / (N0 B) at or above the outage threshold, if one is set.
bool link_usable(const ClientProfile& profile, double gain, const CostParams& params);

/// Straggler test D Q / f <= T_max. Unselected clients are vacuously feasible.
bool is_feasible(const ClientProfile& profile, double t_max_cmp, bool selected = true);

double clamp_theta(double theta);

/// The theta-independent part of a client's cost in one round.
struct ClientRoundInputs {
    double rate = 0.0;
    TimeEnergy com;
    TimeEnergy cmp;
};

ClientRoundInputs client_round_inputs(const ClientProfile& profile, double gain, const CostParams& params);

/// Full breakdown for (fc, client) at theta.
CostBreakdown breakdown(const ClientProfile& profile, const ClientRoundInputs& inputs, int fc, double theta,
                        const CostParams& params);

/// Just the total G, the hot path inside theta searches.
double total_cost_at(const ClientProfile& profile, const ClientRoundInputs& inputs, int fc, double theta,
                     const CostParams& params);

} // namespace socfedcs
