#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "socfedcs/cost_model.hpp"
#include "socfedcs/errors.hpp"

using namespace socfedcs;
using fixtures::close_rel;

TEST_CASE("data rate")
{
    CHECK(data_rate(false, 0.2e6, 1.0, 1.0, 1.0) == 0.0);
    // h p / (N0 B) = 3
    const double n0 = 1e-20;
    const double b = 0.2e6;
    const double h = 3.0 * n0 * b / 0.5;
    CHECK(close_rel(data_rate(true, b, h, 0.5, n0), 4e5, 1e-14));
    CHECK(data_rate(true, b, 0.0, 0.5, n0) == 0.0);
}

TEST_CASE("communication cost")
{
    ClientProfile p;
    p.model_size_bits = 1e5;
    p.transmit_power = 0.2;
    const auto c = comm_cost(p, 4e5);
    CHECK(c.time == doctest::Approx(0.25));
    CHECK(c.energy == doctest::Approx(0.05));
    CHECK(comm_cost(p, 8e5).time == c.time / 2.0);
    CHECK_THROWS_AS(comm_cost(p, 0.0), InfeasibleLink);

    p.model_size_bits = 0.0;
    const auto none = comm_cost(p, 0.0);
    CHECK(none.time == 0.0);
    CHECK(none.energy == 0.0);
}

TEST_CASE("computation cost per iteration")
{
    ClientProfile p;
    p.num_samples = 500;
    p.cycles_per_sample = 2e4;
    p.cpu_frequency = 1e8;
    CHECK(cmp_cost_per_iter(p).time == doctest::Approx(0.1));

    // rho D Q f^(zeta - 1) = 1e-28 * 1e7 * 1e8
    p.zeta = 2.0;
    p.capacitance = 1e-28;
    p.num_samples = 1000;
    p.cycles_per_sample = 1e4;
    const auto base = cmp_cost_per_iter(p);
    CHECK(close_rel(base.energy, 1e-13, 1e-14));

    p.cpu_frequency = 2e8;
    const auto doubled = cmp_cost_per_iter(p);
    CHECK(close_rel(doubled.time, base.time / 2.0, 1e-15));
    CHECK(close_rel(doubled.energy, base.energy * 2.0, 1e-15));
}

TEST_CASE("round cost")
{
    const TimeEnergy com{0.25, 0.05};
    const TimeEnergy cmp{0.1, 0.02};
    const auto half = round_cost(0.5, com, cmp);
    CHECK(half.time == doctest::Approx(0.63863).epsilon(1e-5));
    CHECK(close_rel(half.time, (std::log(2.0) * 0.1 + 0.25) / 0.5, 1e-15));

    const double inv_e = 1.0 / std::numbers::e;
    const auto at_e = round_cost(inv_e, com, cmp);
    CHECK(close_rel(at_e.time, (0.1 + 0.25) / (1.0 - inv_e), 1e-14));

    const auto near_one = round_cost(1.0 - 1e-6, {1.0, 1.0}, {1.0, 1.0});
    CHECK(near_one.time > 1e5 * 2.0);

    CHECK_THROWS_AS(round_cost(0.0, com, cmp), std::domain_error);
    CHECK_THROWS_AS(round_cost(1.0, com, cmp), std::domain_error);
    CHECK_THROWS_AS(round_cost(-0.2, com, cmp), std::domain_error);
}

TEST_CASE("round time has a single interior minimiser")
{
    const TimeEnergy com{0.25, 0.05};
    const TimeEnergy cmp{0.1, 0.02};
    int sign_changes = 0;
    double prev = 0.0;
    double prev_slope = 0.0;
    for (int k = 1; k < 10000; ++k) {
        const double t = round_cost(k / 10000.0, com, cmp).time;
        if (k > 1) {
            const double slope = t - prev;
            if (k > 2 && (slope > 0.0) != (prev_slope > 0.0)) {
                ++sign_changes;
            }
            prev_slope = slope;
        }
        prev = t;
    }
    CHECK(sign_changes == 1);
}

TEST_CASE("total cost")
{
    ClientProfile p;
    p.id = 3;
    const TimeEnergy round{0.6, 0.2};
    CHECK(total_cost(p, 3, 3, round, 1.0, 0.1) == 0.5 * 0.6 + 0.5 * 0.2);
    CHECK(total_cost(p, 0, 3, round, 1.0, 0.1) == doctest::Approx(0.5));
    CHECK(total_cost(p, 0, 3, round, 0.0, 0.1) == total_cost(p, 3, 3, round, 1.0, 0.1));

    // Scaling (T, E) by c scales WSET by c.
    const TimeEnergy scaled{1.8, 0.6};
    CHECK(close_rel(total_cost(p, 3, 3, scaled, 0.0, 0.0), 3.0 * total_cost(p, 3, 3, round, 0.0, 0.0), 1e-15));
}

TEST_CASE("straggler feasibility")
{
    ClientProfile p;
    p.num_samples = 500;
    p.cycles_per_sample = 2e4;
    p.cpu_frequency = 1e8;
    CHECK(is_feasible(p, 0.1));
    p.cycles_per_sample = 2.0002e4;
    CHECK_FALSE(is_feasible(p, 0.1));
    CHECK(is_feasible(p, 0.1, false));
}

TEST_CASE("theta clamp and parameter validation")
{
    CHECK(clamp_theta(0.0) == kThetaMin);
    CHECK(clamp_theta(1.0) == kThetaMax);
    CHECK(clamp_theta(0.3) == 0.3);

    CostParams p;
    CHECK_NOTHROW(validate(p));
    CHECK(CostParams::participation_target(14, 120) == doctest::Approx(14.0 / 120.0));
    p.theta = 1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.delta = 1.5;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = {};
    p.recommendation_cost = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
}

TEST_CASE("breakdown fields are consistent and non-negative over the theta domain")
{
    auto rng = Rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        ClientProfile p;
        p.id = trial % 2 == 0 ? 0 : 7;
        p.transmit_power = rng.uniform(0.1, 0.5);
        p.cpu_frequency = rng.uniform(2e7, 2e8);
        p.num_samples = static_cast<int>(rng.uniform_int(200, 1000));
        p.cycles_per_sample = rng.uniform(3e3, 9e3);
        CostParams params;
        const auto in = client_round_inputs(p, 1e-10 * rng.uniform(0.01, 10.0), params);
        const double theta = rng.uniform(kThetaMin, kThetaMax);
        const auto b = breakdown(p, in, 0, theta, params);
        for (double v : {b.rate, b.t_com, b.e_com, b.t_cmp_iter, b.e_cmp_iter, b.t_round, b.e_round, b.wset, b.total}) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
        CHECK(b.total >= b.wset);
        CHECK((b.total == b.wset) == (p.id == 0));
        CHECK(b.total == total_cost_at(p, in, 0, theta, params));
    }
}

TEST_CASE("outage threshold")
{
    ClientProfile p;
    p.transmit_power = 0.2;
    CostParams params;
    const double unit_snr_gain = params.noise_density * params.bandwidth / p.transmit_power;
    CHECK(link_usable(p, unit_snr_gain * 1.0001, params));
    CHECK_FALSE(link_usable(p, unit_snr_gain * 0.9999, params));
    params.min_snr_db.reset();
    CHECK(link_usable(p, unit_snr_gain * 1e-6, params));
    CHECK_FALSE(link_usable(p, 0.0, params));
}
