#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "socfedcs/errors.hpp"
#include "socfedcs/scheduler.hpp"

using namespace socfedcs;
using fixtures::close_rel;
using fixtures::Round;

TEST_CASE("score is V G - z_m")
{
    Round r(2, 2);
    r.params.V = 1.0;
    const auto ctx = r.context();
    VirtualQueues q(2);
    const double g = ctx.cost(0, 0, 0.5);
    CHECK(*score(ctx, 0, 0, 0.5, q) == g);

    r.params.V = 10.0;
    const auto ctx10 = r.context();
    q.z[0] = 2.0;
    CHECK(*score(ctx10, 0, 0, 0.5, q) == doctest::Approx(10.0 * g - 2.0));

    // Not in the candidate set, or not eligible: no score.
    CHECK_FALSE(score(ctx10, 0, 2, 0.5, q).has_value());
    r.snapshot.available[1] = false;
    CHECK_FALSE(score(r.context(), 1, 1, 0.5, q).has_value());
}

TEST_CASE("larger backlog lowers every score under that FC only")
{
    Round r(2, 3);
    r.trust.set_weight(0, 0, 0.5);
    r.trust.set_weight(1, 0, 0.5);
    r.trust.set_weight(1, 1, 0.5);
    const auto ctx = r.context();
    VirtualQueues q(2);
    VirtualQueues raised = q;
    raised.z[0] = 0.7;
    for (int client : {0, 2}) {
        CHECK(*score(ctx, 0, client, 0.5, raised) < *score(ctx, 0, client, 0.5, q));
    }
    for (int client : {1, 2, 3}) {
        CHECK(*score(ctx, 1, client, 0.5, raised) == *score(ctx, 1, client, 0.5, q));
    }
    // Equal G under two FCs: the backlogged FC's candidate ranks first.
    CHECK(*score(ctx, 0, 2, 0.5, raised) < *score(ctx, 1, 2, 0.5, raised));
}

TEST_CASE("FC recommendation")
{
    Round r(2, 2);
    VirtualQueues q(2);
    SUBCASE("singleton candidate set recommends the FC itself")
    {
        const auto rec = fc_recommend(r.context(), 0, 0.5, q);
        REQUIRE(rec);
        CHECK(rec->client == 0);
    }
    SUBCASE("nothing eligible")
    {
        r.trust.set_weight(0, 0, 1.0);
        r.snapshot.available[0] = false;
        r.snapshot.available[2] = false;
        CHECK_FALSE(fc_recommend(r.context(), 0, 0.5, q).has_value());
    }
    SUBCASE("an SC with a much better link wins despite the surcharge")
    {
        r.trust.set_weight(0, 0, 0.3);
        r.snapshot.channel_gains[0] = 1e-14; // FC barely above outage
        r.snapshot.channel_gains[2] = 1e-9;
        const auto ctx = r.context();
        REQUIRE(ctx.cost(0, 2, 0.5) < ctx.cost(0, 0, 0.5));
        const auto rec = fc_recommend(ctx, 0, 0.5, q);
        REQUIRE(rec);
        CHECK(rec->client == 2);
        CHECK(rec->cost == ctx.cost(0, 2, 0.5));
    }
    SUBCASE("ties go to the lowest client id")
    {
        r.trust.set_weight(0, 0, 0.3);
        r.trust.set_weight(0, 1, 0.3);
        r.params.sigma = 0.0;
        const auto rec = fc_recommend(r.context(), 0, 0.5, q);
        REQUIRE(rec);
        CHECK(rec->client == 0);
        r.snapshot.available[0] = false;
        CHECK(fc_recommend(r.context(), 0, 0.5, q)->client == 2);
    }
}

TEST_CASE("server stage")
{
    SUBCASE("no recommendations")
    {
        VirtualQueues q(3);
        const auto choice = server_select({}, 14, q, 10.0);
        CHECK(choice.accepted.empty());
        const auto next = update_queues(q, {}, 0.1);
        for (double z : next.z) {
            CHECK(z == doctest::Approx(0.1));
        }
    }
    SUBCASE("with equal large backlogs the L lowest scores are taken")
    {
        VirtualQueues q(20);
        std::fill(q.z.begin(), q.z.end(), 100.0);
        std::vector<Recommendation> recs;
        for (int m = 0; m < 20; ++m) {
            const double cost = 0.1 + 0.01 * ((m * 7) % 20);
            recs.push_back({m, m, cost, 10.0 * cost - 100.0});
        }
        const auto choice = server_select(recs, 14, q, 10.0);
        REQUIRE(choice.accepted.size() == 14);
        auto sorted = recs;
        std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.score < b.score; });
        for (std::size_t j = 0; j < 14; ++j) {
            const bool found = std::any_of(choice.accepted.begin(), choice.accepted.end(),
                                           [&](const auto& a) { return a.fc == sorted[j].fc; });
            CHECK(found);
        }
    }
    SUBCASE("duplicate SC keeps the lower score and the other FC idles")
    {
        VirtualQueues q(3);
        std::fill(q.z.begin(), q.z.end(), 5.0);
        const std::vector<Recommendation> recs{{1, 7, 0.09, 0.4}, {2, 7, 0.11, 0.6}};
        const auto choice = server_select(recs, 14, q, 10.0);
        REQUIRE(choice.accepted.size() == 1);
        CHECK(choice.accepted[0].fc == 1);
        CHECK(choice.accepted[0].client == 7);
        CHECK(choice.conflicts == 1);
    }
    SUBCASE("with no backlog nothing is worth selecting")
    {
        VirtualQueues q(2);
        const std::vector<Recommendation> recs{{0, 0, 0.2, 2.0}, {1, 1, 0.3, 3.0}};
        CHECK(server_select(recs, 14, q, 10.0).accepted.empty());
    }
    SUBCASE("the cap L is respected")
    {
        VirtualQueues q(5);
        std::fill(q.z.begin(), q.z.end(), 50.0);
        std::vector<Recommendation> recs;
        for (int m = 0; m < 5; ++m) {
            recs.push_back({m, m, 0.1 * (m + 1), 0.0});
        }
        CHECK(server_select(recs, 2, q, 1.0).accepted.size() == 2);
        CHECK(server_select(recs, 0, q, 1.0).accepted.empty());
    }
}

TEST_CASE("queue update")
{
    const double delta = 14.0 / 120.0;
    VirtualQueues q(3);
    q.z = {0.0, 0.5, 2.3};
    const std::vector<Assignment> alpha{{1, 1}, {2, 5}};
    const auto next = update_queues(q, alpha, delta);
    CHECK(next.z[0] == doctest::Approx(0.11667).epsilon(1e-4));
    CHECK(next.z[1] == 0.0);
    CHECK(next.z[2] == doctest::Approx(1.3));
    CHECK(q.lyapunov() == doctest::Approx(0.5 * (0.25 + 2.3 * 2.3)));
    CHECK(q.l1() == doctest::Approx(2.8));
}

TEST_CASE("round objective")
{
    VirtualQueues q(3);
    q.z = {1.0, 1.0, 0.0};
    const std::vector<Assignment> alpha{{0, 0}, {1, 4}};
    const std::vector<double> costs{0.3, 0.5};
    CHECK(round_objective(alpha, costs, q, 0.1, 10.0) == doctest::Approx(3.2));

    CHECK(round_objective({}, {}, q, 0.1, 10.0) == doctest::Approx(0.2));

    VirtualQueues zero(2);
    const std::vector<Assignment> one{{1, 1}};
    const std::vector<double> c1{0.42};
    CHECK(round_objective(one, c1, zero, 0.1, 10.0) == doctest::Approx(4.2));
}

TEST_CASE("drift constant")
{
    CHECK(drift_bound_gamma(40, 14.0 / 120.0) == doctest::Approx(20.27222).epsilon(1e-6));
    CHECK(drift_bound_gamma(7, 0.0) == 3.5);
    CHECK(drift_bound_gamma(1, 1.0) == 1.0);
}

TEST_CASE("one-step drift never exceeds the bound")
{
    auto rng = Rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const int M = 1 + static_cast<int>(rng.uniform_int(0, 9));
        const double delta = rng.uniform01();
        auto q = fixtures::random_queues(M, 5.0, rng);
        std::vector<Assignment> alpha;
        for (int m = 0; m < M; ++m) {
            if (rng.bernoulli(0.4)) {
                alpha.push_back({m, m});
            }
        }
        const auto next = update_queues(q, alpha, delta);
        double rhs = drift_bound_gamma(M, delta);
        for (int m = 0; m < M; ++m) {
            const bool served = std::any_of(alpha.begin(), alpha.end(), [&](auto& a) { return a.fc == m; });
            rhs += q.z[static_cast<std::size_t>(m)] * (delta - (served ? 1.0 : 0.0));
        }
        CHECK(next.lyapunov() - q.lyapunov() <= rhs);
        for (double z : next.z) {
            CHECK(z >= 0.0);
        }
    }
}

TEST_CASE("alternating optimisation finds the best theta for a single client")
{
    Round r(1, 1);
    r.snapshot.available[1] = false;
    r.population[0].num_samples = 800;
    r.population[0].cycles_per_sample = 1e4;
    VirtualQueues q(1);
    q.z[0] = 100.0;
    const auto ctx = r.context();

    double grid_best = 0.0;
    double grid_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
        const double theta = kThetaMin + (kThetaMax - kThetaMin) * k / 9999.0;
        const double v = ctx.cost(0, 0, theta);
        if (v < grid_value) {
            grid_value = v;
            grid_best = theta;
        }
    }
    auto rng = Rng(4);
    const auto d = alternating_optimize(ctx, q, {}, {}, rng);
    REQUIRE(d.alpha.size() == 1);
    CHECK(std::abs(d.theta - grid_best) <= 1e-2);
    CHECK(d.objective_value <= select_at_theta(ctx, 0.5, q).objective_value);
}

TEST_CASE("identical clients give a stable selection")
{
    Round r(6, 6);
    VirtualQueues q(6);
    std::fill(q.z.begin(), q.z.end(), 3.0);
    const auto ctx = r.context();
    const auto first = select_at_theta(ctx, 0.5, q);
    auto rng = Rng(8);
    const auto d = alternating_optimize(ctx, q, {}, {}, rng);
    CHECK(d.alpha == first.alpha);
}

TEST_CASE("without SGHS iterations the loop is one-shot at theta_init")
{
    Round r(3, 3);
    VirtualQueues q(3);
    std::fill(q.z.begin(), q.z.end(), 3.0);
    SchedulerParams sp;
    sp.theta_init = 0.37;
    SghsParams sg;
    sg.ni = 0;
    auto rng = Rng(1);
    const auto d = alternating_optimize(r.context(), q, sp, sg, rng);
    CHECK(d.theta == 0.37);
    CHECK(d.alternations == 0);
    CHECK(d.alpha == select_at_theta(r.context(), 0.37, q).alpha);
}

TEST_CASE("brute force")
{
    SUBCASE("cap")
    {
        Round r(3, 4);
        VirtualQueues q(3);
        CHECK_NOTHROW(brute_force_select(r.context(), q, 0.5, 125));
        CHECK_THROWS_AS(brute_force_select(r.context(), q, 0.5, 124), InstanceTooLarge);
    }
    SUBCASE("L = 0 selects nothing")
    {
        Round r(3, 4);
        r.params.L = 0;
        VirtualQueues q(3);
        std::fill(q.z.begin(), q.z.end(), 10.0);
        CHECK(brute_force_select(r.context(), q, 0.5).alpha.empty());
        CHECK(select_at_theta(r.context(), 0.5, q).alpha.empty());
    }
    SUBCASE("matches two-stage selection on disjoint candidate sets")
    {
        auto rng = Rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            auto r = fixtures::random_round(3, 4, true, rng);
            r.params.L = 1 + static_cast<int>(rng.uniform_int(0, 3));
            const auto q = fixtures::random_queues(3, 4.0, rng);
            const auto ctx = r.context();
            const auto two_stage = select_at_theta(ctx, 0.5, q);
            const auto exact = brute_force_select(ctx, q, 0.5);
            CHECK(close_rel(two_stage.objective_value, exact.objective_value, 1e-12));
        }
    }
    SUBCASE("is never beaten by two-stage selection")
    {
        auto rng = Rng(32);
        for (int trial = 0; trial < 50; ++trial) {
            auto r = fixtures::random_round(4, 5, false, rng);
            r.params.L = 2;
            const auto q = fixtures::random_queues(4, 4.0, rng);
            const auto ctx = r.context();
            CHECK(brute_force_select(ctx, q, 0.3).objective_value
                  <= select_at_theta(ctx, 0.3, q).objective_value + 1e-12);
        }
    }
}

TEST_CASE("decision helpers")
{
    SelectionDecision d;
    CHECK(d.max_cost() == 0.0);
    d.alpha = {{0, 0}, {2, 5}};
    d.costs.resize(2);
    d.costs[0].total = 0.4;
    d.costs[1].total = 0.9;
    CHECK(d.max_cost() == 0.9);
    CHECK(d.per_fc_counts(3) == std::vector<int>{1, 0, 1});
}
