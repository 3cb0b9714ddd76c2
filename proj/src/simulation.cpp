#include "socfedcs/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"
#include "socfedcs/population_io.hpp"
#include "socfedcs/validator.hpp"

namespace socfedcs {

struct Simulation::Training {
    Dataset train;
    Dataset test;
    std::vector<ClientShard> shards; // indexed by client id
    GlobalModel model;
};

namespace {

Dataset load_dataset(const TrainingConfig& t, std::size_t train_samples, Dataset& test, std::uint64_t seed)
{
    if (t.dataset == "idx") {
        Dataset train = load_idx(t.idx_train_images, t.idx_train_labels);
        test = load_idx(t.idx_test_images, t.idx_test_labels);
        const int classes = std::max(train.classes, test.classes);
        train.classes = classes;
        test.classes = classes;
        return train;
    }
    auto rng = Rng::derive(seed, Stream::dataset);
    const auto total = static_cast<int>(train_samples) + t.test_samples;
    auto all = generate_synthetic(t.classes, t.dim, total, t.separation, rng);
    auto [train, tail] = split_tail(all, static_cast<std::size_t>(t.test_samples));
    test = std::move(tail);
    return train;
}

double drift_excess(const VirtualQueues& before, const VirtualQueues& after, std::span<const Assignment> alpha,
                    double delta)
{
    std::vector<int> served(static_cast<std::size_t>(before.size()), 0);
    for (const auto& a : alpha) {
        ++served[static_cast<std::size_t>(a.fc)];
    }
    double rhs = drift_bound_gamma(before.size(), delta);
    for (std::size_t m = 0; m < served.size(); ++m) {
        rhs += before.z[m] * (delta - served[m]);
    }
    const double lhs = after.lyapunov() - before.lyapunov();
    return lhs - rhs;
}

} // namespace

Simulation::Simulation(const ExperimentConfig& config, SelectorKind selector, std::uint64_t seed)
    : config_(config), selector_(selector), seed_(seed), trust_(config.population.num_fc, config.population.num_sc)
{
    const int M = config_.population.num_fc;
    const int K = config_.population.num_sc;
    if (config_.topology_path) {
        auto topo = load_topology(*config_.topology_path);
        if (topo.trust.num_fc() != M || topo.trust.num_sc() != K) {
            throw ConfigError(fmt::format("topology {} has M={}, K={} but the config asks for M={}, K={}",
                                          *config_.topology_path, topo.trust.num_fc(), topo.trust.num_sc(), M, K));
        }
        population_ = std::move(topo.clients);
        trust_ = std::move(topo.trust);
    } else {
        auto prng = Rng::derive(seed_, Stream::population);
        population_ = generate_population(config_.population, prng);
        auto trng = Rng::derive(seed_, Stream::trust);
        trust_ = generate_trust_graph(M, K, config_.trust_edge_prob, trng);
    }

    auto placement = Rng::derive(seed_, Stream::placement);
    mobility_ = initial_mobility(population_.size(), config_.mobility, placement);
    queues_ = VirtualQueues(M);
    participation_.assign(static_cast<std::size_t>(M), 0);
    oort_ = OortState(M);

    if (config_.training.enabled) {
        training_ = std::make_unique<Training>();
        std::vector<int> requested;
        requested.reserve(population_.size());
        std::size_t wanted = 0;
        for (const auto& c : population_) {
            requested.push_back(c.num_samples);
            wanted += static_cast<std::size_t>(c.num_samples);
        }
        training_->train = load_dataset(config_.training, wanted, training_->test, seed_);
        const auto sizes = fit_shard_sizes(requested, training_->train.size());
        auto part = Rng::derive(seed_, Stream::partition);
        if (config_.training.scenario == 1) {
            training_->shards = partition_scenario1(training_->train, trust_, sizes, config_.training.noise, part);
        } else {
            training_->shards = partition_scenario2(training_->train, trust_, sizes, config_.training.heterogeneity,
                                                    config_.training.noise, part);
        }
        training_->model = GlobalModel::zeros(training_->train.dim(), training_->train.classes);
    }
}

Simulation::~Simulation() = default;

const GlobalModel* Simulation::model() const
{
    return training_ ? &training_->model : nullptr;
}

SelectionDecision Simulation::select(const RoundContext& ctx)
{
    auto rng = Rng::derive(seed_, Stream::selector, static_cast<std::uint64_t>(round_));
    const auto& b = config_.baselines;
    const int L = config_.cost.L;
    switch (selector_) {
    case SelectorKind::socfedcs:
        return alternating_optimize(ctx, queues_, config_.scheduler, config_.sghs, rng);
    case SelectorKind::random:
        return select_random(ctx, L, b.theta, rng);
    case SelectorKind::greedy:
        return select_greedy(ctx, L, b.theta);
    case SelectorKind::powcs: {
        std::optional<TrainingView> view;
        if (training_) {
            view = TrainingView{&training_->model, &training_->train, training_->shards};
        }
        const int d = b.candidate_set_size.value_or(std::max(L, ctx.num_fc() / 2));
        return select_powcs(ctx, L, d, view, b.theta, rng);
    }
    case SelectorKind::fedcs:
        return select_fedcs(ctx, b.deadline_s, b.theta);
    case SelectorKind::oort:
        return select_oort(ctx, L, oort_, b.exploit_fraction, b.preferred_round_time, b.theta, rng);
    }
    throw ConfigError("unknown selector");
}

std::optional<double> Simulation::train(const SelectionDecision& decision, bool evaluate_now)
{
    auto& tr = *training_;
    const auto N = static_cast<std::uint64_t>(population_.size());
    std::vector<LocalUpdate> updates;
    updates.reserve(decision.alpha.size());
    for (const auto& a : decision.alpha) {
        const auto& shard = tr.shards[static_cast<std::size_t>(a.client)];
        if (a.client < config_.population.num_fc && a.client == a.fc) {
            oort_.record(a.fc, oort_statistical_utility(sample_losses(tr.model, tr.train, shard)));
        }
        if (shard.size() == 0) {
            continue;
        }
        auto rng = Rng::derive(seed_, Stream::training, static_cast<std::uint64_t>(round_) * N
                                                            + static_cast<std::uint64_t>(a.client));
        updates.push_back({local_train(tr.model, tr.train, shard, decision.theta, config_.training.params, rng),
                           shard.size()});
    }
    tr.model = aggregate(tr.model, updates);
    tr.model.round = round_;
    if (!tr.model.all_finite()) {
        throw InvariantViolation(fmt::format("round {}: global model has non-finite weights", round_));
    }
    if (!evaluate_now) {
        return std::nullopt;
    }
    return evaluate(tr.model, tr.test);
}

RoundRecord Simulation::step()
{
    ++round_;
    const auto t = static_cast<std::uint64_t>(round_);
    const int M = config_.population.num_fc;
    const int K = config_.population.num_sc;

    auto mrng = Rng::derive(seed_, Stream::mobility, t);
    for (auto& s : mobility_) {
        s = step_mobility(s, config_.mobility.dt, mrng, config_.mobility);
    }
    if (config_.resample_trust_each_round && !config_.topology_path) {
        auto trng = Rng::derive(seed_, Stream::trust, t);
        trust_ = generate_trust_graph(M, K, config_.trust_edge_prob, trng);
    }
    auto srng = Rng::derive(seed_, Stream::snapshot, t);
    snapshot_ = build_snapshot(population_, mobility_, round_, srng, config_.snapshot);

    const RoundContext ctx(population_, trust_, snapshot_, config_.cost);
    SelectionDecision decision = select(ctx);
    const double delta = config_.cost.delta;
    decision.objective_value = round_objective(decision, queues_, delta, config_.cost.V);

    if (config_.check_invariants) {
        ValidationRules rules;
        rules.t_max_cmp = config_.cost.t_max_cmp;
        rules.min_snr_db = config_.cost.min_snr_db;
        rules.bandwidth = config_.cost.bandwidth;
        rules.noise_density = config_.cost.noise_density;
        rules.first_order_only = selector_ != SelectorKind::socfedcs;
        if (selector_ != SelectorKind::fedcs) {
            rules.max_selected = config_.cost.L;
        }
        validate_decision(decision, population_, trust_, snapshot_, rules);
    }

    const VirtualQueues before = queues_;
    queues_ = update_queues(queues_, decision.alpha, delta);

    RoundRecord rec;
    rec.round = round_;
    rec.selector = std::string(selector_name(selector_));
    rec.drift_excess = drift_excess(before, queues_, decision.alpha, delta);
    const double scale = std::max({1.0, before.lyapunov(), queues_.lyapunov()});
    if (rec.drift_excess > 1e-12 * scale) {
        ++drift_violations_;
        if (config_.check_invariants) {
            throw InvariantViolation(fmt::format("round {}: drift bound violated by {}", round_, rec.drift_excess));
        }
    }

    for (const auto& a : decision.alpha) {
        ++participation_[static_cast<std::size_t>(a.fc)];
    }
    if (training_) {
        const bool eval_now = round_ % config_.training.eval_every == 0 || round_ == config_.rounds;
        rec.test_accuracy = train(decision, eval_now);
        if (rec.test_accuracy) {
            last_accuracy_ = rec.test_accuracy;
        }
    } else {
        for (const auto& a : decision.alpha) {
            if (a.client == a.fc) {
                oort_.record(a.fc, static_cast<double>(population_[static_cast<std::size_t>(a.fc)].num_samples));
            }
        }
    }

    rec.max_cost = decision.max_cost();
    cost_sum_ += rec.max_cost;
    rec.time_avg_cost = cost_sum_ / round_;
    rec.theta = decision.theta;
    rec.objective = decision.objective_value;
    rec.queue_l1 = queues_.l1();
    rec.conflicts = decision.conflicts;
    rec.queues = queues_.z;
    rec.participation = participation_;
    rec.min_participation_rate =
        static_cast<double>(*std::min_element(participation_.begin(), participation_.end())) / round_;
    rec.alpha = std::move(decision.alpha);
    total_conflicts_ += rec.conflicts;
    total_selected_ += static_cast<long>(rec.alpha.size());
    return rec;
}

RunSummary Simulation::summary() const
{
    RunSummary s;
    s.selector = std::string(selector_name(selector_));
    s.seed = seed_;
    s.rounds = round_;
    s.drift_violations = drift_violations_;
    s.total_conflicts = total_conflicts_;
    if (round_ == 0) {
        return s;
    }
    s.time_avg_cost = cost_sum_ / round_;
    s.final_accuracy = last_accuracy_;
    s.min_participation_rate =
        static_cast<double>(*std::min_element(participation_.begin(), participation_.end())) / round_;
    s.max_queue_ratio = *std::max_element(queues_.z.begin(), queues_.z.end()) / round_;
    s.mean_selected = static_cast<double>(total_selected_) / round_;
    return s;
}

std::vector<RoundRecord> run_simulation(const ExperimentConfig& config, SelectorKind selector, std::uint64_t seed,
                                        RunSummary* summary)
{
    Simulation sim(config, selector, seed);
    std::vector<RoundRecord> records;
    records.reserve(static_cast<std::size_t>(config.rounds));
    for (int t = 0; t < config.rounds; ++t) {
        records.push_back(sim.step());
    }
    if (summary != nullptr) {
        *summary = sim.summary();
    }
    return records;
}

} // namespace socfedcs
