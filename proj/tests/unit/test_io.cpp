#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fixtures.hpp"
#include "socfedcs/config.hpp"
#include "socfedcs/errors.hpp"
#include "socfedcs/experiment.hpp"
#include "socfedcs/population_io.hpp"
#include "socfedcs/validator.hpp"

using namespace socfedcs;

namespace {

std::string config_error(std::string_view text, const std::vector<std::string>& overrides = {})
{
    try {
        parse_config(text, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

SelectionDecision decision_of(const RoundContext& ctx, std::vector<Assignment> alpha, double theta = 0.5)
{
    SelectionDecision d;
    d.theta = theta;
    for (const auto& a : alpha) {
        d.costs.push_back(ctx.breakdown(a.fc, a.client, theta));
    }
    d.alpha = std::move(alpha);
    return d;
}

std::string violation(const fixtures::Round& r, const SelectionDecision& d, const ValidationRules& rules)
{
    try {
        validate_decision(d, r.population, r.trust, r.snapshot, rules);
    } catch (const InvariantViolation& e) {
        return e.what();
    }
    return {};
}

ExperimentConfig small_config(int rounds)
{
    auto c = parse_config("{}");
    c.population.num_fc = 6;
    c.population.num_sc = 10;
    c.cost.L = 3;
    c.cost.delta = CostParams::participation_target(3, 16);
    c.rounds = rounds;
    return c;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / ("socfedcs_" + name))
    {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config defaults")
{
    const auto c = parse_config("{}");
    CHECK(c.population.num_fc == 40);
    CHECK(c.population.num_sc == 80);
    CHECK(c.cost.L == 14);
    CHECK(c.cost.delta == doctest::Approx(14.0 / 120.0));
    CHECK(c.rounds == 2000);

    const auto round_trip = config_from_json(config_to_json(c));
    CHECK(config_to_json(round_trip) == config_to_json(c));
    CHECK(default_config_json()["cost"]["delta"].is_null());
}

TEST_CASE("config rejects unknown keys with their line")
{
    const std::string text = "{\n  \"cost\": {\n    \"L\": 10,\n    \"gamma\": 3\n  }\n}\n";
    const auto msg = config_error(text);
    CHECK(msg.find("line 4") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);

    CHECK(config_error("{\"costs\": {}}").find("costs") != std::string::npos);
}

TEST_CASE("config type and range errors")
{
    const std::string text = "{\n  \"experiment\": {\n    \"rounds\": \"many\"\n  }\n}\n";
    const auto msg = config_error(text);
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("experiment.rounds") != std::string::npos);

    CHECK_FALSE(config_error("{\"cost\": {\"delta\": 1.5}}").empty());
    CHECK_FALSE(config_error("{\"experiment\": {\"selectors\": [\"fedavg\"]}}").empty());
    CHECK_FALSE(config_error("{\"population\": {\"num_fc\": 50, \"num_sc\": 20}}").empty());
}

TEST_CASE("config syntax errors report a position")
{
    const auto msg = config_error("{\n  \"cost\": {\n    \"L\": 10,\n  }\n}\n");
    CHECK(msg.find("syntax error") != std::string::npos);
    CHECK(msg.find("line 4") != std::string::npos);
}

TEST_CASE("config overrides")
{
    const auto c = parse_config("{}", {"cost.L=7", "experiment.selectors=[\"greedy\",\"random\"]", "training.dataset=idx",
                                       "experiment.rounds=5"});
    CHECK(c.cost.L == 7);
    CHECK(c.cost.delta == doctest::Approx(7.0 / 120.0));
    CHECK(c.selectors == std::vector<std::string>{"greedy", "random"});
    CHECK(c.training.dataset == "idx");
    CHECK(c.rounds == 5);

    CHECK(config_error("{}", {"cost.gamma=1"}).find("unknown") != std::string::npos);
    CHECK_FALSE(config_error("{}", {"costL=1"}).empty());
    CHECK_FALSE(config_error("{}", {"cost.L"}).empty());

    const auto explicit_delta = parse_config("{\"cost\": {\"delta\": 0.2}}");
    CHECK(explicit_delta.cost.delta == 0.2);
}

TEST_CASE("topology round trip")
{
    auto rng = Rng(9);
    PopulationConfig pc;
    pc.num_fc = 4;
    pc.num_sc = 7;
    Topology t{generate_population(pc, rng), generate_trust_graph(4, 7, 0.5, rng)};
    const auto back = topology_from_json(topology_to_json(t));
    CHECK(topology_to_json(back) == topology_to_json(t));
    CHECK(back.trust.num_fc() == 4);
    CHECK(back.trust.num_sc() == 7);
    for (int m = 0; m < 4; ++m) {
        for (int k = 0; k < 7; ++k) {
            CHECK(back.trust.weight(m, k) == t.trust.weight(m, k));
        }
    }

    TempDir dir("topology");
    save_topology(t, dir.path / "topo.json");
    CHECK(topology_to_json(load_topology(dir.path / "topo.json")) == topology_to_json(t));
}

TEST_CASE("topology schema errors")
{
    auto rng = Rng(10);
    PopulationConfig pc;
    pc.num_fc = 2;
    pc.num_sc = 3;
    const auto good = topology_to_json({generate_population(pc, rng), generate_trust_graph(2, 3, 0.5, rng)});

    auto missing = good;
    missing["clients"][1].erase("cpu_frequency");
    CHECK_THROWS_WITH_AS(topology_from_json(missing), doctest::Contains("cpu_frequency"), ConfigError);

    auto bad_tier = good;
    bad_tier["clients"][0]["tier"] = "XC";
    CHECK_THROWS_AS(topology_from_json(bad_tier), ConfigError);

    auto short_rows = good;
    short_rows["trust"]["weights"][0].erase(0);
    CHECK_THROWS_AS(topology_from_json(short_rows), ConfigError);

    CHECK_THROWS_AS(topology_from_json(nlohmann::json::object()), ConfigError);
}

TEST_CASE("decision validator")
{
    fixtures::Round r(3, 3);
    r.trust.set_weight(0, 0, 1.0);
    r.trust.set_weight(1, 0, 1.0);
    r.trust.set_weight(1, 1, 1.0);
    const auto ctx = r.context();
    ValidationRules rules;
    rules.max_selected = 2;

    CHECK(violation(r, decision_of(ctx, {{0, 0}, {1, 4}}), rules).empty());
    CHECK(violation(r, decision_of(ctx, {{0, 0}, {0, 3}}), rules).find("more than one client")
          != std::string::npos);
    CHECK(violation(r, decision_of(ctx, {{0, 3}, {1, 3}}), rules).find("more than one FC") != std::string::npos);
    CHECK(violation(r, decision_of(ctx, {{0, 0}, {1, 1}, {2, 2}}), rules).find("exceeds L") != std::string::npos);
    CHECK(violation(r, decision_of(ctx, {{2, 3}}), rules).find("candidate set") != std::string::npos);

    auto baseline = rules;
    baseline.first_order_only = true;
    CHECK(violation(r, decision_of(ctx, {{0, 3}}), baseline).find("tier") != std::string::npos);

    auto mismatched = decision_of(ctx, {{0, 0}});
    mismatched.costs.clear();
    CHECK_FALSE(violation(r, mismatched, rules).empty());

    auto bad_theta = decision_of(ctx, {{0, 0}});
    bad_theta.theta = 1.0;
    CHECK(violation(r, bad_theta, rules).find("theta") != std::string::npos);

    auto away = r;
    const auto d = decision_of(ctx, {{1, 4}});
    away.snapshot.available[4] = false;
    CHECK(violation(away, d, rules).find("unavailable") != std::string::npos);

    auto outage = r;
    auto outage_rules = rules;
    outage_rules.min_snr_db = 80.0;
    CHECK(violation(outage, d, outage_rules).find("outage") != std::string::npos);

    auto slow = r;
    slow.population[4].cpu_frequency = 1e6;
    CHECK(violation(slow, d, rules).find("straggler") != std::string::npos);
}

TEST_CASE("metrics csv")
{
    const auto header = metrics_header();
    CHECK(header.rfind(kMetricsSchema, 0) == 0);

    RoundRecord rec;
    rec.round = 3;
    rec.selector = "greedy";
    rec.alpha = {{0, 0}, {2, 5}};
    rec.queues = {0.5, 0.0};
    rec.participation = {1, 2};
    const auto row = metrics_row(rec);
    CHECK(row.rfind(std::string(kMetricsSchema) + ",3,greedy,", 0) == 0);
    CHECK(row.find("0:0;2:5") != std::string::npos);
    CHECK(std::count(row.begin(), row.end(), ',') == std::count(header.begin(), header.end(), ','));
}

TEST_CASE("zero rounds gives an empty body and null aggregates")
{
    TempDir dir("zero");
    auto c = small_config(0);
    const auto runs = run_experiment(c, dir.path);
    REQUIRE(runs.size() == 1);
    CHECK_FALSE(runs[0].time_avg_cost.has_value());

    const auto csv = slurp(dir.path / "metrics_socfedcs_1.csv");
    CHECK(csv == metrics_header() + "\n");
    const auto summary = nlohmann::json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["runs"][0]["time_avg_cost"].is_null());
    CHECK(summary["runs"][0]["final_accuracy"].is_null());
}

TEST_CASE("runs are byte-identical across repeats")
{
    TempDir a("repeat_a");
    TempDir b("repeat_b");
    auto c = small_config(40);
    c.selectors = {"socfedcs", "oort"};
    c.seeds = {3, 4};
    run_experiment(c, a.path);
    run_experiment(c, b.path);
    for (const char* name : {"metrics_socfedcs_3.csv", "metrics_oort_4.csv", "summary.json"}) {
        const auto first = slurp(a.path / name);
        CHECK_FALSE(first.empty());
        CHECK(first == slurp(b.path / name));
    }
}

TEST_CASE("output directory override")
{
    auto c = small_config(1);
    c.out_dir = "from_config";
    ::unsetenv("SOCFEDCS_OUT_DIR");
    CHECK(resolve_out_dir(c) == std::filesystem::path("from_config"));
    ::setenv("SOCFEDCS_OUT_DIR", "/tmp/elsewhere", 1);
    CHECK(resolve_out_dir(c) == std::filesystem::path("/tmp/elsewhere"));
    ::unsetenv("SOCFEDCS_OUT_DIR");
}

TEST_CASE("summaries")
{
    RunSummary one;
    one.selector = "greedy";
    one.time_avg_cost = 2.0;
    const std::vector<std::string> sel{"greedy"};
    auto rows = summarize(std::vector<RunSummary>{one}, 1, sel);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].cost_mean == 2.0);
    CHECK(rows[0].cost_stddev == 0.0);
    CHECK(rows[0].seeds == 1);

    RunSummary two = one;
    two.time_avg_cost = 4.0;
    rows = summarize(std::vector<RunSummary>{one, two}, 1, sel);
    CHECK(rows[0].cost_mean == 3.0);
    CHECK(rows[0].cost_stddev == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("compare shape")
{
    TempDir dir("compare");
    auto c = small_config(20);
    c.training.enabled = true;
    c.training.classes = 3;
    c.training.dim = 5;
    c.training.test_samples = 300;
    c.training.eval_every = 10;
    const std::vector<std::string> sel{"socfedcs", "greedy"};
    const std::vector<int> scenarios{1};
    const auto rows = compare(c, sel, scenarios, dir.path);
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.seeds == 1);
        CHECK(row.cost_mean > 0.0);
        CHECK(row.cost_stddev == 0.0);
        REQUIRE(row.accuracy_mean.has_value());
        CHECK(*row.accuracy_mean >= 0.0);
        CHECK(*row.accuracy_mean <= 1.0);
    }
    CHECK(std::filesystem::exists(dir.path / "comparison.csv"));
    CHECK(std::filesystem::exists(dir.path / "comparison.txt"));
    CHECK_THROWS_AS(compare(c, std::vector<std::string>{"greedy"}, scenarios, dir.path), ConfigError);
}

TEST_CASE("simulation invariants hold for every selector")
{
    auto c = small_config(60);
    c.training.enabled = true;
    c.training.classes = 3;
    c.training.dim = 5;
    c.training.test_samples = 200;
    for (auto kind : {SelectorKind::socfedcs, SelectorKind::random, SelectorKind::greedy, SelectorKind::powcs,
                      SelectorKind::fedcs, SelectorKind::oort}) {
        RunSummary s;
        const auto records = run_simulation(c, kind, 2, &s);
        CHECK(records.size() == 60);
        CHECK(s.drift_violations == 0);
        for (const auto& rec : records) {
            if (kind != SelectorKind::fedcs) {
                CHECK(rec.alpha.size() <= 3);
            }
            CHECK(rec.max_cost >= 0.0);
        }
        CHECK(s.final_accuracy.has_value());
    }
}
