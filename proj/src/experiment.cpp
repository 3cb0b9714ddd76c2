#include "socfedcs/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iterator>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

using nlohmann::json;

namespace {

template <class Range, class Fn>
std::string join(const Range& items, Fn fn)
{
    std::string out;
    bool first = true;
    for (const auto& item : items) {
        if (!first) {
            out += ';';
        }
        first = false;
        out += fn(item);
    }
    return out;
}

json opt(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

std::pair<double, double> mean_stddev(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / (n - 1.0))};
}

} // namespace

std::string metrics_header()
{
    return fmt::format("{},round,selector,max_cost,time_avg_cost,num_selected,selected_pairs,theta,objective,"
                       "queue_l1,conflicts,queues,participation,min_participation_rate,test_accuracy",
                       kMetricsSchema);
}

std::string metrics_row(const RoundRecord& r)
{
    const auto pairs = join(r.alpha, [](const Assignment& a) { return fmt::format("{}:{}", a.fc, a.client); });
    const auto queues = join(r.queues, [](double z) { return fmt::format("{}", z); });
    const auto part = join(r.participation, [](int c) { return fmt::format("{}", c); });
    const auto acc = r.test_accuracy ? fmt::format("{}", *r.test_accuracy) : std::string();
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", kMetricsSchema, r.round, r.selector,
                       r.max_cost, r.time_avg_cost, r.alpha.size(), pairs, r.theta, r.objective, r.queue_l1,
                       r.conflicts, queues, part, r.min_participation_rate, acc);
}

void write_metrics_csv(std::ostream& out, std::span<const RoundRecord> records)
{
    out << metrics_header() << '\n';
    for (const auto& r : records) {
        out << metrics_row(r) << '\n';
    }
}

json summary_to_json(const RunSummary& s)
{
    return {{"selector", s.selector},
            {"seed", s.seed},
            {"rounds", s.rounds},
            {"time_avg_cost", opt(s.time_avg_cost)},
            {"final_accuracy", opt(s.final_accuracy)},
            {"min_participation_rate", opt(s.min_participation_rate)},
            {"max_queue_ratio", opt(s.max_queue_ratio)},
            {"drift_violations", s.drift_violations},
            {"conflicts", s.total_conflicts},
            {"mean_selected", s.rounds > 0 ? json(s.mean_selected) : json(nullptr)}};
}

std::filesystem::path resolve_out_dir(const ExperimentConfig& config)
{
    if (const char* env = std::getenv("SOCFEDCS_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return config.out_dir;
}

std::vector<RunSummary> run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::vector<std::future<RunSummary>> jobs;
    for (const auto& name : config.selectors) {
        const SelectorKind kind = parse_selector(name);
        for (const auto seed : config.seeds) {
            jobs.push_back(std::async(std::launch::async, [&config, &out_dir, kind, seed] {
                RunSummary summary;
                const auto records = run_simulation(config, kind, seed, &summary);
                auto out = open_output(out_dir / fmt::format("metrics_{}_{}.csv", selector_name(kind), seed));
                write_metrics_csv(out, records);
                return summary;
            }));
        }
    }
    std::vector<RunSummary> summaries;
    std::exception_ptr first_error;
    for (auto& job : jobs) {
        try {
            summaries.push_back(job.get());
        } catch (...) {
            if (!first_error) {
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    json runs = json::array();
    for (const auto& s : summaries) {
        runs.push_back(summary_to_json(s));
    }
    auto out = open_output(out_dir / "summary.json");
    out << json{{"schema", "socfedcs.summary.v1"}, {"runs", runs}}.dump(2) << '\n';
    return summaries;
}

std::vector<ComparisonRow> summarize(std::span<const RunSummary> runs, int scenario,
                                     std::span<const std::string> selectors)
{
    std::vector<ComparisonRow> rows;
    for (const auto& name : selectors) {
        const auto canonical = selector_name(parse_selector(name));
        std::vector<double> costs;
        std::vector<double> accs;
        for (const auto& r : runs) {
            if (r.selector != canonical) {
                continue;
            }
            if (r.time_avg_cost) {
                costs.push_back(*r.time_avg_cost);
            }
            if (r.final_accuracy) {
                accs.push_back(*r.final_accuracy);
            }
        }
        ComparisonRow row;
        row.selector = std::string(canonical);
        row.scenario = scenario;
        row.seeds = static_cast<int>(costs.size());
        if (!costs.empty()) {
            std::tie(row.cost_mean, row.cost_stddev) = mean_stddev(costs);
        }
        if (!accs.empty()) {
            const auto [m, s] = mean_stddev(accs);
            row.accuracy_mean = m;
            row.accuracy_stddev = s;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows)
{
    out << "selector,scenario,seeds,cost_mean,cost_stddev,accuracy_mean,accuracy_stddev\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{},{}\n", r.selector, r.scenario, r.seeds, r.cost_mean, r.cost_stddev,
                           r.accuracy_mean ? fmt::format("{}", *r.accuracy_mean) : std::string(),
                           r.accuracy_stddev ? fmt::format("{}", *r.accuracy_stddev) : std::string());
    }
}

std::string format_comparison_table(std::span<const ComparisonRow> rows)
{
    std::string out = fmt::format("{:<10} {:>8} {:>6} {:>22} {:>22}\n", "selector", "scenario", "seeds", "cost",
                                  "accuracy (%)");
    for (const auto& r : rows) {
        const auto cost = fmt::format("{:.4f} ± {:.4f}", r.cost_mean, r.cost_stddev);
        const auto acc = r.accuracy_mean ? fmt::format("{:.2f} ± {:.2f}", 100.0 * *r.accuracy_mean,
                                                       100.0 * r.accuracy_stddev.value_or(0.0))
                                         : std::string("-");
        out += fmt::format("{:<10} {:>8} {:>6} {:>22} {:>22}\n", r.selector, r.scenario, r.seeds, cost, acc);
    }
    return out;
}

std::vector<ComparisonRow> compare(const ExperimentConfig& config, std::span<const std::string> selectors,
                                   std::span<const int> scenarios, const std::filesystem::path& out_dir)
{
    if (selectors.size() < 2) {
        throw ConfigError("compare needs at least two selectors");
    }
    std::vector<int> scenario_list(scenarios.begin(), scenarios.end());
    if (scenario_list.empty()) {
        scenario_list.push_back(config.training.scenario);
    }
    std::vector<ComparisonRow> rows;
    for (const int scenario : scenario_list) {
        ExperimentConfig c = config;
        c.selectors.assign(selectors.begin(), selectors.end());
        c.training.scenario = scenario;
        validate(c);
        const auto dir = scenario_list.size() > 1 ? out_dir / fmt::format("scenario_{}", scenario) : out_dir;
        const auto runs = run_experiment(c, dir);
        const auto part = summarize(runs, scenario, c.selectors);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::filesystem::create_directories(out_dir);
    auto csv = open_output(out_dir / "comparison.csv");
    write_comparison_csv(csv, rows);
    auto txt = open_output(out_dir / "comparison.txt");
    txt << format_comparison_table(rows);
    return rows;
}

} // namespace socfedcs
