#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "socfedcs/config.hpp"
#include "socfedcs/errors.hpp"
#include "socfedcs/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool paper_literal_noise = false;
};

void add_common(CLI::App* cmd, CommonArgs& args)
{
    cmd->add_option("--config", args.config_path, "experiment JSON")->required();
    cmd->add_option("--set", args.overrides, "override a config value, e.g. --set cost.V=20");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_flag("--paper-literal-noise", args.paper_literal_noise,
                  "noise fraction scale * (1 - share of total trust), without per-tier normalisation");
}

socfedcs::ExperimentConfig load(const CommonArgs& args, std::vector<std::string> extra)
{
    auto overrides = args.overrides;
    if (args.paper_literal_noise) {
        overrides.emplace_back("training.paper_literal_noise=true");
    }
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    return socfedcs::load_config(args.config_path, overrides);
}

std::filesystem::path out_dir(const CommonArgs& args, const socfedcs::ExperimentConfig& config)
{
    if (!args.out_dir.empty()) {
        return args.out_dir;
    }
    return socfedcs::resolve_out_dir(config);
}

std::string json_list(const std::vector<std::string>& names)
{
    return nlohmann::json(names).dump();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-tier federated learning client-selection simulator"};
    app.require_subcommand(1);

    CommonArgs run_args;
    std::vector<std::string> run_selectors;
    std::vector<std::uint64_t> run_seeds;
    auto* run = app.add_subcommand("run", "run one or more selectors over the configured seeds");
    add_common(run, run_args);
    run->add_option("--selector", run_selectors, "selector name(s)")->delimiter(',');
    run->add_option("--seeds", run_seeds, "comma-separated seeds")->delimiter(',');

    CommonArgs cmp_args;
    std::vector<std::string> cmp_selectors;
    std::vector<std::uint64_t> cmp_seeds;
    std::vector<int> cmp_scenarios;
    auto* cmp = app.add_subcommand("compare", "summarise several selectors over seeds");
    add_common(cmp, cmp_args);
    cmp->add_option("--selectors", cmp_selectors, "comma-separated selectors")->delimiter(',')->required();
    cmp->add_option("--seeds", cmp_seeds, "comma-separated seeds")->delimiter(',');
    cmp->add_option("--scenarios", cmp_scenarios, "comma-separated data scenarios (1, 2)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            std::vector<std::string> extra;
            if (!run_selectors.empty()) {
                extra.push_back("experiment.selectors=" + json_list(run_selectors));
            }
            if (!run_seeds.empty()) {
                extra.push_back("experiment.seeds=" + nlohmann::json(run_seeds).dump());
            }
            const auto config = load(run_args, extra);
            const auto dir = out_dir(run_args, config);
            const auto summaries = socfedcs::run_experiment(config, dir);
            for (const auto& s : summaries) {
                std::cout << fmt::format("{} seed {}: time-average cost {}, min participation {}\n", s.selector,
                                         s.seed, s.time_avg_cost ? fmt::format("{:.4f}", *s.time_avg_cost) : "n/a",
                                         s.min_participation_rate
                                             ? fmt::format("{:.4f}", *s.min_participation_rate)
                                             : "n/a");
            }
            std::cout << "wrote " << dir.string() << '\n';
        } else {
            std::vector<std::string> extra;
            if (!cmp_seeds.empty()) {
                extra.push_back("experiment.seeds=" + nlohmann::json(cmp_seeds).dump());
            }
            const auto config = load(cmp_args, extra);
            const auto dir = out_dir(cmp_args, config);
            const auto rows = socfedcs::compare(config, cmp_selectors, cmp_scenarios, dir);
            std::cout << socfedcs::format_comparison_table(rows);
            std::cout << "wrote " << dir.string() << '\n';
        }
    } catch (const socfedcs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const socfedcs::IdxFormatError& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return 2;
    } catch (const socfedcs::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
