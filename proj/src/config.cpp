#include "socfedcs/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

using nlohmann::json;

json config_to_json(const ExperimentConfig& c)
{
    auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
    return {
        {"population",
         {{"num_fc", c.population.num_fc},
          {"num_sc", c.population.num_sc},
          {"power_pool", c.population.power_pool},
          {"cpu_pool", c.population.cpu_pool},
          {"samples_min", c.population.samples_min},
          {"samples_max", c.population.samples_max},
          {"cycles_min", c.population.cycles_min},
          {"cycles_max", c.population.cycles_max},
          {"model_size_bits", c.population.model_size_bits},
          {"capacitance", c.population.capacitance},
          {"zeta", c.population.zeta},
          {"weight_time", c.population.weight_time}}},
        {"trust",
         {{"edge_prob", c.trust_edge_prob},
          {"resample_each_round", c.resample_trust_each_round},
          {"topology", opt(c.topology_path)}}},
        {"mobility",
         {{"gm_memory", c.mobility.gm_memory},
          {"mean_speed", c.mobility.mean_speed},
          {"speed_stddev", c.mobility.speed_stddev},
          {"direction_stddev", c.mobility.direction_stddev},
          {"dt", c.mobility.dt},
          {"coverage_radius", c.mobility.coverage_radius},
          {"box_half_width", c.mobility.box_half_width},
          {"steer_to_server", c.mobility.steer_to_server}}},
        {"channel",
         {{"path_loss_exponent", c.snapshot.channel.path_loss_exponent},
          {"reference_distance", c.snapshot.channel.reference_distance},
          {"reference_gain", c.snapshot.channel.reference_gain},
          {"availability", c.snapshot.availability}}},
        {"cost",
         {{"bandwidth", c.cost.bandwidth},
          {"noise_density", c.cost.noise_density},
          {"sigma", c.cost.sigma},
          {"recommendation_cost", c.cost.recommendation_cost},
          {"V", c.cost.V},
          {"t_max_cmp", c.cost.t_max_cmp},
          {"L", c.cost.L},
          {"delta", c.cost.delta},
          {"min_snr_db", opt(c.cost.min_snr_db)}}},
        {"scheduler",
         {{"theta_init", c.scheduler.theta_init},
          {"max_alternations", c.scheduler.max_alternations},
          {"tolerance", c.scheduler.tolerance},
          {"theta_min", c.scheduler.theta_bounds.lo},
          {"theta_max", c.scheduler.theta_bounds.hi}}},
        {"sghs",
         {{"hms", c.sghs.hms},
          {"hmcr_mean", c.sghs.hmcr_mean},
          {"hmcr_stddev", c.sghs.hmcr_stddev},
          {"par_mean", c.sghs.par_mean},
          {"par_stddev", c.sghs.par_stddev},
          {"bw_max", opt(c.sghs.bw_max)},
          {"bw_min", c.sghs.bw_min},
          {"ni", c.sghs.ni},
          {"lp", c.sghs.lp}}},
        {"baselines",
         {{"theta", c.baselines.theta},
          {"candidate_set_size", opt(c.baselines.candidate_set_size)},
          {"deadline_s", c.baselines.deadline_s},
          {"exploit_fraction", c.baselines.exploit_fraction},
          {"preferred_round_time", c.baselines.preferred_round_time}}},
        {"training",
         {{"enabled", c.training.enabled},
          {"dataset", c.training.dataset},
          {"classes", c.training.classes},
          {"dim", c.training.dim},
          {"separation", c.training.separation},
          {"test_samples", c.training.test_samples},
          {"idx_train_images", c.training.idx_train_images},
          {"idx_train_labels", c.training.idx_train_labels},
          {"idx_test_images", c.training.idx_test_images},
          {"idx_test_labels", c.training.idx_test_labels},
          {"scenario", c.training.scenario},
          {"heterogeneity", c.training.heterogeneity},
          {"noise_scale", c.training.noise.scale},
          {"paper_literal_noise", c.training.noise.paper_literal},
          {"lr", c.training.params.lr},
          {"batch_size", c.training.params.batch_size},
          {"nu", c.training.params.nu},
          {"eval_every", c.training.eval_every}}},
        {"experiment",
         {{"rounds", c.rounds},
          {"seeds", c.seeds},
          {"selectors", c.selectors},
          {"out_dir", c.out_dir},
          {"check_invariants", c.check_invariants}}},
    };
}

json default_config_json()
{
    ExperimentConfig c;
    json doc = config_to_json(c);
    doc["cost"]["delta"] = nullptr; // derived as L / N unless given
    return doc;
}

namespace {

std::optional<int> line_of(std::string_view text, std::string_view section, std::string_view key)
{
    if (text.empty()) {
        return std::nullopt;
    }
    std::size_t pos = 0;
    for (std::string_view part : {section, key}) {
        if (part.empty()) {
            continue;
        }
        pos = text.find(fmt::format("\"{}\"", part), pos);
        if (pos == std::string_view::npos) {
            return std::nullopt;
        }
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
public:
    Reader(const json& doc, std::string_view text) : doc_(doc), text_(text) {}

    [[noreturn]] void fail(std::string_view section, std::string_view key, const std::string& what) const
    {
        const auto line = line_of(text_, section, key);
        const std::string where = key.empty() ? std::string(section) : fmt::format("{}.{}", section, key);
        if (line) {
            throw ConfigError(fmt::format("line {}: {}: {}", *line, where, what));
        }
        throw ConfigError(fmt::format("{}: {}", where, what));
    }

    void check_known_keys(const json& schema) const
    {
        if (!doc_.is_object()) {
            throw ConfigError("config must be a JSON object");
        }
        for (const auto& [section, body] : doc_.items()) {
            if (!schema.contains(section)) {
                fail(section, "", "unknown section");
            }
            if (!body.is_object()) {
                fail(section, "", "section must be an object");
            }
            for (const auto& [key, value] : body.items()) {
                if (!schema.at(section).contains(key)) {
                    fail(section, key, "unknown key");
                }
            }
        }
    }

    template <class T>
    void read(const char* section, const char* key, T& out) const
    {
        const json* v = find(section, key);
        if (v == nullptr) {
            return;
        }
        if constexpr (std::is_same_v<T, bool>) {
            if (!v->is_boolean()) fail(section, key, "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v->is_string()) fail(section, key, "expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v->is_number_integer()) fail(section, key, "expected an integer");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v->is_number()) fail(section, key, "expected a number");
        }
        try {
            out = v->get<T>();
        } catch (const json::exception& e) {
            fail(section, key, e.what());
        }
    }

    template <class T>
    void read_optional(const char* section, const char* key, std::optional<T>& out) const
    {
        const json* v = find(section, key);
        if (v == nullptr) {
            return;
        }
        if (v->is_null()) {
            out.reset();
            return;
        }
        T value{};
        read(section, key, value);
        out = value;
    }

    bool has_non_null(const char* section, const char* key) const
    {
        const json* v = find(section, key);
        return v != nullptr && !v->is_null();
    }

private:
    const json* find(const char* section, const char* key) const
    {
        if (!doc_.contains(section) || !doc_.at(section).contains(key)) {
            return nullptr;
        }
        return &doc_.at(section).at(key);
    }

    const json& doc_;
    std::string_view text_;
};

} // namespace

ExperimentConfig config_from_json(const json& doc, std::string_view source_text)
{
    const Reader r(doc, source_text);
    r.check_known_keys(default_config_json());

    ExperimentConfig c;
    r.read("population", "num_fc", c.population.num_fc);
    r.read("population", "num_sc", c.population.num_sc);
    r.read("population", "power_pool", c.population.power_pool);
    r.read("population", "cpu_pool", c.population.cpu_pool);
    r.read("population", "samples_min", c.population.samples_min);
    r.read("population", "samples_max", c.population.samples_max);
    r.read("population", "cycles_min", c.population.cycles_min);
    r.read("population", "cycles_max", c.population.cycles_max);
    r.read("population", "model_size_bits", c.population.model_size_bits);
    r.read("population", "capacitance", c.population.capacitance);
    r.read("population", "zeta", c.population.zeta);
    r.read("population", "weight_time", c.population.weight_time);

    r.read("trust", "edge_prob", c.trust_edge_prob);
    r.read("trust", "resample_each_round", c.resample_trust_each_round);
    r.read_optional("trust", "topology", c.topology_path);

    r.read("mobility", "gm_memory", c.mobility.gm_memory);
    r.read("mobility", "mean_speed", c.mobility.mean_speed);
    r.read("mobility", "speed_stddev", c.mobility.speed_stddev);
    r.read("mobility", "direction_stddev", c.mobility.direction_stddev);
    r.read("mobility", "dt", c.mobility.dt);
    r.read("mobility", "coverage_radius", c.mobility.coverage_radius);
    r.read("mobility", "box_half_width", c.mobility.box_half_width);
    r.read("mobility", "steer_to_server", c.mobility.steer_to_server);
    c.snapshot.coverage_radius = c.mobility.coverage_radius;

    r.read("channel", "path_loss_exponent", c.snapshot.channel.path_loss_exponent);
    r.read("channel", "reference_distance", c.snapshot.channel.reference_distance);
    r.read("channel", "reference_gain", c.snapshot.channel.reference_gain);
    r.read("channel", "availability", c.snapshot.availability);

    r.read("cost", "bandwidth", c.cost.bandwidth);
    r.read("cost", "noise_density", c.cost.noise_density);
    r.read("cost", "sigma", c.cost.sigma);
    r.read("cost", "recommendation_cost", c.cost.recommendation_cost);
    r.read("cost", "V", c.cost.V);
    r.read("cost", "t_max_cmp", c.cost.t_max_cmp);
    r.read("cost", "L", c.cost.L);
    if (r.has_non_null("cost", "delta")) {
        r.read("cost", "delta", c.cost.delta);
    } else {
        c.cost.delta = CostParams::participation_target(c.cost.L, c.num_clients());
    }

    r.read_optional("cost", "min_snr_db", c.cost.min_snr_db);

    r.read("scheduler", "theta_init", c.scheduler.theta_init);
    r.read("scheduler", "max_alternations", c.scheduler.max_alternations);
    r.read("scheduler", "tolerance", c.scheduler.tolerance);
    r.read("scheduler", "theta_min", c.scheduler.theta_bounds.lo);
    r.read("scheduler", "theta_max", c.scheduler.theta_bounds.hi);

    r.read("sghs", "hms", c.sghs.hms);
    r.read("sghs", "hmcr_mean", c.sghs.hmcr_mean);
    r.read("sghs", "hmcr_stddev", c.sghs.hmcr_stddev);
    r.read("sghs", "par_mean", c.sghs.par_mean);
    r.read("sghs", "par_stddev", c.sghs.par_stddev);
    r.read_optional("sghs", "bw_max", c.sghs.bw_max);
    r.read("sghs", "bw_min", c.sghs.bw_min);
    r.read("sghs", "ni", c.sghs.ni);
    r.read("sghs", "lp", c.sghs.lp);

    r.read("baselines", "theta", c.baselines.theta);
    r.read_optional("baselines", "candidate_set_size", c.baselines.candidate_set_size);
    r.read("baselines", "deadline_s", c.baselines.deadline_s);
    r.read("baselines", "exploit_fraction", c.baselines.exploit_fraction);
    r.read("baselines", "preferred_round_time", c.baselines.preferred_round_time);

    r.read("training", "enabled", c.training.enabled);
    r.read("training", "dataset", c.training.dataset);
    r.read("training", "classes", c.training.classes);
    r.read("training", "dim", c.training.dim);
    r.read("training", "separation", c.training.separation);
    r.read("training", "test_samples", c.training.test_samples);
    r.read("training", "idx_train_images", c.training.idx_train_images);
    r.read("training", "idx_train_labels", c.training.idx_train_labels);
    r.read("training", "idx_test_images", c.training.idx_test_images);
    r.read("training", "idx_test_labels", c.training.idx_test_labels);
    r.read("training", "scenario", c.training.scenario);
    r.read("training", "heterogeneity", c.training.heterogeneity);
    r.read("training", "noise_scale", c.training.noise.scale);
    r.read("training", "paper_literal_noise", c.training.noise.paper_literal);
    r.read("training", "lr", c.training.params.lr);
    r.read("training", "batch_size", c.training.params.batch_size);
    r.read("training", "nu", c.training.params.nu);
    r.read("training", "eval_every", c.training.eval_every);

    r.read("experiment", "rounds", c.rounds);
    r.read("experiment", "seeds", c.seeds);
    r.read("experiment", "selectors", c.selectors);
    r.read("experiment", "out_dir", c.out_dir);
    r.read("experiment", "check_invariants", c.check_invariants);

    validate(c);
    return c;
}

void apply_override(json& doc, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("--set expects key=value, got '{}'", assignment));
    }
    const std::string path(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos || path.find('.', dot + 1) != std::string::npos) {
        throw ConfigError(fmt::format("--set key must look like section.key, got '{}'", path));
    }
    const std::string section = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    const json schema = default_config_json();
    if (!schema.contains(section) || !schema.at(section).contains(key)) {
        throw ConfigError(fmt::format("--set {}: unknown config key", path));
    }
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    doc[section][key] = std::move(value);
}

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" in what().
        throw ConfigError(fmt::format("config syntax error: {}", e.what()));
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return config_from_json(doc, text);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config '{}'", path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str(), overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path, e.what()));
    }
}

void validate(const ExperimentConfig& c)
{
    if (c.population.num_fc <= 0 || c.population.num_sc < c.population.num_fc) {
        throw ConfigError(fmt::format("population: need 0 < num_fc <= num_sc, got {} and {}", c.population.num_fc,
                                      c.population.num_sc));
    }
    if (!(c.trust_edge_prob >= 0.0 && c.trust_edge_prob <= 1.0)) {
        throw ConfigError("trust.edge_prob must lie in [0,1]");
    }
    if (!(c.mobility.gm_memory >= 0.0 && c.mobility.gm_memory <= 1.0) || !(c.mobility.dt > 0.0)
        || !(c.mobility.coverage_radius > 0.0) || c.mobility.speed_stddev < 0.0 || c.mobility.direction_stddev < 0.0) {
        throw ConfigError("mobility: need gm_memory in [0,1], dt > 0, coverage_radius > 0, stddevs >= 0");
    }
    if (!(c.snapshot.availability >= 0.0 && c.snapshot.availability <= 1.0)) {
        throw ConfigError("channel.availability must lie in [0,1]");
    }
    if (!(c.snapshot.channel.reference_gain > 0.0) || !(c.snapshot.channel.reference_distance > 0.0)
        || !(c.snapshot.channel.path_loss_exponent > 0.0)) {
        throw ConfigError("channel: gain, reference distance and exponent must be positive");
    }
    validate(c.cost);
    if (c.cost.L > c.population.num_fc + c.population.num_sc) {
        throw ConfigError("cost.L cannot exceed the population size");
    }
    const auto& b = c.scheduler.theta_bounds;
    if (!(b.lo >= kThetaMin && b.hi <= kThetaMax && b.lo < b.hi)) {
        throw ConfigError(fmt::format("scheduler: theta bounds must satisfy {} <= min < max <= {}", kThetaMin,
                                      kThetaMax));
    }
    if (!(c.scheduler.theta_init > 0.0 && c.scheduler.theta_init < 1.0) || c.scheduler.max_alternations < 0
        || !(c.scheduler.tolerance >= 0.0)) {
        throw ConfigError("scheduler: theta_init in (0,1), max_alternations >= 0, tolerance >= 0 required");
    }
    validate(c.sghs, b.lo, b.hi);
    validate(c.baselines, c.population.num_fc, c.cost.L);
    const auto& t = c.training;
    if (t.dataset != "synthetic" && t.dataset != "idx") {
        throw ConfigError(fmt::format("training.dataset must be 'synthetic' or 'idx', got '{}'", t.dataset));
    }
    if (t.scenario != 1 && t.scenario != 2) {
        throw ConfigError(fmt::format("training.scenario must be 1 or 2, got {}", t.scenario));
    }
    if (!(t.heterogeneity >= 0.0 && t.heterogeneity <= 1.0) || !(t.noise.scale >= 0.0 && t.noise.scale <= 1.0)) {
        throw ConfigError("training: heterogeneity and noise_scale must lie in [0,1]");
    }
    if (t.classes < 2 || t.dim < 1 || t.test_samples < 1 || t.params.batch_size < 1 || !(t.params.lr >= 0.0)
        || !(t.params.nu > 0.0) || t.eval_every < 1) {
        throw ConfigError("training: classes >= 2, dim >= 1, test_samples >= 1, batch_size >= 1, lr >= 0, nu > 0, "
                          "eval_every >= 1 required");
    }
    if (c.rounds < 0) {
        throw ConfigError("experiment.rounds must be >= 0");
    }
    if (c.seeds.empty()) {
        throw ConfigError("experiment.seeds must be non-empty");
    }
    if (c.selectors.empty()) {
        throw ConfigError("experiment.selectors must be non-empty");
    }
    for (const auto& s : c.selectors) {
        parse_selector(s);
    }
}

} // namespace socfedcs
