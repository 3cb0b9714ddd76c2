#include "socfedcs/population_io.hpp"

#include <fstream>
#include <string>

#include <fmt/format.h>

#include "socfedcs/errors.hpp"

namespace socfedcs {

namespace {

const char* tier_name(Tier tier)
{
    return tier == Tier::first_order ? "FC" : "SC";
}

template <class T>
T field(const nlohmann::json& obj, const char* key, std::size_t index)
{
    if (!obj.contains(key)) {
        throw ConfigError(fmt::format("clients[{}]: missing field '{}'", index, key));
    }
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("clients[{}].{}: {}", index, key, e.what()));
    }
}

} // namespace

nlohmann::json topology_to_json(const Topology& topology)
{
    nlohmann::json clients = nlohmann::json::array();
    for (const auto& c : topology.clients) {
        clients.push_back({
            {"id", c.id},
            {"tier", tier_name(c.tier)},
            {"transmit_power", c.transmit_power},
            {"cpu_frequency", c.cpu_frequency},
            {"cycles_per_sample", c.cycles_per_sample},
            {"num_samples", c.num_samples},
            {"model_size_bits", c.model_size_bits},
            {"capacitance", c.capacitance},
            {"zeta", c.zeta},
            {"weight_time", c.weight_time},
            {"weight_energy", c.weight_energy},
        });
    }
    const auto& trust = topology.trust;
    nlohmann::json rows = nlohmann::json::array();
    for (int m = 0; m < trust.num_fc(); ++m) {
        nlohmann::json row = nlohmann::json::array();
        for (int k = 0; k < trust.num_sc(); ++k) {
            row.push_back(trust.weight(m, k));
        }
        rows.push_back(std::move(row));
    }
    return {{"clients", std::move(clients)},
            {"trust", {{"m", trust.num_fc()}, {"k", trust.num_sc()}, {"weights", std::move(rows)}}}};
}

Topology topology_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("clients") || !doc.contains("trust")) {
        throw ConfigError("topology document needs 'clients' and 'trust'");
    }
    const auto& trust_doc = doc.at("trust");
    if (!trust_doc.contains("m") || !trust_doc.contains("k") || !trust_doc.contains("weights")) {
        throw ConfigError("trust needs 'm', 'k' and 'weights'");
    }
    const int num_fc = trust_doc.at("m").get<int>();
    const int num_sc = trust_doc.at("k").get<int>();
    const auto& rows = trust_doc.at("weights");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(num_fc)) {
        throw ConfigError(fmt::format("trust.weights must have {} rows", num_fc));
    }
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(num_fc) * static_cast<std::size_t>(num_sc));
    for (std::size_t m = 0; m < rows.size(); ++m) {
        if (!rows[m].is_array() || rows[m].size() != static_cast<std::size_t>(num_sc)) {
            throw ConfigError(fmt::format("trust.weights[{}] must have {} entries", m, num_sc));
        }
        for (const auto& w : rows[m]) {
            weights.push_back(w.get<double>());
        }
    }

    Topology topo;
    topo.trust = TrustGraph(num_fc, num_sc, std::move(weights));

    const auto& clients = doc.at("clients");
    if (!clients.is_array() || clients.size() != static_cast<std::size_t>(num_fc + num_sc)) {
        throw ConfigError(fmt::format("clients must list {} entries (m + k)", num_fc + num_sc));
    }
    for (std::size_t i = 0; i < clients.size(); ++i) {
        const auto& c = clients[i];
        ClientProfile p;
        p.id = field<int>(c, "id", i);
        if (p.id != static_cast<int>(i)) {
            throw ConfigError(fmt::format("clients[{}]: id {} out of order", i, p.id));
        }
        const auto tier = field<std::string>(c, "tier", i);
        if (tier != "FC" && tier != "SC") {
            throw ConfigError(fmt::format("clients[{}]: tier must be FC or SC, got '{}'", i, tier));
        }
        p.tier = tier == "FC" ? Tier::first_order : Tier::second_order;
        if ((p.tier == Tier::first_order) != (p.id < num_fc)) {
            throw ConfigError(fmt::format("clients[{}]: FCs must occupy ids [0, {})", i, num_fc));
        }
        p.transmit_power = field<double>(c, "transmit_power", i);
        p.cpu_frequency = field<double>(c, "cpu_frequency", i);
        p.cycles_per_sample = field<double>(c, "cycles_per_sample", i);
        p.num_samples = field<int>(c, "num_samples", i);
        p.model_size_bits = field<double>(c, "model_size_bits", i);
        p.capacitance = field<double>(c, "capacitance", i);
        p.zeta = field<double>(c, "zeta", i);
        p.weight_time = field<double>(c, "weight_time", i);
        p.weight_energy = field<double>(c, "weight_energy", i);
        validate_profile(p);
        topo.clients.push_back(p);
    }
    return topo;
}

void save_topology(const Topology& topology, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError(fmt::format("cannot write topology to {}", path.string()));
    }
    out << topology_to_json(topology).dump(2) << '\n';
}

Topology load_topology(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open topology {}", path.string()));
    }
    try {
        return topology_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

} // namespace socfedcs
