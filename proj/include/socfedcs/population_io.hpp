#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "socfedcs/network_model.hpp"

namespace socfedcs {

/// A pinned topology: client profiles plus the FC-SC trust matrix.
struct Topology {
    std::vector<ClientProfile> clients;
    TrustGraph trust;
};

/// Schema: {"clients": [{id, tier, transmit_power, ...}], "trust": {"m", "k", "weights": [[...]]}}.
nlohmann::json topology_to_json(const Topology& topology);

/// Throws ConfigError naming the offending field on any schema violation.
Topology topology_from_json(const nlohmann::json& doc);

void save_topology(const Topology& topology, const std::filesystem::path& path);
Topology load_topology(const std::filesystem::path& path);

} // namespace socfedcs
