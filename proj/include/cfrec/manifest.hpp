#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace cfrec {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every command's outputs. Contains no
/// timestamps or host data, so reruns with identical inputs are
/// byte-identical.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::uint64_t config_hash = 0;          // FNV-1a of the effective config JSON
    std::string dataset_fingerprint;        // "size:fnv64" of the primary input
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> artifacts;     // files this run wrote

    nlohmann::json to_json() const;
    void write(const std::string& path) const;
};

}  // namespace cfrec
