#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "shaml/curvedata.hpp"

namespace shaml {

inline constexpr const char* kToolVersion = "shaml 0.1.0";

std::uint64_t fnv1a_hash(const std::string& bytes);
std::string hex64(std::uint64_t v);

struct DatasetFingerprint {
    std::size_t rows = 0;
    std::string content_hash;  // hex FNV-1a of the canonical CSV serialization

    friend bool operator==(const DatasetFingerprint&, const DatasetFingerprint&) = default;
};

DatasetFingerprint fingerprint(const Dataset& ds);

// One manifest per experiment run: enough to re-execute the run and to check
// that a re-execution reproduced every reported metric.
struct RunManifest {
    std::string experiment;
    std::string config_hash;  // hex FNV-1a of the canonical config JSON
    std::uint64_t seed = 0;
    DatasetFingerprint dataset;
    std::string tool_version = kToolVersion;
    std::map<std::string, double> metrics;
    std::string started_at;   // ISO-8601 UTC
    std::string finished_at;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

std::string config_hash(const nlohmann::json& config);
std::string iso8601_now();

}  // namespace shaml
