#include "shaml/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shaml/errors.hpp"

namespace shaml {

std::uint64_t fnv1a_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

DatasetFingerprint fingerprint(const Dataset& ds) {
    // hash the canonical CSV serialization via a temp-free in-memory pass
    std::ostringstream os;
    for (const auto& r : ds.records) {
        os << r.label << "|" << r.conductor << "|" << r.rank << "|";
        auto put = [&os](auto opt) {
            if (opt) os << *opt;
            os << "|";
        };
        put(r.torsion_order);
        put(r.real_period);
        put(r.regulator);
        put(r.tamagawa_product);
        put(r.special_value);
        put(r.sha_order);
        if (r.ap_values)
            for (int a : *r.ap_values) os << a << ",";
        os << "\n";
    }
    DatasetFingerprint fp;
    fp.rows = ds.records.size();
    fp.content_hash = hex64(fnv1a_hash(os.str()));
    return fp;
}

std::string config_hash(const nlohmann::json& config) {
    return hex64(fnv1a_hash(config.dump()));
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["dataset"] = {{"rows", dataset.rows}, {"content_hash", dataset.content_hash}};
    j["tool_version"] = tool_version;
    j["metrics"] = metrics;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    m.experiment = j.at("experiment").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.dataset.rows = j.at("dataset").at("rows").get<std::size_t>();
    m.dataset.content_hash = j.at("dataset").at("content_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.metrics = j.at("metrics").get<std::map<std::string, double>>();
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    return m;
}

void RunManifest::save(const std::string& path) const {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << to_json().dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

}  // namespace shaml
