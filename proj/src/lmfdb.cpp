#include "shaml/lmfdb.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "shaml/http.hpp"

#include "shaml/errors.hpp"

namespace shaml {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double json_number(const nlohmann::json& rec, const char* field) {
    if (!rec.contains(field))
        throw SchemaDrift(std::string("missing field '") + field + "'");
    const auto& v = rec.at(field);
    if (v.is_string()) return std::stod(v.get<std::string>());
    return v.get<double>();
}

}  // namespace

std::string LmfdbQuery::canonical() const {
    std::ostringstream os;
    if (label) os << "label=" << *label << ";";
    if (conductor_lt) os << "conductor<" << *conductor_lt << ";";
    if (rank) os << "rank=" << *rank << ";";
    if (sha_order) os << "sha=" << *sha_order << ";";
    return os.str();
}

LmfdbClient::LmfdbClient(std::string base_url, std::optional<std::string> cache_dir)
    : base_url_(std::move(base_url)) {
    if (cache_dir) {
        cache_dir_ = *cache_dir;
    } else if (const char* env = std::getenv("SHAML_CACHE_DIR")) {
        cache_dir_ = env;
    } else {
        cache_dir_ = ".shaml_cache";
    }
}

Dataset LmfdbClient::parse_response(const std::string& body, const std::string& source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaDrift(std::string("response is not valid JSON: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array())
        throw SchemaDrift("missing 'data' array");

    Dataset ds;
    ds.source = source;
    for (const auto& j : doc["data"]) {
        CurveRecord rec;
        if (!j.contains("lmfdb_label")) throw SchemaDrift("missing field 'lmfdb_label'");
        rec.label = j.at("lmfdb_label").get<std::string>();
        rec.conductor = static_cast<long long>(json_number(j, "conductor"));
        rec.rank = static_cast<int>(json_number(j, "rank"));
        rec.torsion_order = static_cast<long long>(json_number(j, "torsion"));
        rec.real_period = json_number(j, "real_period");
        rec.regulator = json_number(j, "regulator");
        rec.tamagawa_product = static_cast<long long>(json_number(j, "tamagawa_product"));
        rec.special_value = json_number(j, "special_value");
        if (j.contains("sha") && !j.at("sha").is_null())
            rec.sha_order = static_cast<long long>(json_number(j, "sha"));
        const auto rep = validate_record(rec);
        if (!rep.pass)
            throw InvariantViolation("LMFDB record " + rec.label + ": " + rep.reasons.front());
        if (rec.rank == 0 && rec.regulator) rec.regulator = 1.0;
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

Dataset LmfdbClient::fetch(const LmfdbQuery& query, std::size_t limit) {
    if (limit == 0) throw EmptyResult("limit 0");
    if (limit > kMaxLimit)
        throw ConfigError("limit exceeds configured cap " + std::to_string(kMaxLimit));

    const std::string key = query.canonical() + "limit=" + std::to_string(limit);
    std::filesystem::create_directories(cache_dir_);
    const std::string cache_file =
        cache_dir_ + "/lmfdb_" + std::to_string(fnv1a(key)) + ".json";

    std::string body;
    if (std::filesystem::exists(cache_file)) {
        std::ifstream in(cache_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        body = ss.str();
    } else {
        std::ostringstream path;
        path << "/api/ec_curvedata/?_format=json&_limit=" << limit
             << "&_fields=lmfdb_label,conductor,rank,torsion,real_period,regulator,"
                "tamagawa_product,special_value,sha";
        if (query.label) path << "&lmfdb_label=" << *query.label;
        if (query.conductor_lt) path << "&conductor=lt" << *query.conductor_lt;
        if (query.rank) path << "&rank=" << *query.rank;
        if (query.sha_order) path << "&sha=" << *query.sha_order;

        httplib::Client cli(base_url_);
        cli.set_connection_timeout(10);
        cli.set_read_timeout(30);
        auto res = cli.Get(path.str());
        if (!res)
            throw NetworkError("no response from " + base_url_ + " (" +
                               httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw NetworkError("HTTP " + std::to_string(res->status) + " from " + base_url_);
        body = res->body;
        std::ofstream out(cache_file);
        out << body;
    }

    Dataset ds = parse_response(body, "api query " + key);
    if (ds.records.empty()) throw EmptyResult(key);

    // the API treats filters server-side, but enforce them here too
    std::erase_if(ds.records, [&](const CurveRecord& r) {
        if (query.label && r.label != *query.label) return true;
        if (query.conductor_lt && !(r.conductor < *query.conductor_lt)) return true;
        if (query.rank && r.rank != *query.rank) return true;
        if (query.sha_order && r.sha_order != *query.sha_order) return true;
        return false;
    });
    if (ds.records.empty()) throw EmptyResult(key);
    if (ds.records.size() > limit) ds.records.resize(limit);
    return ds;
}

}  // namespace shaml
