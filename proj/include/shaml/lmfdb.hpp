#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "shaml/curvedata.hpp"

namespace shaml {

struct LmfdbQuery {
    std::optional<std::string> label;
    std::optional<long long> conductor_lt;
    std::optional<int> rank;
    std::optional<long long> sha_order;

    std::string canonical() const;  // stable string form, used for cache keys
};

// REST client for the LMFDB elliptic-curve API (ec_curvedata). Responses are
// cached on disk keyed by a hash of the canonical query; the cache directory
// comes from SHAML_CACHE_DIR (default ".shaml_cache").
class LmfdbClient {
public:
    explicit LmfdbClient(std::string base_url = "https://www.lmfdb.org",
                         std::optional<std::string> cache_dir = std::nullopt);

    // limit 0 raises EmptyResult; a query with no matches raises EmptyResult.
    Dataset fetch(const LmfdbQuery& query, std::size_t limit);

    // parses an ec_curvedata JSON payload ({"data":[...]}); exposed for tests
    static Dataset parse_response(const std::string& body, const std::string& source);

    static constexpr std::size_t kMaxLimit = 10000;

private:
    std::string base_url_;
    std::string cache_dir_;
};

}  // namespace shaml
