#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shaml {

// The first 100 primes, 2..541; the a_p columns are fixed to these.
extern const std::array<int, 100> kApPrimes;

struct CurveExtras {
    long long adelic_level = 0;
    long long adelic_index = 0;
    long long adelic_genus = 0;
    long long kodaira_encoded = 0;
    friend bool operator==(const CurveExtras&, const CurveExtras&) = default;
};

// One elliptic curve's invariants. The five BSD features are optional so a
// record can carry partial information (e.g. a prediction target whose
// special value is not computable); required structure is checked by
// validate_record.
struct CurveRecord {
    std::string label;
    long long conductor = 0;
    int rank = 0;
    std::optional<long long> torsion_order;
    std::optional<double> real_period;
    std::optional<double> regulator;
    std::optional<long long> tamagawa_product;
    std::optional<double> special_value;
    std::optional<long long> sha_order;
    std::optional<std::vector<int>> ap_values;
    std::optional<CurveExtras> extras;

    friend bool operator==(const CurveRecord&, const CurveRecord&) = default;
};

struct Dataset {
    std::vector<CurveRecord> records;
    std::string source;
    int schema_version = 1;

    std::size_t size() const { return records.size(); }
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> reasons;
};

struct LoadResult {
    Dataset dataset;
    std::size_t rejected_rows = 0;
    std::vector<std::string> issues;
};

bool is_perfect_square(long long v);

// |Sha| = tors^2 * L / (Omega * Reg * prod c_p); no rounding.
double compute_sha_from_bsd(const CurveRecord& rec);

ValidationReport validate_record(const CurveRecord& rec, double tol = 1e-4);

// CSV ingestion. Rows failing validation are dropped and counted, not fatal.
LoadResult load_csv(const std::string& path, double tol = 1e-4);
void save_csv(const Dataset& ds, const std::string& path);
// metadata sidecar (source, seed, schema_version) next to the CSV
void save_dataset(const Dataset& ds, const std::string& path,
                  std::uint64_t seed = 0);

Dataset balanced_subset(const Dataset& ds, const std::string& class_field,
                        const std::vector<long long>& classes, std::uint64_t seed);

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec);

struct SynthOptions {
    // rank sampling weights for ranks 0..3
    std::array<double, 4> rank_weights{0.7, 0.2, 0.08, 0.02};
    bool with_ap = false;
};

// BSD-consistent generator: log-features drawn uniformly from fixed ranges,
// then the special value is set so the rearranged BSD identity holds exactly.
Dataset synthesize_dataset(std::size_t n, const std::map<long long, double>& class_spec,
                           std::uint64_t seed, const SynthOptions& opts = {});

// numeric field accessor by schema name ("rank", "real_period", ...);
// throws MissingFeature when the field is absent on the record.
double record_feature(const CurveRecord& rec, const std::string& name);
bool record_has_feature(const CurveRecord& rec, const std::string& name);

}  // namespace shaml
