#include "shaml/curvedata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "shaml/errors.hpp"
#include "shaml/rng.hpp"

namespace shaml {

const std::array<int, 100> kApPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,
    53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113,
    127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197,
    199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281,
    283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379,
    383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463,
    467, 479, 487, 491, 499, 503, 509, 521, 523, 541};

bool is_perfect_square(long long v) {
    if (v < 1) return false;
    const long long r = std::llround(std::sqrt(static_cast<double>(v)));
    for (long long c = std::max(0LL, r - 1); c <= r + 1; ++c)
        if (c * c == v) return true;
    return false;
}

double compute_sha_from_bsd(const CurveRecord& rec) {
    if (!rec.torsion_order || !rec.real_period || !rec.regulator ||
        !rec.tamagawa_product || !rec.special_value) {
        throw MissingFeature("compute_sha_from_bsd needs all five BSD features (" +
                             rec.label + ")");
    }
    const double tors = static_cast<double>(*rec.torsion_order);
    const double omega = *rec.real_period;
    const double reg = *rec.regulator;
    const double tam = static_cast<double>(*rec.tamagawa_product);
    const double lval = *rec.special_value;
    if (tors <= 0 || omega <= 0 || reg <= 0 || tam <= 0 || lval <= 0)
        throw NonPositiveFeature("BSD feature <= 0 on " + rec.label);
    return tors * tors * lval / (omega * reg * tam);
}

ValidationReport validate_record(const CurveRecord& rec, double tol) {
    ValidationReport rep;
    auto fail = [&](const std::string& why) {
        rep.pass = false;
        rep.reasons.push_back(why);
    };
    if (rec.label.empty()) fail("empty label");
    if (rec.conductor < 1) fail("conductor must be positive");
    if (rec.rank < 0) fail("rank must be non-negative");
    if (rec.torsion_order && *rec.torsion_order < 1) fail("torsion_order < 1");
    if (rec.tamagawa_product && *rec.tamagawa_product < 1) fail("tamagawa_product < 1");
    if (rec.real_period && *rec.real_period <= 0) fail("real_period <= 0");
    if (rec.special_value && *rec.special_value <= 0) fail("special_value <= 0");
    if (rec.regulator) {
        if (*rec.regulator <= 0) fail("regulator <= 0");
        if (rec.rank == 0 && std::fabs(*rec.regulator - 1.0) > 1e-12)
            fail("rank 0 requires regulator 1");
    }
    if (rec.sha_order && !is_perfect_square(*rec.sha_order))
        fail("sha_order " + std::to_string(*rec.sha_order) + " is not a perfect square");
    if (rec.ap_values && rec.ap_values->size() != kApPrimes.size())
        fail("ap_values must have exactly 100 entries");

    if (rep.pass && rec.sha_order && rec.torsion_order && rec.real_period &&
        rec.regulator && rec.tamagawa_product && rec.special_value) {
        const double computed = compute_sha_from_bsd(rec);
        const double ref = static_cast<double>(*rec.sha_order);
        if (std::fabs(computed - ref) / ref > tol)
            fail("BSD inconsistency: computed |Sha| = " + std::to_string(computed) +
                 ", stored " + std::to_string(*rec.sha_order));
    }
    return rep;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    double v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("row " + std::to_string(row) + ", column " + col + ": '" + s + "'");
    return v;
}

long long parse_ll(const std::string& s, std::size_t row, const std::string& col) {
    long long v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("row " + std::to_string(row) + ", column " + col + ": '" + s + "'");
    return v;
}

const std::vector<std::string> kRequiredColumns = {
    "label",     "conductor",        "rank",          "torsion_order", "real_period",
    "regulator", "tamagawa_product", "special_value", "sha_order"};

const std::vector<std::string> kExtrasColumns = {"adelic_level", "adelic_index",
                                                 "adelic_genus", "kodaira_encoded"};

}  // namespace

LoadResult load_csv(const std::string& path, double tol) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty file " + path);
    const auto header = split_line(line);

    for (std::size_t i = 0; i < kRequiredColumns.size(); ++i) {
        if (i >= header.size() || header[i] != kRequiredColumns[i])
            throw MissingColumn(kRequiredColumns[i] + " (expected at position " +
                                std::to_string(i) + " in " + path + ")");
    }
    std::size_t pos = kRequiredColumns.size();
    bool has_ap = false;
    if (pos < header.size() && header[pos] == "ap_2") {
        for (std::size_t k = 0; k < kApPrimes.size(); ++k) {
            const std::string want = "ap_" + std::to_string(kApPrimes[k]);
            if (pos + k >= header.size() || header[pos + k] != want)
                throw MissingColumn(want + " (a_p group must be complete)");
        }
        has_ap = true;
        pos += kApPrimes.size();
    }
    bool has_extras = false;
    if (pos < header.size()) {
        for (std::size_t k = 0; k < kExtrasColumns.size(); ++k) {
            if (pos + k >= header.size() || header[pos + k] != kExtrasColumns[k])
                throw MissingColumn(kExtrasColumns[k] + " (extras group must be complete)");
        }
        has_extras = true;
        pos += kExtrasColumns.size();
    }
    if (pos != header.size())
        throw MissingColumn("unexpected trailing columns in " + path);

    LoadResult result;
    result.dataset.source = path;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        try {
            if (cells.size() != header.size())
                throw ParseError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));
            CurveRecord rec;
            rec.label = cells[0];
            rec.conductor = parse_ll(cells[1], row, "conductor");
            rec.rank = static_cast<int>(parse_ll(cells[2], row, "rank"));
            if (!cells[3].empty()) rec.torsion_order = parse_ll(cells[3], row, "torsion_order");
            if (!cells[4].empty()) rec.real_period = parse_double(cells[4], row, "real_period");
            if (!cells[5].empty()) rec.regulator = parse_double(cells[5], row, "regulator");
            if (!cells[6].empty())
                rec.tamagawa_product = parse_ll(cells[6], row, "tamagawa_product");
            if (!cells[7].empty()) rec.special_value = parse_double(cells[7], row, "special_value");
            if (!cells[8].empty()) rec.sha_order = parse_ll(cells[8], row, "sha_order");
            std::size_t c = 9;
            if (has_ap) {
                bool any = false;
                std::vector<int> ap(kApPrimes.size(), 0);
                for (std::size_t k = 0; k < kApPrimes.size(); ++k) {
                    const std::string& cell = cells[c + k];
                    if (!cell.empty()) {
                        any = true;
                        ap[k] = static_cast<int>(
                            parse_ll(cell, row, "ap_" + std::to_string(kApPrimes[k])));
                    }
                }
                if (any) rec.ap_values = std::move(ap);
                c += kApPrimes.size();
            }
            if (has_extras) {
                if (!cells[c].empty() || !cells[c + 1].empty() || !cells[c + 2].empty() ||
                    !cells[c + 3].empty()) {
                    CurveExtras ex;
                    ex.adelic_level = parse_ll(cells[c], row, "adelic_level");
                    ex.adelic_index = parse_ll(cells[c + 1], row, "adelic_index");
                    ex.adelic_genus = parse_ll(cells[c + 2], row, "adelic_genus");
                    ex.kodaira_encoded = parse_ll(cells[c + 3], row, "kodaira_encoded");
                    rec.extras = ex;
                }
            }
            const auto rep = validate_record(rec, tol);
            if (!rep.pass)
                throw InvariantViolation("row " + std::to_string(row) + " (" + rec.label +
                                         "): " + rep.reasons.front());
            // snap rank-0 regulators to exactly 1 once validated
            if (rec.rank == 0 && rec.regulator) rec.regulator = 1.0;
            result.dataset.records.push_back(std::move(rec));
        } catch (const Error& e) {
            ++result.rejected_rows;
            result.issues.push_back(e.what());
        }
    }
    // labels unique within a dataset
    std::vector<std::string> labels;
    labels.reserve(result.dataset.records.size());
    for (const auto& r : result.dataset.records) labels.push_back(r.label);
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end())
        throw InvariantViolation("duplicate labels in " + path);
    return result;
}

void save_csv(const Dataset& ds, const std::string& path) {
    const bool has_ap =
        std::any_of(ds.records.begin(), ds.records.end(),
                    [](const CurveRecord& r) { return r.ap_values.has_value(); });
    const bool has_extras =
        std::any_of(ds.records.begin(), ds.records.end(),
                    [](const CurveRecord& r) { return r.extras.has_value(); });

    std::ofstream out(path);
    if (!out) throw ParseError("cannot write " + path);
    for (std::size_t i = 0; i < kRequiredColumns.size(); ++i)
        out << (i ? "," : "") << kRequiredColumns[i];
    if (has_ap)
        for (int p : kApPrimes) out << ",ap_" << p;
    if (has_extras)
        for (const auto& c : kExtrasColumns) out << "," << c;
    out << "\n";

    for (const auto& r : ds.records) {
        out << r.label << "," << r.conductor << "," << r.rank << ",";
        if (r.torsion_order) out << *r.torsion_order;
        out << ",";
        if (r.real_period) out << format_double(*r.real_period);
        out << ",";
        if (r.regulator) out << format_double(*r.regulator);
        out << ",";
        if (r.tamagawa_product) out << *r.tamagawa_product;
        out << ",";
        if (r.special_value) out << format_double(*r.special_value);
        out << ",";
        if (r.sha_order) out << *r.sha_order;
        if (has_ap) {
            if (r.ap_values)
                for (int a : *r.ap_values) out << "," << a;
            else
                for (std::size_t k = 0; k < kApPrimes.size(); ++k) out << ",";
        }
        if (has_extras) {
            if (r.extras)
                out << "," << r.extras->adelic_level << "," << r.extras->adelic_index << ","
                    << r.extras->adelic_genus << "," << r.extras->kodaira_encoded;
            else
                out << ",,,,";
        }
        out << "\n";
    }
}

void save_dataset(const Dataset& ds, const std::string& path, std::uint64_t seed) {
    save_csv(ds, path);
    nlohmann::json meta;
    meta["source"] = ds.source;
    meta["seed"] = seed;
    meta["schema_version"] = ds.schema_version;
    meta["rows"] = ds.records.size();
    std::ofstream out(path + ".meta.json");
    out << meta.dump(2) << "\n";
}

namespace {

long long class_value(const CurveRecord& r, const std::string& field) {
    if (field == "sha_order") {
        if (!r.sha_order) throw MissingFeature("sha_order absent on " + r.label);
        return *r.sha_order;
    }
    if (field == "rank") return r.rank;
    throw UnknownFeature("balanced_subset class field '" + field + "'");
}

}  // namespace

Dataset balanced_subset(const Dataset& ds, const std::string& class_field,
                        const std::vector<long long>& classes, std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> buckets(classes.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const long long v = class_value(ds.records[i], class_field);
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (classes[c] == v) buckets[c].push_back(i);
    }
    std::size_t m = SIZE_MAX;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        if (buckets[c].empty())
            throw EmptyClass(class_field + " = " + std::to_string(classes[c]));
        m = std::min(m, buckets[c].size());
    }
    Rng rng(seed);
    std::vector<std::size_t> chosen;
    for (auto& b : buckets) {
        rng.shuffle(b);
        chosen.insert(chosen.end(), b.begin(), b.begin() + static_cast<std::ptrdiff_t>(m));
    }
    std::sort(chosen.begin(), chosen.end());
    Dataset out;
    out.source = ds.source + " [balanced " + class_field + "]";
    out.schema_version = ds.schema_version;
    for (std::size_t i : chosen) out.records.push_back(ds.records[i]);
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, const SplitSpec& spec) {
    const std::size_t n = ds.records.size();
    if (n < 2) throw DegenerateSplit("dataset size < 2");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(idx);
    const auto n_test =
        static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
    if (n_test == 0 || n_test == n) throw DegenerateSplit("empty train or test side");
    Dataset train, test;
    train.source = ds.source + " [train]";
    test.source = ds.source + " [test]";
    train.schema_version = test.schema_version = ds.schema_version;
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_test)
            test.records.push_back(ds.records[idx[i]]);
        else
            train.records.push_back(ds.records[idx[i]]);
    }
    return {std::move(train), std::move(test)};
}

Dataset synthesize_dataset(std::size_t n, const std::map<long long, double>& class_spec,
                           std::uint64_t seed, const SynthOptions& opts) {
    if (n < 1 || class_spec.empty()) throw InvalidClassSpec("need n >= 1 and a class spec");
    double total_w = 0.0;
    for (const auto& [sha, w] : class_spec) {
        if (!is_perfect_square(sha))
            throw InvalidClassSpec(std::to_string(sha) + " is not a perfect square");
        if (w < 0) throw InvalidClassSpec("negative weight");
        total_w += w;
    }
    if (total_w <= 0) throw InvalidClassSpec("zero total weight");

    // largest-remainder apportionment of n over the classes
    std::vector<long long> sha_values;
    {
        std::vector<std::pair<long long, double>> quota;
        std::size_t assigned = 0;
        for (const auto& [sha, w] : class_spec) {
            const double q = static_cast<double>(n) * w / total_w;
            const auto base = static_cast<std::size_t>(std::floor(q));
            for (std::size_t k = 0; k < base; ++k) sha_values.push_back(sha);
            assigned += base;
            quota.emplace_back(sha, q - std::floor(q));
        }
        std::stable_sort(quota.begin(), quota.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t k = 0; assigned < n; ++k, ++assigned)
            sha_values.push_back(quota[k % quota.size()].first);
    }

    Rng rng(seed);
    rng.shuffle(sha_values);

    double rank_total = 0.0;
    for (double w : opts.rank_weights) rank_total += w;

    Dataset ds;
    ds.source = "synthetic seed " + std::to_string(seed);
    ds.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CurveRecord rec;
        rec.label = "synth." + std::to_string(seed) + "." + std::to_string(i);
        rec.conductor = 11 + static_cast<long long>(rng.below(500000 - 11));
        const double u = rng.uniform() * rank_total;
        double acc = 0.0;
        rec.rank = 0;
        for (int r = 0; r < 4; ++r) {
            acc += opts.rank_weights[static_cast<std::size_t>(r)];
            if (u < acc) {
                rec.rank = r;
                break;
            }
        }
        rec.torsion_order = 1 + static_cast<long long>(rng.below(4));
        rec.real_period = std::exp(rng.uniform(-2.5, 0.5));
        rec.regulator = rec.rank == 0 ? 1.0 : std::exp(rng.uniform(-1.0, 2.5));
        rec.tamagawa_product = std::max<long long>(1, std::llround(std::exp(rng.uniform(0.0, 2.5))));
        rec.sha_order = sha_values[i];
        const double tors = static_cast<double>(*rec.torsion_order);
        rec.special_value = static_cast<double>(*rec.sha_order) * (*rec.real_period) *
                            (*rec.regulator) * static_cast<double>(*rec.tamagawa_product) /
                            (tors * tors);
        if (opts.with_ap) {
            std::vector<int> ap(kApPrimes.size());
            for (std::size_t k = 0; k < kApPrimes.size(); ++k) {
                const int bound =
                    static_cast<int>(std::floor(2.0 * std::sqrt(static_cast<double>(kApPrimes[k]))));
                ap[k] = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * bound + 1))) - bound;
            }
            rec.ap_values = std::move(ap);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

bool record_has_feature(const CurveRecord& rec, const std::string& name) {
    if (name == "conductor" || name == "rank") return true;
    if (name == "torsion_order") return rec.torsion_order.has_value();
    if (name == "real_period") return rec.real_period.has_value();
    if (name == "regulator") return rec.regulator.has_value();
    if (name == "tamagawa_product") return rec.tamagawa_product.has_value();
    if (name == "special_value") return rec.special_value.has_value();
    if (name == "sha_order") return rec.sha_order.has_value();
    if (name.rfind("adelic_", 0) == 0 || name == "kodaira_encoded")
        return rec.extras.has_value();
    if (name.rfind("ap_", 0) == 0) return rec.ap_values.has_value();
    throw UnknownFeature(name);
}

double record_feature(const CurveRecord& rec, const std::string& name) {
    auto need = [&](bool present) {
        if (!present) throw MissingFeature(name + " absent on " + rec.label);
    };
    if (name == "conductor") return static_cast<double>(rec.conductor);
    if (name == "rank") return static_cast<double>(rec.rank);
    if (name == "torsion_order") {
        need(rec.torsion_order.has_value());
        return static_cast<double>(*rec.torsion_order);
    }
    if (name == "real_period") {
        need(rec.real_period.has_value());
        return *rec.real_period;
    }
    if (name == "regulator") {
        need(rec.regulator.has_value());
        return *rec.regulator;
    }
    if (name == "tamagawa_product") {
        need(rec.tamagawa_product.has_value());
        return static_cast<double>(*rec.tamagawa_product);
    }
    if (name == "special_value") {
        need(rec.special_value.has_value());
        return *rec.special_value;
    }
    if (name == "sha_order") {
        need(rec.sha_order.has_value());
        return static_cast<double>(*rec.sha_order);
    }
    if (name == "adelic_level") {
        need(rec.extras.has_value());
        return static_cast<double>(rec.extras->adelic_level);
    }
    if (name == "adelic_index") {
        need(rec.extras.has_value());
        return static_cast<double>(rec.extras->adelic_index);
    }
    if (name == "adelic_genus") {
        need(rec.extras.has_value());
        return static_cast<double>(rec.extras->adelic_genus);
    }
    if (name == "kodaira_encoded") {
        need(rec.extras.has_value());
        return static_cast<double>(rec.extras->kodaira_encoded);
    }
    if (name.rfind("ap_", 0) == 0) {
        need(rec.ap_values.has_value());
        const int p = std::stoi(name.substr(3));
        for (std::size_t k = 0; k < kApPrimes.size(); ++k)
            if (kApPrimes[k] == p) return static_cast<double>((*rec.ap_values)[k]);
        throw UnknownFeature(name);
    }
    throw UnknownFeature(name);
}

}  // namespace shaml
