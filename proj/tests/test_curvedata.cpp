#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <doctest.h>

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"

using namespace shaml;

namespace {

const char* kHeader =
    "label,conductor,rank,torsion_order,real_period,regulator,tamagawa_product,"
    "special_value,sha_order";

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "tmp_" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("load_csv accepts a minimal valid row") {
    // sha 4 with tors=1, omega=0.5, reg=1, cp=1 -> L* = 2
    const auto path = write_temp("min.csv", std::string(kHeader) +
                                                "\nx1,11,0,1,0.5,1,1,2,4\n");
    auto res = load_csv(path);
    CHECK(res.dataset.size() == 1);
    CHECK(res.rejected_rows == 0);
    CHECK(res.dataset.records[0].sha_order == 4);
}

TEST_CASE("load_csv rejects rank 0 with regulator != 1") {
    const auto path = write_temp("badreg.csv", std::string(kHeader) +
                                                   "\nx1,11,0,1,0.5,2,1,4,4\n");
    auto res = load_csv(path);
    CHECK(res.dataset.size() == 0);
    CHECK(res.rejected_rows == 1);
    REQUIRE(res.issues.size() == 1);
    CHECK(res.issues[0].find("regulator") != std::string::npos);
}

TEST_CASE("load_csv rejects a non-square sha_order") {
    const auto path = write_temp("nonsq.csv", std::string(kHeader) +
                                                  "\nx1,11,0,1,0.5,1,1,1.5,3\n");
    auto res = load_csv(path);
    CHECK(res.rejected_rows == 1);
}

TEST_CASE("load_csv rejects duplicate labels") {
    const auto path = write_temp("dup.csv", std::string(kHeader) +
                                                "\nx1,11,0,1,0.5,1,1,2,4\n"
                                                "x1,13,0,1,0.5,1,1,2,4\n");
    CHECK_THROWS_AS(load_csv(path), InvariantViolation);
}

TEST_CASE("load_csv requires the documented header") {
    const auto path = write_temp("hdr.csv", "label,conductor\nx,11\n");
    CHECK_THROWS_AS(load_csv(path), MissingColumn);
}

TEST_CASE("bundled 4-vs-9 sample is balanced and fully valid") {
    auto res = load_csv(std::string(SHAML_DATA_DIR) + "/lmfdb_4v9_sample.csv");
    CHECK(res.rejected_rows == 0);  // 100% pass at tol 1e-4
    std::size_t n4 = 0, n9 = 0;
    for (const auto& r : res.dataset.records) {
        REQUIRE(r.sha_order.has_value());
        if (*r.sha_order == 4) ++n4;
        if (*r.sha_order == 9) ++n9;
    }
    CHECK(n4 == n9);
    CHECK(n4 + n9 == res.dataset.size());
}

TEST_CASE("bundled mixed sample is fully valid") {
    auto res = load_csv(std::string(SHAML_DATA_DIR) + "/lmfdb_sample.csv");
    CHECK(res.rejected_rows == 0);
    CHECK(res.dataset.size() > 1000);
    for (const auto& r : res.dataset.records)
        if (r.rank == 0) CHECK(*r.regulator == 1.0);
}

TEST_CASE("compute_sha_from_bsd arithmetic") {
    CurveRecord rec;
    rec.label = "t";
    rec.conductor = 11;
    rec.torsion_order = 1;
    rec.special_value = 0.5;
    rec.real_period = 0.5;
    rec.regulator = 1.0;
    rec.tamagawa_product = 1;
    CHECK(compute_sha_from_bsd(rec) == doctest::Approx(1.0));
    rec.torsion_order = 2;
    rec.special_value = 1.0;
    rec.regulator = 0.5;
    CHECK(compute_sha_from_bsd(rec) == doctest::Approx(16.0));
    rec.regulator.reset();
    CHECK_THROWS_AS(compute_sha_from_bsd(rec), MissingFeature);
}

TEST_CASE("validate_record BSD consistency") {
    CurveRecord rec;
    rec.label = "t";
    rec.conductor = 11;
    rec.rank = 1;
    rec.torsion_order = 1;
    rec.real_period = 0.25;
    rec.regulator = 2.0;
    rec.tamagawa_product = 2;
    rec.sha_order = 4;
    rec.special_value = 4.0 * 0.25 * 2.0 * 2.0;  // consistent
    CHECK(validate_record(rec, 1e-6).pass);
    rec.sha_order = 16;  // doubled sqrt-sha, now inconsistent
    auto rep = validate_record(rec, 1e-6);
    CHECK_FALSE(rep.pass);
    REQUIRE_FALSE(rep.reasons.empty());
    CHECK(rep.reasons.front().find("BSD") != std::string::npos);
}

TEST_CASE("balanced_subset takes the minimum class count") {
    Dataset ds;
    for (int i = 0; i < 10; ++i) {
        CurveRecord r;
        r.label = "a" + std::to_string(i);
        r.conductor = 11;
        r.sha_order = 4;
        ds.records.push_back(r);
    }
    for (int i = 0; i < 7; ++i) {
        CurveRecord r;
        r.label = "b" + std::to_string(i);
        r.conductor = 11;
        r.sha_order = 9;
        ds.records.push_back(r);
    }
    auto sub = balanced_subset(ds, "sha_order", {4, 9}, 42);
    CHECK(sub.size() == 14);
    std::size_t n4 = 0;
    for (const auto& r : sub.records) n4 += *r.sha_order == 4;
    CHECK(n4 == 7);
    // determinism: same seed, same labels
    auto sub2 = balanced_subset(ds, "sha_order", {4, 9}, 42);
    CHECK(sub.records == sub2.records);
    // output is a subset of the input
    for (const auto& r : sub.records)
        CHECK(std::any_of(ds.records.begin(), ds.records.end(),
                          [&](const CurveRecord& o) { return o.label == r.label; }));
    CHECK_THROWS_AS(balanced_subset(ds, "sha_order", {4, 25}, 1), EmptyClass);
}

TEST_CASE("train_test_split partitions deterministically") {
    auto ds = synthesize_dataset(10, {{1, 1.0}}, 3);
    auto [train, test] = train_test_split(ds, {0.2, 7});
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    auto [train2, test2] = train_test_split(ds, {0.2, 7});
    CHECK(train.records == train2.records);
    CHECK(test.records == test2.records);
    // union of the two sides is the input as a multiset of labels
    std::multiset<std::string> all, split_labels;
    for (const auto& r : ds.records) all.insert(r.label);
    for (const auto& r : train.records) split_labels.insert(r.label);
    for (const auto& r : test.records) split_labels.insert(r.label);
    CHECK(all == split_labels);
    Dataset tiny;
    tiny.records = {ds.records[0]};
    CHECK_THROWS_AS(train_test_split(tiny, {0.2, 1}), DegenerateSplit);
    CHECK_THROWS_AS(train_test_split(ds, {0.01, 1}), DegenerateSplit);
}

TEST_CASE("synthesize_dataset is BSD-exact and deterministic") {
    auto ds = synthesize_dataset(100, {{4, 50.0}, {9, 50.0}}, 12345);
    CHECK(ds.size() == 100);
    std::size_t n4 = 0;
    for (const auto& r : ds.records) {
        auto rep = validate_record(r, 1e-10);
        CHECK(rep.pass);
        n4 += *r.sha_order == 4;
        if (r.rank == 0) CHECK(*r.regulator == 1.0);
    }
    CHECK(n4 == 50);
    CHECK_THROWS_AS(synthesize_dataset(10, {{3, 10.0}}, 1), InvalidClassSpec);

    save_csv(ds, "tmp_synth_a.csv");
    save_csv(synthesize_dataset(100, {{4, 50.0}, {9, 50.0}}, 12345), "tmp_synth_b.csv");
    CHECK(slurp("tmp_synth_a.csv") == slurp("tmp_synth_b.csv"));
}

TEST_CASE("csv round trip preserves every field") {
    auto ds = synthesize_dataset(50, {{1, 1.0}, {4, 1.0}, {16, 0.5}}, 9, {.with_ap = true});
    save_csv(ds, "tmp_roundtrip.csv");
    auto back = load_csv("tmp_roundtrip.csv", 1e-10);
    CHECK(back.rejected_rows == 0);
    REQUIRE(back.dataset.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& a = ds.records[i];
        const auto& b = back.dataset.records[i];
        CHECK(a.label == b.label);
        CHECK(a.conductor == b.conductor);
        CHECK(a.rank == b.rank);
        CHECK(a.torsion_order == b.torsion_order);
        CHECK(a.real_period == b.real_period);  // exact: shortest round-trip formatting
        CHECK(a.regulator == b.regulator);
        CHECK(a.tamagawa_product == b.tamagawa_product);
        CHECK(a.special_value == b.special_value);
        CHECK(a.sha_order == b.sha_order);
        CHECK(a.ap_values == b.ap_values);
    }
}

TEST_CASE("save_dataset writes a metadata sidecar") {
    auto ds = synthesize_dataset(5, {{1, 1.0}}, 2);
    save_dataset(ds, "tmp_meta.csv", 2);
    const auto meta = slurp("tmp_meta.csv.meta.json");
    CHECK(meta.find("schema_version") != std::string::npos);
    CHECK(meta.find("synthetic seed 2") != std::string::npos);
}

TEST_CASE("record_feature accessor") {
    auto ds = synthesize_dataset(1, {{4, 1.0}}, 8);
    const auto& r = ds.records[0];
    CHECK(record_feature(r, "rank") == static_cast<double>(r.rank));
    CHECK(record_feature(r, "regulator") == *r.regulator);
    CHECK_THROWS_AS(record_feature(r, "no_such_feature"), UnknownFeature);
    CHECK(record_has_feature(r, "sha_order"));
}
