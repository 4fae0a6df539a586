#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shaml/curvedata.hpp"
#include "shaml/matrix.hpp"

namespace shaml {

// The five quantities on the right-hand side of the rearranged BSD identity.
extern const std::vector<std::string> kBsdFeatures;

struct FeatureSpec {
    std::vector<std::string> features;
    std::vector<bool> log_transform;  // per feature; rank handled via log1p
    bool standardize = false;
    bool include_ap = false;

    static FeatureSpec bsd(bool log_all = false);
    static FeatureSpec named(std::vector<std::string> names, bool log_all = false);

    nlohmann::json to_json() const;
    static FeatureSpec from_json(const nlohmann::json& j);
};

enum class Target { class_label, sqrt_sha };

struct Scaler {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> constant;  // flagged columns passed through unscaled
};

struct FeatureMatrix {
    Matrix x;
    std::vector<double> y;
    std::vector<std::string> feature_names;
    std::optional<Scaler> scaler;
};

// Columns in spec order (a_p columns appended when include_ap). For
// classification the target is the class index of sha_order among the sorted
// distinct class values; for regression it is sqrt(sha_order).
FeatureMatrix build_matrix(const Dataset& ds, const FeatureSpec& spec, Target target);

FeatureMatrix log_transform(const FeatureMatrix& m, const FeatureSpec& spec);

struct ScaledPair {
    FeatureMatrix train;
    FeatureMatrix test;
    Scaler scaler;
};

// z-scores with population (1/n) standard deviation; test columns are scaled
// with the training statistics only. Constant columns pass through flagged.
ScaledPair fit_apply_scaler(const FeatureMatrix& train, const FeatureMatrix& test);

FeatureMatrix drop_feature(const FeatureMatrix& m, const std::string& name);

}  // namespace shaml
