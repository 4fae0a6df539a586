#include "shaml/featureng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shaml/errors.hpp"

namespace shaml {

const std::vector<std::string> kBsdFeatures = {
    "special_value", "torsion_order", "real_period", "regulator", "tamagawa_product"};

FeatureSpec FeatureSpec::bsd(bool log_all) { return named(kBsdFeatures, log_all); }

FeatureSpec FeatureSpec::named(std::vector<std::string> names, bool log_all) {
    FeatureSpec spec;
    spec.features = std::move(names);
    spec.log_transform.assign(spec.features.size(), log_all);
    return spec;
}

nlohmann::json FeatureSpec::to_json() const {
    nlohmann::json j;
    j["features"] = features;
    j["log_transform"] = log_transform;
    j["standardize"] = standardize;
    j["include_ap"] = include_ap;
    return j;
}

FeatureSpec FeatureSpec::from_json(const nlohmann::json& j) {
    FeatureSpec spec;
    spec.features = j.at("features").get<std::vector<std::string>>();
    if (j.contains("log_transform"))
        spec.log_transform = j.at("log_transform").get<std::vector<bool>>();
    else
        spec.log_transform.assign(spec.features.size(), false);
    spec.standardize = j.value("standardize", false);
    spec.include_ap = j.value("include_ap", false);
    if (spec.log_transform.size() != spec.features.size())
        throw ConfigError("log_transform length must match features");
    return spec;
}

FeatureMatrix build_matrix(const Dataset& ds, const FeatureSpec& spec, Target target) {
    const std::size_t n = ds.records.size();
    std::vector<std::string> names = spec.features;
    if (spec.include_ap) {
        for (const auto& rec : ds.records)
            if (!rec.ap_values)
                throw MissingApColumns("record " + rec.label + " has no a_p values");
        for (int p : kApPrimes) names.push_back("ap_" + std::to_string(p));
    }
    const std::size_t d = names.size();

    FeatureMatrix m;
    m.feature_names = names;
    m.x = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m.x(i, j) = record_feature(ds.records[i], names[j]);

    m.y.resize(n);
    if (target == Target::sqrt_sha) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!ds.records[i].sha_order)
                throw MissingFeature("sha_order absent on " + ds.records[i].label);
            m.y[i] = std::sqrt(static_cast<double>(*ds.records[i].sha_order));
        }
    } else {
        std::set<long long> classes;
        for (const auto& rec : ds.records) {
            if (!rec.sha_order) throw MissingFeature("sha_order absent on " + rec.label);
            classes.insert(*rec.sha_order);
        }
        std::vector<long long> ordered(classes.begin(), classes.end());
        for (std::size_t i = 0; i < n; ++i) {
            const auto it =
                std::lower_bound(ordered.begin(), ordered.end(), *ds.records[i].sha_order);
            m.y[i] = static_cast<double>(it - ordered.begin());
        }
    }
    if (!m.x.all_finite()) throw NonFinite("feature matrix has non-finite entries");
    return m;
}

FeatureMatrix log_transform(const FeatureMatrix& m, const FeatureSpec& spec) {
    FeatureMatrix out = m;
    for (std::size_t j = 0; j < spec.features.size(); ++j) {
        if (!spec.log_transform[j]) continue;
        const bool is_rank = spec.features[j] == "rank";
        for (std::size_t i = 0; i < out.x.rows(); ++i) {
            const double v = out.x(i, j);
            if (is_rank) {
                out.x(i, j) = std::log1p(v);
            } else {
                if (v <= 0.0)
                    throw NonPositiveEntry("row " + std::to_string(i) + ", column " +
                                           spec.features[j]);
                out.x(i, j) = std::log(v);
            }
        }
    }
    return out;
}

ScaledPair fit_apply_scaler(const FeatureMatrix& train, const FeatureMatrix& test) {
    if (train.x.rows() == 0) throw Empty("fit_apply_scaler: empty training matrix");
    if (test.x.cols() != train.x.cols())
        throw DimensionMismatch("fit_apply_scaler: column count mismatch");
    const std::size_t n = train.x.rows();
    const std::size_t d = train.x.cols();

    Scaler sc;
    sc.mean.assign(d, 0.0);
    sc.std.assign(d, 0.0);
    sc.constant.assign(d, false);
    for (std::size_t j = 0; j < d; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += train.x(i, j);
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dlt = train.x(i, j) - mu;
            var += dlt * dlt;
        }
        var /= static_cast<double>(n);  // population convention
        sc.mean[j] = mu;
        sc.std[j] = std::sqrt(var);
        if (sc.std[j] == 0.0) sc.constant[j] = true;
    }

    ScaledPair out{train, test, sc};
    auto apply = [&](FeatureMatrix& m) {
        for (std::size_t j = 0; j < d; ++j) {
            if (sc.constant[j]) continue;
            for (std::size_t i = 0; i < m.x.rows(); ++i)
                m.x(i, j) = (m.x(i, j) - sc.mean[j]) / sc.std[j];
        }
        m.scaler = sc;
    };
    apply(out.train);
    apply(out.test);
    return out;
}

FeatureMatrix drop_feature(const FeatureMatrix& m, const std::string& name) {
    const auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
    if (it == m.feature_names.end()) throw UnknownFeature(name);
    const auto drop = static_cast<std::size_t>(it - m.feature_names.begin());

    FeatureMatrix out;
    out.y = m.y;
    out.feature_names = m.feature_names;
    out.feature_names.erase(out.feature_names.begin() + static_cast<std::ptrdiff_t>(drop));
    out.x = Matrix(m.x.rows(), m.x.cols() - 1);
    for (std::size_t i = 0; i < m.x.rows(); ++i) {
        std::size_t jj = 0;
        for (std::size_t j = 0; j < m.x.cols(); ++j) {
            if (j == drop) continue;
            out.x(i, jj++) = m.x(i, j);
        }
    }
    if (m.scaler) {
        Scaler sc = *m.scaler;
        sc.mean.erase(sc.mean.begin() + static_cast<std::ptrdiff_t>(drop));
        sc.std.erase(sc.std.begin() + static_cast<std::ptrdiff_t>(drop));
        sc.constant.erase(sc.constant.begin() + static_cast<std::ptrdiff_t>(drop));
        out.scaler = sc;
    }
    return out;
}

}  // namespace shaml
