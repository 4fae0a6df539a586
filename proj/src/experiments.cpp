#include "shaml/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "shaml/errors.hpp"
#include "shaml/svgplot.hpp"

namespace shaml {

namespace {

namespace fs = std::filesystem;

void ensure_out_dirs(const std::string& out_dir) {
    if (out_dir.empty()) return;
    fs::create_directories(fs::path(out_dir) / "results");
    fs::create_directories(fs::path(out_dir) / "figures");
    fs::create_directories(fs::path(out_dir) / "manifests");
}

std::ofstream open_result(const std::string& out_dir, const std::string& name) {
    std::ofstream out(fs::path(out_dir) / "results" / name);
    if (!out) throw ConfigError("cannot write results/" + name);
    return out;
}

GbmConfig gbm_from_json_cfg(const nlohmann::json& j) {
    GbmConfig c;
    c.n_bins = j.value("n_bins", c.n_bins);
    c.n_trees = j.value("n_trees", c.n_trees);
    c.shrinkage = j.value("shrinkage", c.shrinkage);
    c.max_leaves = j.value("max_leaves", c.max_leaves);
    c.min_samples_leaf = j.value("min_samples_leaf", c.min_samples_leaf);
    c.seed = j.value("seed", c.seed);
    return c;
}

MlpConfig mlp_from_json_cfg(const nlohmann::json& j) {
    MlpConfig c;
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    c.dropout = j.value("dropout", c.dropout);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    return c;
}

LogisticConfig logistic_from_json_cfg(const nlohmann::json& j) {
    LogisticConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.tolerance = j.value("tolerance", c.tolerance);
    c.seed = j.value("seed", c.seed);
    return c;
}

RunManifest start_manifest(const std::string& experiment, const ExperimentConfig& cfg,
                           const Dataset& ds) {
    RunManifest m;
    m.experiment = experiment;
    m.config_hash = config_hash(cfg.to_json());
    m.seed = cfg.seed;
    m.dataset = fingerprint(ds);
    m.started_at = iso8601_now();
    return m;
}

void finish_manifest(RunManifest& m, const std::string& out_dir) {
    m.finished_at = iso8601_now();
    if (!out_dir.empty())
        m.save((fs::path(out_dir) / "manifests" / (m.experiment + ".json")).string());
}

std::vector<std::string> replace_feature(std::vector<std::string> names,
                                         const std::string& from, const std::string& to) {
    for (auto& n : names)
        if (n == from) n = to;
    return names;
}

std::vector<std::string> without_feature(std::vector<std::string> names,
                                         const std::string& drop) {
    std::erase(names, drop);
    return names;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    if (!csv_path.empty()) j["dataset"]["csv"] = csv_path;
    if (synthetic) {
        nlohmann::json s;
        s["n"] = synthetic->n;
        nlohmann::json cl;
        for (const auto& [sha, w] : synthetic->classes) cl[std::to_string(sha)] = w;
        s["classes"] = cl;
        s["seed"] = synthetic->seed;
        s["rank_weights"] = synthetic->options.rank_weights;
        s["with_ap"] = synthetic->options.with_ap;
        j["dataset"]["synthetic"] = s;
    }
    j["classes"] = classes;
    j["positive_rank_only"] = positive_rank_only;
    j["balance"] = balance;
    j["split"] = {{"test_fraction", split.test_fraction}, {"seed", split.seed}};
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    j["gbm"] = {{"n_bins", gbm.n_bins},
                {"n_trees", gbm.n_trees},
                {"shrinkage", gbm.shrinkage},
                {"max_leaves", gbm.max_leaves},
                {"min_samples_leaf", gbm.min_samples_leaf},
                {"seed", gbm.seed}};
    j["mlp"] = {{"hidden", mlp.hidden},       {"dropout", mlp.dropout},
                {"learning_rate", mlp.learning_rate}, {"epochs", mlp.epochs},
                {"batch_size", mlp.batch_size},       {"seed", mlp.seed}};
    j["logistic"] = {{"learning_rate", logistic.learning_rate},
                     {"max_epochs", logistic.max_epochs},
                     {"tolerance", logistic.tolerance},
                     {"seed", logistic.seed}};
    if (!large_conductor_csv.empty()) j["large_conductor_csv"] = large_conductor_csv;
    j["thresholds"] = thresholds;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        if (d.contains("csv")) cfg.csv_path = d.at("csv").get<std::string>();
        if (d.contains("synthetic")) {
            const auto& s = d.at("synthetic");
            SyntheticSpec spec;
            spec.n = s.at("n").get<std::size_t>();
            for (const auto& [key, val] : s.at("classes").items())
                spec.classes[std::stoll(key)] = val.get<double>();
            spec.seed = s.value("seed", std::uint64_t{0});
            if (s.contains("rank_weights"))
                spec.options.rank_weights = s.at("rank_weights").get<std::array<double, 4>>();
            spec.options.with_ap = s.value("with_ap", false);
            cfg.synthetic = spec;
        }
    }
    if (j.contains("classes")) cfg.classes = j.at("classes").get<std::vector<long long>>();
    cfg.positive_rank_only = j.value("positive_rank_only", false);
    cfg.balance = j.value("balance", false);
    if (j.contains("split")) {
        cfg.split.test_fraction = j.at("split").value("test_fraction", 0.2);
        cfg.split.seed = j.at("split").value("seed", std::uint64_t{42});
    }
    cfg.seed = j.value("seed", std::uint64_t{42});
    cfg.out_dir = j.value("out_dir", "");
    if (j.contains("gbm")) cfg.gbm = gbm_from_json_cfg(j.at("gbm"));
    if (j.contains("mlp")) cfg.mlp = mlp_from_json_cfg(j.at("mlp"));
    if (j.contains("logistic")) cfg.logistic = logistic_from_json_cfg(j.at("logistic"));
    cfg.large_conductor_csv = j.value("large_conductor_csv", "");
    if (j.contains("thresholds"))
        cfg.thresholds = j.at("thresholds").get<std::vector<double>>();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
}

Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
    Dataset ds;
    if (!cfg.csv_path.empty() && cfg.synthetic)
        throw ConfigError("dataset selector must be csv or synthetic, not both");
    if (!cfg.csv_path.empty()) {
        ds = load_csv(cfg.csv_path).dataset;
    } else if (cfg.synthetic) {
        ds = synthesize_dataset(cfg.synthetic->n, cfg.synthetic->classes, cfg.synthetic->seed,
                                cfg.synthetic->options);
    } else {
        throw ConfigError("no dataset selector in config");
    }
    if (cfg.positive_rank_only)
        std::erase_if(ds.records, [](const CurveRecord& r) { return r.rank == 0; });
    if (!cfg.classes.empty()) {
        std::erase_if(ds.records, [&](const CurveRecord& r) {
            return !r.sha_order ||
                   std::find(cfg.classes.begin(), cfg.classes.end(), *r.sha_order) ==
                       cfg.classes.end();
        });
        if (cfg.balance) ds = balanced_subset(ds, "sha_order", cfg.classes, cfg.seed);
    }
    if (ds.records.empty()) throw EmptyResult("dataset selector produced no records");
    return ds;
}

// ---------------------------------------------------------------------------

BenchmarkResult run_all_bsd_benchmark(const ExperimentConfig& cfg) {
    Dataset ds = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);
    BenchmarkResult res;
    res.manifest = start_manifest("benchmark", cfg, ds);

    auto [train_ds, test_ds] = train_test_split(ds, cfg.split);
    const FeatureSpec raw_spec = FeatureSpec::bsd(false);
    const FeatureSpec log_spec = FeatureSpec::bsd(true);

    FeatureMatrix train_raw = build_matrix(train_ds, raw_spec, Target::class_label);
    FeatureMatrix test_raw = build_matrix(test_ds, raw_spec, Target::class_label);

    {
        auto scaled = fit_apply_scaler(train_raw, test_raw);
        auto model = logistic_fit(scaled.train, cfg.logistic);
        res.logistic_raw_accuracy = accuracy(model.predict(scaled.test.x), scaled.test.y);
    }
    {
        auto train_log = log_transform(train_raw, log_spec);
        auto test_log = log_transform(test_raw, log_spec);
        auto scaled = fit_apply_scaler(train_log, test_log);
        auto model = logistic_fit(scaled.train, cfg.logistic);
        res.logistic_log_accuracy = accuracy(model.predict(scaled.test.x), scaled.test.y);
    }
    {
        GbmConfig gc = cfg.gbm;
        gc.loss = GbmLoss::logistic;
        auto model = gbm_fit(train_raw, gc);
        res.gbm_raw_accuracy = accuracy(model.predict(test_raw.x), test_raw.y);
    }
    {
        // OLS on the log features against log |Sha| over the full dataset
        FeatureMatrix all = build_matrix(ds, raw_spec, Target::sqrt_sha);
        FeatureMatrix all_log = log_transform(all, log_spec);
        std::vector<double> log_sha(all_log.y.size());
        for (std::size_t i = 0; i < log_sha.size(); ++i)
            log_sha[i] = 2.0 * std::log(all_log.y[i]);
        res.ols = ols_fit(all_log.x, log_sha);
    }

    auto& met = res.manifest.metrics;
    met["logistic_raw_accuracy"] = res.logistic_raw_accuracy;
    met["logistic_log_accuracy"] = res.logistic_log_accuracy;
    met["gbm_raw_accuracy"] = res.gbm_raw_accuracy;
    met["ols_intercept"] = res.ols.intercept;
    for (std::size_t j = 0; j < res.ols.coefficients.size(); ++j)
        met["ols_coef_" + train_raw.feature_names[j]] = res.ols.coefficients[j];

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "benchmark.csv");
        out << "model,accuracy\n";
        out << "logistic_raw," << res.logistic_raw_accuracy << "\n";
        out << "logistic_log," << res.logistic_log_accuracy << "\n";
        out << "gbm_raw," << res.gbm_raw_accuracy << "\n";
        auto ols_out = open_result(cfg.out_dir, "benchmark_ols.csv");
        ols_out << "feature,coefficient\n";
        for (std::size_t j = 0; j < res.ols.coefficients.size(); ++j)
            ols_out << train_raw.feature_names[j] << "," << res.ols.coefficients[j] << "\n";
        ols_out << "(intercept)," << res.ols.intercept << "\n";
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

double cell_accuracy(const std::string& model, const FeatureMatrix& train,
                     const FeatureMatrix& test, const ExperimentConfig& cfg) {
    if (model == "gbm") {
        GbmConfig gc = cfg.gbm;
        gc.loss = GbmLoss::logistic;
        auto fitted = gbm_fit(train, gc);
        return accuracy(fitted.predict(test.x), test.y);
    }
    auto scaled = fit_apply_scaler(train, test);
    if (model == "logistic") {
        auto fitted = logistic_fit(scaled.train, cfg.logistic);
        return accuracy(fitted.predict(scaled.test.x), scaled.test.y);
    }
    if (model == "mlp") {
        auto fitted = mlp_fit(scaled.train, scaled.test, cfg.mlp);
        return fitted.best_test_accuracy;
    }
    throw ConfigError("unknown model '" + model + "'");
}

}  // namespace

AblationResult run_remove_one_ablation(const ExperimentConfig& cfg) {
    Dataset ds = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);

    AblationResult res;
    res.manifest = start_manifest("ablation", cfg, ds);
    res.deletions.push_back("none");
    for (const auto& f : kBsdFeatures) res.deletions.push_back(f);

    auto [train_ds, test_ds] = train_test_split(ds, cfg.split);
    const FeatureSpec raw_spec = FeatureSpec::bsd(false);
    const FeatureSpec log_spec = FeatureSpec::bsd(true);

    for (const auto& transform : kAblationTransforms) {
        FeatureMatrix train = build_matrix(train_ds, raw_spec, Target::class_label);
        FeatureMatrix test = build_matrix(test_ds, raw_spec, Target::class_label);
        if (transform == "log") {
            train = log_transform(train, log_spec);
            test = log_transform(test, log_spec);
        }
        for (const auto& deletion : res.deletions) {
            const FeatureMatrix train_d =
                deletion == "none" ? train : drop_feature(train, deletion);
            const FeatureMatrix test_d = deletion == "none" ? test : drop_feature(test, deletion);
            for (const auto& model : kAblationModels) {
                const double acc = cell_accuracy(model, train_d, test_d, cfg);
                res.accuracy[model][transform].push_back(acc);
                res.manifest.metrics[model + "." + transform + "." + deletion] = acc;
            }
        }
    }

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "ablation.csv");
        out << "model,transform,deleted_feature,accuracy\n";
        for (const auto& model : kAblationModels)
            for (const auto& transform : kAblationTransforms)
                for (std::size_t k = 0; k < res.deletions.size(); ++k)
                    out << model << "," << transform << "," << res.deletions[k] << ","
                        << res.accuracy[model][transform][k] << "\n";
        for (const auto& transform : kAblationTransforms) {
            BarChart chart;
            chart.title = "Feature Deleted vs Accuracy Across Models (" + transform + ")";
            chart.x_label = "Feature Deleted";
            chart.y_label = "Accuracy";
            chart.group_labels = res.deletions;
            chart.series_names = kAblationModels;
            for (const auto& model : kAblationModels)
                chart.values.push_back(res.accuracy[model][transform]);
            emit_bar_svg(chart, (fs::path(cfg.out_dir) / "figures" /
                                 ("ablation_" + transform + ".svg"))
                                    .string());
        }
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

// ---------------------------------------------------------------------------

ApComparisonResult run_ap_comparison(const ExperimentConfig& cfg) {
    Dataset ds = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);

    ApComparisonResult res;
    res.manifest = start_manifest("ap_comparison", cfg, ds);
    res.deletions.push_back("none");
    for (const auto& f : kBsdFeatures) res.deletions.push_back(f);

    auto [train_ds, test_ds] = train_test_split(ds, cfg.split);

    FeatureSpec without_spec = FeatureSpec::bsd(false);
    FeatureSpec with_spec = FeatureSpec::bsd(false);
    with_spec.include_ap = true;

    const FeatureMatrix train_without = build_matrix(train_ds, without_spec, Target::class_label);
    const FeatureMatrix test_without = build_matrix(test_ds, without_spec, Target::class_label);
    const FeatureMatrix train_with = build_matrix(train_ds, with_spec, Target::class_label);
    const FeatureMatrix test_with = build_matrix(test_ds, with_spec, Target::class_label);

    for (const auto& deletion : res.deletions) {
        auto run_cell = [&](const FeatureMatrix& train, const FeatureMatrix& test) {
            const FeatureMatrix train_d =
                deletion == "none" ? train : drop_feature(train, deletion);
            const FeatureMatrix test_d = deletion == "none" ? test : drop_feature(test, deletion);
            return cell_accuracy("mlp", train_d, test_d, cfg);
        };
        const double a0 = run_cell(train_without, test_without);
        const double a1 = run_cell(train_with, test_with);
        res.accuracy_without_ap.push_back(a0);
        res.accuracy_with_ap.push_back(a1);
        res.manifest.metrics["without_ap." + deletion] = a0;
        res.manifest.metrics["with_ap." + deletion] = a1;
    }

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "ap_comparison.csv");
        out << "deleted_feature,accuracy_without_ap,accuracy_with_ap\n";
        for (std::size_t k = 0; k < res.deletions.size(); ++k)
            out << res.deletions[k] << "," << res.accuracy_without_ap[k] << ","
                << res.accuracy_with_ap[k] << "\n";
        BarChart chart;
        chart.title = "Feature Deleted vs Accuracy: without and with a_p values";
        chart.x_label = "Feature Deleted";
        chart.y_label = "Accuracy";
        chart.group_labels = res.deletions;
        chart.series_names = {"without a_p", "with a_p"};
        chart.values = {res.accuracy_without_ap, res.accuracy_with_ap};
        emit_bar_svg(chart,
                     (fs::path(cfg.out_dir) / "figures" / "ap_comparison.svg").string());
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> regression_features(const std::string& set_name) {
    if (set_name == "bsd" || set_name == "with_reg") return kBsdFeatures;
    if (set_name == "reg_to_rank" || set_name == "with_rank")
        return replace_feature(kBsdFeatures, "regulator", "rank");
    if (set_name == "no_reg_no_rank" || set_name == "neither")
        return without_feature(kBsdFeatures, "regulator");
    throw ConfigError("unknown regression feature set '" + set_name + "'");
}

EvaluationReport evaluate_regressor(const GbmModel& model, const Dataset& ds,
                                    const std::vector<std::string>& features,
                                    const std::vector<double>& thresholds) {
    FeatureMatrix m = build_matrix(ds, FeatureSpec::named(features), Target::sqrt_sha);
    return evaluate_sqrt_sha(model.predict(m.x), m.y, thresholds);
}

void emit_threshold_curves(
    const std::string& out_dir, const std::string& name,
    const std::map<std::string, EvaluationReport>& reports_by_feature_set) {
    LineChart chart;
    chart.title = "Accuracy for curves with sqrt(Sha) >= threshold (" + name + ")";
    chart.x_label = "sqrt(Sha) threshold";
    chart.y_label = "Accuracy";
    for (const auto& [set_name, rep] : reports_by_feature_set) {
        LineSeries s;
        s.name = set_name;
        for (const auto& pt : rep.threshold_curve)
            if (pt.accuracy) s.points.emplace_back(pt.threshold, *pt.accuracy);
        chart.series.push_back(std::move(s));
    }
    emit_line_svg(chart,
                  (fs::path(out_dir) / "figures" / ("thresholds_" + name + ".svg")).string());
}

}  // namespace

RegressionSuiteResult run_regression_suite(const ExperimentConfig& cfg) {
    if (cfg.csv_path.empty()) throw ConfigError("regression suite needs a csv dataset");
    Dataset small = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);

    RegressionSuiteResult res;
    res.manifest = start_manifest("regression_suite", cfg, small);

    std::optional<Dataset> large;
    if (!cfg.large_conductor_csv.empty()) large = load_csv(cfg.large_conductor_csv).dataset;

    auto [train_ds, test_ds] = train_test_split(small, cfg.split);

    for (const auto& set_name : kRegressionFeatureSets) {
        const auto features = regression_features(set_name);
        FeatureMatrix train = build_matrix(train_ds, FeatureSpec::named(features),
                                           Target::sqrt_sha);
        GbmConfig gc = cfg.gbm;
        gc.loss = GbmLoss::squared;
        const GbmModel model = gbm_fit(train, gc);

        res.reports[set_name]["small"] =
            evaluate_regressor(model, test_ds, features, cfg.thresholds);
        if (large)
            res.reports[set_name]["large"] =
                evaluate_regressor(model, *large, features, cfg.thresholds);

        for (const auto& [eval_name, rep] : res.reports[set_name]) {
            res.manifest.metrics[set_name + "." + eval_name + ".accuracy"] = rep.accuracy;
            res.manifest.metrics[set_name + "." + eval_name + ".mcc"] = rep.mcc;
        }
    }

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "regression_suite.csv");
        out << "feature_set,eval_set,accuracy,mcc,n\n";
        for (const auto& [set_name, by_eval] : res.reports)
            for (const auto& [eval_name, rep] : by_eval)
                out << set_name << "," << eval_name << "," << rep.accuracy << "," << rep.mcc
                    << "," << rep.n << "\n";
        for (const char* eval_name : {"small", "large"}) {
            std::map<std::string, EvaluationReport> slice;
            for (const auto& [set_name, by_eval] : res.reports)
                if (by_eval.count(eval_name)) slice[set_name] = by_eval.at(eval_name);
            if (!slice.empty()) emit_threshold_curves(cfg.out_dir, eval_name, slice);
        }
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

// ---------------------------------------------------------------------------

RankStratifiedResult run_rank_stratified(const ExperimentConfig& cfg) {
    Dataset ds = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);

    RankStratifiedResult res;
    res.manifest = start_manifest("rank_stratified", cfg, ds);

    std::map<std::string, Dataset> strata;
    strata["rank0"].source = ds.source + " [rank0]";
    strata["rank_pos"].source = ds.source + " [rank>0]";
    for (const auto& r : ds.records)
        (r.rank == 0 ? strata["rank0"] : strata["rank_pos"]).records.push_back(r);
    for (const auto& [name, sub] : strata)
        if (sub.records.empty()) throw EmptyStratum(name);

    for (const auto& [stratum, sub] : strata) {
        auto [train_ds, test_ds] = train_test_split(sub, cfg.split);
        for (const auto& set_name : kStratifiedFeatureSets) {
            const auto features = regression_features(set_name);
            FeatureMatrix train = build_matrix(train_ds, FeatureSpec::named(features),
                                               Target::sqrt_sha);
            GbmConfig gc = cfg.gbm;
            gc.loss = GbmLoss::squared;
            const GbmModel model = gbm_fit(train, gc);
            auto rep = evaluate_regressor(model, test_ds, features, cfg.thresholds);
            res.manifest.metrics[stratum + "." + set_name + ".accuracy"] = rep.accuracy;
            res.manifest.metrics[stratum + "." + set_name + ".mcc"] = rep.mcc;
            res.reports[stratum][set_name] = std::move(rep);
        }
        if (!cfg.out_dir.empty())
            emit_threshold_curves(cfg.out_dir, stratum, res.reports[stratum]);
    }

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "rank_stratified.csv");
        out << "stratum,feature_set,accuracy,mcc,n\n";
        for (const auto& [stratum, by_set] : res.reports)
            for (const auto& [set_name, rep] : by_set)
                out << stratum << "," << set_name << "," << rep.accuracy << "," << rep.mcc << ","
                    << rep.n << "\n";
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

// ---------------------------------------------------------------------------

DelaunayResult run_delaunay_analysis(const Dataset& ds, const std::vector<int>& primes,
                                     const std::vector<int>& ranks,
                                     const std::string& out_dir) {
    ensure_out_dirs(out_dir);
    DelaunayResult res;
    {
        ExperimentConfig dummy;
        dummy.csv_path = ds.source;
        res.manifest.experiment = "delaunay";
        res.manifest.config_hash = config_hash(dummy.to_json());
        res.manifest.dataset = fingerprint(ds);
        res.manifest.started_at = iso8601_now();
    }

    long long max_cond = 0;
    for (const auto& r : ds.records) max_cond = std::max(max_cond, r.conductor);
    if (max_cond < 1) throw EmptyData("dataset has no conductors");

    // 50 log-spaced points from 1e3 to the dataset maximum
    const double lo = std::log10(1000.0);
    const double hi = std::log10(static_cast<double>(max_cond));
    const int npts = 50;
    for (int k = 0; k < npts; ++k) {
        const double t = hi <= lo ? hi : lo + (hi - lo) * static_cast<double>(k) / (npts - 1);
        res.conductor_grid.push_back(std::pow(10.0, t));
    }
    // the top of the grid must include the largest conductor exactly
    res.conductor_grid.back() = static_cast<double>(max_cond);

    for (int r : ranks) {
        std::vector<const CurveRecord*> sub;
        for (const auto& rec : ds.records)
            if (rec.rank == r && rec.sha_order) sub.push_back(&rec);

        auto proportion = [&](double n_bound, auto&& pred) -> std::optional<double> {
            std::size_t total = 0, hit = 0;
            for (const auto* rec : sub) {
                if (static_cast<double>(rec->conductor) > n_bound) continue;
                ++total;
                if (pred(*rec->sha_order)) ++hit;
            }
            if (total == 0) return std::nullopt;  // empty bucket reported as absent
            return static_cast<double>(hit) / static_cast<double>(total);
        };

        for (int p : primes) {
            auto& series = res.divisibility[{p, r}];
            for (double n_bound : res.conductor_grid)
                series.push_back(proportion(n_bound, [&](long long s) { return s % p == 0; }));
        }
        auto& trivial = res.trivial_sha[r];
        for (double n_bound : res.conductor_grid)
            trivial.push_back(proportion(n_bound, [](long long s) { return s == 1; }));

        const double inf = std::numeric_limits<double>::infinity();
        auto observed_trivial = proportion(inf, [](long long s) { return s == 1; });
        auto observed_2 = proportion(inf, [](long long s) { return s % 2 == 0; });
        auto observed_3 = proportion(inf, [](long long s) { return s % 3 == 0; });

        // heuristic constants for ranks 0 and 1 (inputs, not computed)
        if (r == 0) {
            res.table.push_back({"trivial", 0, 0.022924, observed_trivial});
            res.table.push_back({"div2", 0, 0.580577, observed_2});
            res.table.push_back({"div3", 0, 0.360995, observed_3});
        } else if (r == 1) {
            res.table.push_back({"trivial", 1, 0.54914, observed_trivial});
            res.table.push_back({"div2", 1, 0.31146, observed_2});
            res.table.push_back({"div3", 1, 0.0416, observed_3});
        }
        for (const auto& row : res.table) {
            if (row.rank != r || !row.observed) continue;
            res.manifest.metrics["observed." + row.quantity + ".rank" +
                                 std::to_string(row.rank)] = *row.observed;
        }
    }

    if (!out_dir.empty()) {
        auto out = open_result(out_dir, "delaunay.csv");
        out << "quantity,rank,heuristic,observed\n";
        for (const auto& row : res.table) {
            out << row.quantity << "," << row.rank << "," << row.heuristic << ",";
            if (row.observed) out << *row.observed;
            out << "\n";
        }
        for (int p : primes) {
            LineChart chart;
            chart.title = "Proportion of curves with " + std::to_string(p) +
                          " dividing |Sha| up to conductor N";
            chart.x_label = "conductor bound N (log scale)";
            chart.y_label = "proportion";
            chart.log_x = true;
            for (int r : ranks) {
                LineSeries s;
                s.name = "rank " + std::to_string(r);
                const auto& series = res.divisibility[{p, r}];
                for (std::size_t k = 0; k < series.size(); ++k)
                    if (series[k]) s.points.emplace_back(res.conductor_grid[k], *series[k]);
                chart.series.push_back(std::move(s));
            }
            emit_line_svg(chart, (fs::path(out_dir) / "figures" /
                                  ("delaunay_div" + std::to_string(p) + ".svg"))
                                     .string());
        }
        LineChart chart;
        chart.title = "Proportion of trivial |Sha| up to conductor N";
        chart.x_label = "conductor bound N (log scale)";
        chart.y_label = "proportion";
        chart.log_x = true;
        for (int r : ranks) {
            LineSeries s;
            s.name = "rank " + std::to_string(r);
            const auto& series = res.trivial_sha[r];
            for (std::size_t k = 0; k < series.size(); ++k)
                if (series[k]) s.points.emplace_back(res.conductor_grid[k], *series[k]);
            chart.series.push_back(std::move(s));
        }
        emit_line_svg(chart, (fs::path(out_dir) / "figures" / "delaunay_trivial.svg").string());
        res.manifest.finished_at = iso8601_now();
        res.manifest.save((fs::path(out_dir) / "manifests" / "delaunay.json").string());
    }
    return res;
}

// ---------------------------------------------------------------------------

namespace {

Matrix single_row_matrix(const CurveRecord& rec, const std::vector<std::string>& features) {
    Matrix x(1, features.size());
    for (std::size_t j = 0; j < features.size(); ++j)
        x(0, j) = record_feature(rec, features[j]);
    return x;
}

}  // namespace

SingleCurvePrediction predict_single_curve(const GbmModel& regressor,
                                           const GbmModel& classifier,
                                           const CurveRecord& rec) {
    SingleCurvePrediction out;
    out.regression_sqrt_sha = regressor.predict_raw(single_row_matrix(rec, regressor.feature_names))[0];
    const long long rounded = round_sqrt_sha(out.regression_sqrt_sha);
    out.predicted_sha = rounded * rounded;
    out.trivial_sha_probability =
        classifier.predict_proba(single_row_matrix(rec, classifier.feature_names))[0];
    return out;
}

SingleCurveModels train_single_curve_models(const Dataset& ds, const ExperimentConfig& cfg) {
    // rank plus the BSD features except the (uncomputable) special value
    const std::vector<std::string> features = {"rank", "torsion_order", "real_period",
                                               "regulator", "tamagawa_product"};
    auto [train_ds, test_ds] = train_test_split(ds, cfg.split);

    SingleCurveModels out;
    {
        FeatureMatrix train = build_matrix(train_ds, FeatureSpec::named(features),
                                           Target::sqrt_sha);
        GbmConfig gc = cfg.gbm;
        gc.loss = GbmLoss::squared;
        out.regressor = gbm_fit(train, gc);
        out.test_report = evaluate_regressor(out.regressor, test_ds, features, cfg.thresholds);
    }
    {
        FeatureMatrix train = build_matrix(train_ds, FeatureSpec::named(features),
                                           Target::sqrt_sha);
        for (double& v : train.y) v = v == 1.0 ? 1.0 : 0.0;  // trivial-Sha indicator
        GbmConfig gc = cfg.gbm;
        gc.loss = GbmLoss::logistic;
        out.trivial_classifier = gbm_fit(train, gc);
    }
    return out;
}

// ---------------------------------------------------------------------------

PcaAnalysisResult run_pca_analysis(const ExperimentConfig& cfg,
                                   const std::vector<std::string>& features) {
    Dataset ds = load_experiment_dataset(cfg);
    ensure_out_dirs(cfg.out_dir);

    PcaAnalysisResult res;
    res.manifest = start_manifest("pca", cfg, ds);
    res.feature_names = features;

    FeatureSpec spec = FeatureSpec::named(features, /*log_all=*/true);
    FeatureMatrix m = build_matrix(ds, spec, Target::class_label);
    m = log_transform(m, spec);
    auto scaled = fit_apply_scaler(m, m);  // standardize over the whole dataset
    res.pca = pca(scaled.train.x, 2);

    res.loadings = Matrix(features.size(), 2);
    for (std::size_t f = 0; f < features.size(); ++f) {
        res.loadings(f, 0) = res.pca.components(f, 0);
        res.loadings(f, 1) = res.pca.components(f, 1);
    }

    // correlation of (real period, rank, torsion) on the log scale
    {
        const std::vector<std::string> trio = {"real_period", "rank", "torsion_order"};
        FeatureSpec trio_spec = FeatureSpec::named(trio, true);
        FeatureMatrix tm = build_matrix(ds, trio_spec, Target::class_label);
        tm = log_transform(tm, trio_spec);
        res.period_rank_torsion_corr = correlation(tm.x);
    }

    for (std::size_t k = 0; k < res.pca.explained_variance_ratio.size(); ++k)
        res.manifest.metrics["variance_ratio_pc" + std::to_string(k + 1)] =
            res.pca.explained_variance_ratio[k];

    if (!cfg.out_dir.empty()) {
        auto out = open_result(cfg.out_dir, "pca_loadings.csv");
        out << "feature,PC1,PC2\n";
        for (std::size_t f = 0; f < features.size(); ++f)
            out << features[f] << "," << res.loadings(f, 0) << "," << res.loadings(f, 1) << "\n";

        auto ratios = open_result(cfg.out_dir, "pca_variance_ratios.csv");
        ratios << "component,explained_variance_ratio\n";
        for (std::size_t k = 0; k < res.pca.explained_variance_ratio.size(); ++k)
            ratios << "PC" << (k + 1) << "," << res.pca.explained_variance_ratio[k] << "\n";

        auto corr = open_result(cfg.out_dir, "correlation_period_rank_torsion.csv");
        corr << ",real_period,rank,torsion_order\n";
        const std::vector<std::string> trio = {"real_period", "rank", "torsion_order"};
        for (std::size_t a = 0; a < 3; ++a) {
            corr << trio[a];
            for (std::size_t b = 0; b < 3; ++b) corr << "," << res.period_rank_torsion_corr.corr(a, b);
            corr << "\n";
        }

        // class-colored PC1/PC2 scatter
        std::set<double> classes(m.y.begin(), m.y.end());
        ScatterChart chart;
        chart.title = "PCA projection (PC1 vs PC2)";
        chart.x_label = "PC1";
        chart.y_label = "PC2";
        for (double cls : classes) {
            ScatterSeries s;
            s.name = "class " + std::to_string(static_cast<long long>(cls));
            for (std::size_t i = 0; i < m.y.size(); ++i)
                if (m.y[i] == cls)
                    s.points.emplace_back(res.pca.projections(i, 0), res.pca.projections(i, 1));
            chart.series.push_back(std::move(s));
        }
        emit_scatter_svg(chart, (fs::path(cfg.out_dir) / "figures" / "pca_scatter.svg").string());
    }
    finish_manifest(res.manifest, cfg.out_dir);
    return res;
}

}  // namespace shaml
