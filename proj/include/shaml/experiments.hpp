#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shaml/curvedata.hpp"
#include "shaml/featureng.hpp"
#include "shaml/gbm.hpp"
#include "shaml/logistic.hpp"
#include "shaml/manifest.hpp"
#include "shaml/metrics.hpp"
#include "shaml/mlp.hpp"
#include "shaml/numcore.hpp"

namespace shaml {

struct SyntheticSpec {
    std::size_t n = 1000;
    std::map<long long, double> classes;
    std::uint64_t seed = 0;
    SynthOptions options;
};

struct ExperimentConfig {
    // dataset selector: exactly one of csv_path / synthetic
    std::string csv_path;
    std::optional<SyntheticSpec> synthetic;

    std::vector<long long> classes;  // |Sha| classes for binary tasks
    bool positive_rank_only = false;
    bool balance = false;

    SplitSpec split{0.2, 42};
    std::uint64_t seed = 42;
    std::string out_dir;

    GbmConfig gbm;
    MlpConfig mlp;
    LogisticConfig logistic;

    std::string large_conductor_csv;          // regression suite holdout
    std::vector<double> thresholds{1, 2, 3, 4, 5, 6};

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

Dataset load_experiment_dataset(const ExperimentConfig& cfg);

// ---- Section 2.1-style benchmark: four models on all BSD features ----

struct BenchmarkResult {
    double logistic_raw_accuracy = 0.0;
    double logistic_log_accuracy = 0.0;
    double gbm_raw_accuracy = 0.0;
    OlsResult ols;  // log-feature linear relation recovery
    RunManifest manifest;
};

BenchmarkResult run_all_bsd_benchmark(const ExperimentConfig& cfg);

// ---- remove-one-feature ablation grid ----

inline const std::vector<std::string> kAblationModels = {"logistic", "gbm", "mlp"};
inline const std::vector<std::string> kAblationTransforms = {"raw", "log"};

struct AblationResult {
    // deletions: "none" followed by the five BSD features
    std::vector<std::string> deletions;
    // accuracy[model][transform][deletion]
    std::map<std::string, std::map<std::string, std::vector<double>>> accuracy;
    RunManifest manifest;
};

AblationResult run_remove_one_ablation(const ExperimentConfig& cfg);

// ---- a_p augmentation comparison (MLP, raw features) ----

struct ApComparisonResult {
    std::vector<std::string> deletions;
    std::vector<double> accuracy_without_ap;
    std::vector<double> accuracy_with_ap;
    RunManifest manifest;
};

ApComparisonResult run_ap_comparison(const ExperimentConfig& cfg);

// ---- regression suite: sqrt(|Sha|) with three feature sets ----

inline const std::vector<std::string> kRegressionFeatureSets = {
    "bsd", "reg_to_rank", "no_reg_no_rank"};

struct RegressionSuiteResult {
    // reports[feature_set][eval_set], eval sets: "small", "large"
    std::map<std::string, std::map<std::string, EvaluationReport>> reports;
    RunManifest manifest;
};

RegressionSuiteResult run_regression_suite(const ExperimentConfig& cfg);

// ---- rank-stratified regression ----

inline const std::vector<std::string> kStratifiedFeatureSets = {"with_reg", "with_rank",
                                                               "neither"};

struct RankStratifiedResult {
    // reports[stratum][feature_set], strata: "rank0", "rank_pos"
    std::map<std::string, std::map<std::string, EvaluationReport>> reports;
    RunManifest manifest;
};

RankStratifiedResult run_rank_stratified(const ExperimentConfig& cfg);

// ---- empirical |Sha| distribution vs the Delaunay-heuristic constants ----

struct DelaunayHeuristicRow {
    std::string quantity;  // "trivial", "div2", "div3"
    int rank = 0;
    double heuristic = 0.0;  // literal constants, inputs not computed values
    std::optional<double> observed;
};

struct DelaunayResult {
    std::vector<double> conductor_grid;  // log-spaced
    // proportions[{p, r}] over the grid; absent where the bucket is empty
    std::map<std::pair<int, int>, std::vector<std::optional<double>>> divisibility;
    std::map<int, std::vector<std::optional<double>>> trivial_sha;  // per rank
    std::vector<DelaunayHeuristicRow> table;
    RunManifest manifest;
};

DelaunayResult run_delaunay_analysis(const Dataset& ds, const std::vector<int>& primes,
                                     const std::vector<int>& ranks,
                                     const std::string& out_dir = "");

// ---- out-of-distribution single-curve prediction ----

struct SingleCurvePrediction {
    double regression_sqrt_sha = 0.0;
    long long predicted_sha = 1;
    double trivial_sha_probability = 0.0;
};

SingleCurvePrediction predict_single_curve(const GbmModel& regressor,
                                           const GbmModel& classifier,
                                           const CurveRecord& rec);

// trains the no-special-value model pair used for the prediction above
struct SingleCurveModels {
    GbmModel regressor;
    GbmModel trivial_classifier;
    EvaluationReport test_report;
};

SingleCurveModels train_single_curve_models(const Dataset& ds, const ExperimentConfig& cfg);

// ---- PCA / correlation analyses ----

struct PcaAnalysisResult {
    PcaResult pca;
    std::vector<std::string> feature_names;
    Matrix loadings;  // d x 2 (PC1, PC2)
    CorrelationResult period_rank_torsion_corr;  // 3x3
    RunManifest manifest;
};

PcaAnalysisResult run_pca_analysis(const ExperimentConfig& cfg,
                                   const std::vector<std::string>& features);

}  // namespace shaml
