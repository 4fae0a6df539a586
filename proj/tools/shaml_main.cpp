// shaml: train and evaluate |Sha| predictors on elliptic-curve invariants.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shaml/curvedata.hpp"
#include "shaml/errors.hpp"
#include "shaml/experiments.hpp"
#include "shaml/lmfdb.hpp"
#include "shaml/manifest.hpp"
#include "shaml/serialize.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string in_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    double tol = 1e-4;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "experiment config (JSON)");
    cmd->add_option("--in", f.in_path, "input CSV/JSON path");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "seed override")->each([&](const std::string&) {
        f.seed_set = true;
    });
    cmd->add_option("--threads", f.threads, "worker threads (compute is deterministic)");
    cmd->add_option("--tol", f.tol, "validation tolerance");
}

shaml::ExperimentConfig load_config(const CommonFlags& f, bool require_config = true) {
    shaml::ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = shaml::ExperimentConfig::from_file(f.config);
    } else if (require_config && f.in_path.empty()) {
        throw shaml::ConfigError("--config (or --in) is required");
    }
    if (!f.in_path.empty()) {
        cfg.csv_path = f.in_path;
        cfg.synthetic.reset();
    }
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.seed_set) {
        cfg.seed = f.seed;
        cfg.split.seed = f.seed;
        cfg.gbm.seed = f.seed;
        cfg.mlp.seed = f.seed;
        cfg.logistic.seed = f.seed;
    }
    return cfg;
}

shaml::CurveRecord record_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw shaml::ConfigError("cannot read " + path);
    nlohmann::json j;
    in >> j;
    shaml::CurveRecord rec;
    rec.label = j.value("label", std::string{});
    rec.conductor = j.value("conductor", 0LL);
    rec.rank = j.value("rank", 0);
    if (j.contains("torsion_order")) rec.torsion_order = j.at("torsion_order").get<long long>();
    if (j.contains("real_period")) rec.real_period = j.at("real_period").get<double>();
    if (j.contains("regulator")) rec.regulator = j.at("regulator").get<double>();
    if (j.contains("tamagawa_product"))
        rec.tamagawa_product = j.at("tamagawa_product").get<long long>();
    if (j.contains("special_value")) rec.special_value = j.at("special_value").get<double>();
    if (j.contains("sha_order")) rec.sha_order = j.at("sha_order").get<long long>();
    return rec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"elliptic-curve Sha prediction toolkit"};
    app.require_subcommand(1);

    CommonFlags f;
    bool download = false;
    std::string query_label;
    long long query_conductor_lt = 0;
    std::size_t fetch_limit = 100;
    std::size_t synth_n = 1000;
    std::string synth_classes = "1:0.5,4:0.5";
    bool synth_with_ap = false;
    std::string curve_json;
    std::string manifest_path;
    std::string primes_arg = "2,3";
    std::string ranks_arg = "0,1";

    auto* ingest = app.add_subcommand("ingest", "CSV or API to validated dataset CSV");
    add_common(ingest, f);
    ingest->add_flag("--download", download, "allow network fetch from the API");
    ingest->add_option("--label", query_label, "API query: exact label");
    ingest->add_option("--conductor-lt", query_conductor_lt, "API query: conductor bound");
    ingest->add_option("--limit", fetch_limit, "API query: max rows");

    auto* synth = app.add_subcommand("synth", "generate a BSD-consistent synthetic dataset");
    add_common(synth, f);
    synth->add_option("--n", synth_n, "rows to generate");
    synth->add_option("--classes", synth_classes, "sha:weight list, e.g. 1:0.5,4:0.5");
    synth->add_flag("--with-ap", synth_with_ap, "attach synthetic a_p columns");

    auto* validate = app.add_subcommand("validate", "validate a dataset CSV");
    add_common(validate, f);

    auto* ablate = app.add_subcommand("ablate", "remove-one-feature ablation grid");
    add_common(ablate, f);

    auto* apcompare = app.add_subcommand("apcompare", "MLP accuracy with vs without a_p");
    add_common(apcompare, f);

    auto* regress = app.add_subcommand("regress", "sqrt(Sha) regression suite");
    add_common(regress, f);

    auto* stratify = app.add_subcommand("stratify", "rank-stratified regression");
    add_common(stratify, f);

    auto* delaunay = app.add_subcommand("delaunay", "Sha distribution vs heuristic constants");
    add_common(delaunay, f);
    delaunay->add_option("--primes", primes_arg, "divisibility primes, e.g. 2,3");
    delaunay->add_option("--ranks", ranks_arg, "ranks to stratify, e.g. 0,1");

    auto* pca_cmd = app.add_subcommand("pca", "PCA and correlation analysis");
    add_common(pca_cmd, f);

    auto* predict = app.add_subcommand("predict", "predict Sha for one curve record (JSON)");
    add_common(predict, f);
    predict->add_option("--curve", curve_json, "curve record JSON")->required();

    auto* benchmark = app.add_subcommand("benchmark", "all-BSD-feature model benchmark");
    add_common(benchmark, f);

    auto* report = app.add_subcommand("report", "print a run manifest");
    report->add_option("--manifest", manifest_path, "manifest JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints help/usage
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            shaml::Dataset ds;
            if (download) {
                shaml::LmfdbQuery q;
                if (!query_label.empty()) q.label = query_label;
                if (query_conductor_lt > 0) q.conductor_lt = query_conductor_lt;
                ds = shaml::LmfdbClient().fetch(q, fetch_limit);
            } else {
                if (f.in_path.empty()) throw shaml::ConfigError("--in required without --download");
                auto loaded = shaml::load_csv(f.in_path, f.tol);
                ds = loaded.dataset;
                std::cout << "rows=" << ds.size() << " rejected=" << loaded.rejected_rows << "\n";
            }
            if (!f.out_dir.empty()) {
                std::filesystem::create_directories(f.out_dir);
                shaml::save_dataset(ds, f.out_dir + "/dataset.csv", f.seed);
            }
            return 0;
        }
        if (*synth) {
            std::map<long long, double> classes;
            std::stringstream ss(synth_classes);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    throw shaml::ConfigError("bad --classes entry '" + item + "'");
                classes[std::stoll(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
            }
            shaml::SynthOptions opts;
            opts.with_ap = synth_with_ap;
            auto ds = shaml::synthesize_dataset(synth_n, classes, f.seed, opts);
            if (!f.out_dir.empty()) std::filesystem::create_directories(f.out_dir);
            const std::string out =
                f.out_dir.empty() ? "synthetic.csv" : f.out_dir + "/synthetic.csv";
            shaml::save_dataset(ds, out, f.seed);
            std::cout << "wrote " << out << " (" << ds.size() << " rows)\n";
            return 0;
        }
        if (*validate) {
            if (f.in_path.empty()) throw shaml::ConfigError("--in is required");
            auto loaded = shaml::load_csv(f.in_path, f.tol);
            const std::size_t total = loaded.dataset.size() + loaded.rejected_rows;
            const double rate =
                total == 0 ? 0.0 : static_cast<double>(loaded.dataset.size()) / total;
            std::printf("pass-rate %.6f (%zu/%zu)\n", rate, loaded.dataset.size(), total);
            for (const auto& issue : loaded.issues) std::cerr << issue << "\n";
            return loaded.rejected_rows == 0 ? 0 : 1;
        }
        if (*ablate) {
            auto res = shaml::run_remove_one_ablation(load_config(f));
            for (const auto& [k, v] : res.manifest.metrics)
                std::cout << k << " " << v << "\n";
            return 0;
        }
        if (*apcompare) {
            auto res = shaml::run_ap_comparison(load_config(f));
            for (std::size_t k = 0; k < res.deletions.size(); ++k)
                std::cout << res.deletions[k] << " without=" << res.accuracy_without_ap[k]
                          << " with=" << res.accuracy_with_ap[k] << "\n";
            return 0;
        }
        if (*regress) {
            auto res = shaml::run_regression_suite(load_config(f));
            for (const auto& [set_name, by_eval] : res.reports)
                for (const auto& [eval_name, rep] : by_eval)
                    std::cout << set_name << "/" << eval_name << " acc=" << rep.accuracy
                              << " mcc=" << rep.mcc << "\n";
            return 0;
        }
        if (*stratify) {
            auto res = shaml::run_rank_stratified(load_config(f));
            for (const auto& [stratum, by_set] : res.reports)
                for (const auto& [set_name, rep] : by_set)
                    std::cout << stratum << "/" << set_name << " acc=" << rep.accuracy
                              << " mcc=" << rep.mcc << "\n";
            return 0;
        }
        if (*delaunay) {
            auto cfg = load_config(f);
            auto ds = shaml::load_experiment_dataset(cfg);
            auto parse_ints = [](const std::string& s) {
                std::vector<int> out;
                std::stringstream ss(s);
                std::string item;
                while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
                return out;
            };
            auto res = shaml::run_delaunay_analysis(ds, parse_ints(primes_arg),
                                                    parse_ints(ranks_arg), cfg.out_dir);
            std::cout << "quantity rank heuristic observed\n";
            for (const auto& row : res.table) {
                std::cout << row.quantity << " " << row.rank << " " << row.heuristic << " ";
                if (row.observed) std::cout << *row.observed;
                std::cout << "\n";
            }
            return 0;
        }
        if (*pca_cmd) {
            auto cfg = load_config(f);
            auto res = shaml::run_pca_analysis(cfg, shaml::kBsdFeatures);
            for (std::size_t k = 0; k < res.pca.explained_variance_ratio.size(); ++k)
                std::cout << "PC" << (k + 1) << " variance ratio "
                          << res.pca.explained_variance_ratio[k] << "\n";
            return 0;
        }
        if (*predict) {
            auto cfg = load_config(f);
            auto ds = shaml::load_experiment_dataset(cfg);
            auto models = shaml::train_single_curve_models(ds, cfg);
            auto rec = record_from_json_file(curve_json);
            auto pred =
                shaml::predict_single_curve(models.regressor, models.trivial_classifier, rec);
            std::cout << "label " << rec.label << "\n";
            std::cout << "regression sqrt(Sha) " << pred.regression_sqrt_sha << "\n";
            std::cout << "predicted |Sha| " << pred.predicted_sha << "\n";
            std::cout << "P(trivial Sha) " << pred.trivial_sha_probability << "\n";
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir + "/results");
                shaml::save_model_json(shaml::to_json(models.regressor),
                                       cfg.out_dir + "/results/single_curve_regressor.json");
                shaml::save_model_json(shaml::to_json(models.trivial_classifier),
                                       cfg.out_dir + "/results/single_curve_classifier.json");
            }
            return 0;
        }
        if (*benchmark) {
            auto res = shaml::run_all_bsd_benchmark(load_config(f));
            std::cout << "logistic raw " << res.logistic_raw_accuracy << "\n";
            std::cout << "logistic log " << res.logistic_log_accuracy << "\n";
            std::cout << "gbm raw " << res.gbm_raw_accuracy << "\n";
            std::cout << "ols coefficients";
            for (double c : res.ols.coefficients) std::cout << " " << c;
            std::cout << " intercept " << res.ols.intercept << "\n";
            return 0;
        }
        if (*report) {
            auto m = shaml::RunManifest::load(manifest_path);
            std::cout << m.to_json().dump(2) << "\n";
            return 0;
        }
    } catch (const shaml::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const shaml::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
