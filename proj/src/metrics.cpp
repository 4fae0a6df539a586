#include "shaml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shaml/errors.hpp"

namespace shaml {

double accuracy(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("accuracy");
    if (pred.empty()) throw Empty("accuracy on empty vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double mcc(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("mcc");
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0.0;
        const bool t = truth[i] != 0.0;
        if (p && t)
            ++tp;
        else if (!p && !t)
            ++tn;
        else if (p && !t)
            ++fp;
        else
            ++fn;
    }
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

double mcc_trivial_vs_not(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("mcc_trivial_vs_not");
    std::vector<double> p(pred.size()), t(truth.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        p[i] = pred[i] == 1.0 ? 0.0 : 1.0;  // positive class: nontrivial Sha
        t[i] = truth[i] == 1.0 ? 0.0 : 1.0;
    }
    return mcc(p, t);
}

long long round_sqrt_sha(double prediction) {
    if (!std::isfinite(prediction)) throw NonFinite("round_sqrt_sha");
    const long long r = std::llround(prediction);  // half away from zero
    return std::max<long long>(1, r);
}

std::vector<ThresholdPoint> threshold_accuracy_curve(const std::vector<double>& pred_sqrt,
                                                     const std::vector<double>& truth_sqrt,
                                                     const std::vector<double>& thresholds) {
    if (pred_sqrt.size() != truth_sqrt.size()) throw LengthMismatch("threshold_accuracy_curve");
    std::vector<ThresholdPoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        ThresholdPoint pt;
        pt.threshold = t;
        std::size_t hits = 0;
        for (std::size_t i = 0; i < truth_sqrt.size(); ++i) {
            if (truth_sqrt[i] < t) continue;
            ++pt.support;
            if (round_sqrt_sha(pred_sqrt[i]) == round_sqrt_sha(truth_sqrt[i])) ++hits;
        }
        if (pt.support > 0)
            pt.accuracy = static_cast<double>(hits) / static_cast<double>(pt.support);
        out.push_back(pt);
    }
    return out;
}

Matrix confusion_matrix(const std::vector<double>& pred, const std::vector<double>& truth,
                        std::vector<double>& class_values_out) {
    if (pred.size() != truth.size()) throw LengthMismatch("confusion_matrix");
    std::set<double> classes(pred.begin(), pred.end());
    classes.insert(truth.begin(), truth.end());
    class_values_out.assign(classes.begin(), classes.end());
    const std::size_t k = class_values_out.size();
    auto index = [&](double v) {
        return static_cast<std::size_t>(
            std::lower_bound(class_values_out.begin(), class_values_out.end(), v) -
            class_values_out.begin());
    };
    Matrix c(k, k);
    for (std::size_t i = 0; i < pred.size(); ++i) c(index(truth[i]), index(pred[i])) += 1.0;
    return c;
}

EvaluationReport evaluate_sqrt_sha(const std::vector<double>& pred_sqrt,
                                   const std::vector<double>& truth_sqrt,
                                   const std::vector<double>& thresholds) {
    if (pred_sqrt.size() != truth_sqrt.size()) throw LengthMismatch("evaluate_sqrt_sha");
    std::vector<double> pred(pred_sqrt.size()), truth(truth_sqrt.size());
    for (std::size_t i = 0; i < pred_sqrt.size(); ++i) {
        pred[i] = static_cast<double>(round_sqrt_sha(pred_sqrt[i]));
        truth[i] = static_cast<double>(round_sqrt_sha(truth_sqrt[i]));
    }
    EvaluationReport rep;
    rep.n = pred.size();
    rep.accuracy = accuracy(pred, truth);
    rep.mcc = mcc_trivial_vs_not(pred, truth);
    rep.confusion = confusion_matrix(pred, truth, rep.class_values);
    if (!thresholds.empty())
        rep.threshold_curve = threshold_accuracy_curve(pred_sqrt, truth_sqrt, thresholds);
    return rep;
}

}  // namespace shaml
