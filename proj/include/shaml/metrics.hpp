#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shaml/matrix.hpp"

namespace shaml {

struct ThresholdPoint {
    double threshold = 0.0;
    std::optional<double> accuracy;  // absent when the subset is empty
    std::size_t support = 0;
};

struct EvaluationReport {
    double accuracy = 0.0;
    double mcc = 0.0;
    Matrix confusion;                 // class x class counts
    std::vector<double> class_values; // row/column labels of the confusion matrix
    std::size_t n = 0;
    std::vector<ThresholdPoint> threshold_curve;
};

double accuracy(const std::vector<double>& pred, const std::vector<double>& truth);

// Binary MCC; defined as 0 when any denominator factor vanishes (a constant
// predictor scores 0). Inputs must be 0/1 labels.
double mcc(const std::vector<double>& pred, const std::vector<double>& truth);

// MCC for multi-valued |Sha| after binarizing to trivial (value 1) vs not.
double mcc_trivial_vs_not(const std::vector<double>& pred, const std::vector<double>& truth);

// nearest positive integer, ties rounded half away from zero, clamped to >= 1
long long round_sqrt_sha(double prediction);

std::vector<ThresholdPoint> threshold_accuracy_curve(const std::vector<double>& pred_sqrt,
                                                     const std::vector<double>& truth_sqrt,
                                                     const std::vector<double>& thresholds);

Matrix confusion_matrix(const std::vector<double>& pred, const std::vector<double>& truth,
                        std::vector<double>& class_values_out);

// accuracy + binarized MCC + confusion for rounded sqrt-|Sha| predictions
EvaluationReport evaluate_sqrt_sha(const std::vector<double>& pred_sqrt,
                                   const std::vector<double>& truth_sqrt,
                                   const std::vector<double>& thresholds = {});

}  // namespace shaml
