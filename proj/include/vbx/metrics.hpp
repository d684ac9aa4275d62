#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vbx/dataset.hpp"

namespace vbx {

struct ConfusionMatrix {
    int n_classes = 0;
    std::vector<std::int64_t> counts; // counts[true * n_classes + pred]

    std::int64_t at(int t, int p) const {
        return counts[static_cast<std::size_t>(t) * n_classes + p];
    }
    std::int64_t& at(int t, int p) { return counts[static_cast<std::size_t>(t) * n_classes + p]; }
    std::int64_t total() const;
    std::int64_t trace() const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ClassReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

struct RocCurve {
    int class_index = 0;
    std::vector<std::pair<double, double>> points; // (fpr, tpr), from (0,0) to (1,1)
    double auc = 0.0;
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int n_classes);

// Per-class precision/recall/F1 with the 0/0 -> 0 convention; macro-F1
// averages over all configured classes. The macro average is accumulated as
// an exact rational over the integer counts and rounded once at the end.
ClassReport class_report(const ConfusionMatrix& cm);

// One-vs-rest ROC for class c: thresholds sweep the unique scores in
// descending order, predictions are score >= threshold, AUC by trapezoid.
// Throws UndefinedAucError when the class has no positives or no negatives.
RocCurve roc_ovr(const std::vector<int>& y_true, const std::vector<std::vector<double>>& scores,
                 int class_index);

struct PerClassEntry {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;
    std::optional<std::vector<std::pair<double, double>>> roc_points;
};

struct EvalReport {
    std::string model_id;
    std::string split;
    std::int64_t n = 0;
    std::int64_t errors = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<PerClassEntry> per_class;
    ConfusionMatrix confusion;
    std::optional<double> macro_auc;
    std::string score_kind; // "softmax" or "vote_fraction"
};

nlohmann::json report_to_json(const EvalReport& report);

struct EvalOptions {
    std::string model_id;
    std::string split_name;
    std::string score_kind = "softmax";
    bool with_roc = false;
    std::vector<std::string> class_names;
};

// Runs the predictor over every sample, tallying per-sample failures instead
// of dropping them silently. `predictor` returns one score per class; the
// predicted class is the argmax (first maximum on ties).
EvalReport evaluate_model(const std::function<std::vector<double>(const LabeledSample&)>& predictor,
                          const std::vector<LabeledSample>& samples, int n_classes,
                          const EvalOptions& options);

// First index of the maximum value.
int argmax(const std::vector<double>& values);

std::vector<double> softmax(const std::vector<double>& logits);

} // namespace vbx
