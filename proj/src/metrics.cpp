#include "vbx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vbx/error.hpp"

namespace vbx {

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (int i = 0; i < n_classes; ++i) t += at(i, i);
    return t;
}

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                          int n_classes) {
    if (y_true.size() != y_pred.size()) {
        throw ShapeError("confusion: y_true and y_pred lengths differ");
    }
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
            throw RangeError("confusion: label out of range");
        }
        cm.at(t, p)++;
    }
    return cm;
}

namespace {

// Exact rational accumulator over int64 numerators/denominators. Keeps the
// macro average bit-for-bit equal to the hand-derived fraction on worked
// examples instead of drifting by an ulp per addition.
struct Rational {
    __int128 num = 0;
    __int128 den = 1;

    void add(std::int64_t n, std::int64_t d) {
        num = num * d + den * n;
        den *= d;
        reduce();
    }

    void reduce() {
        __int128 a = num < 0 ? -num : num;
        __int128 b = den;
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            num /= a;
            den /= a;
        }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

} // namespace

ClassReport class_report(const ConfusionMatrix& cm) {
    ClassReport report;
    report.per_class.resize(static_cast<std::size_t>(cm.n_classes));

    Rational macro;
    for (int c = 0; c < cm.n_classes; ++c) {
        std::int64_t tp = cm.at(c, c), fp = 0, fn = 0;
        for (int o = 0; o < cm.n_classes; ++o) {
            if (o == c) continue;
            fp += cm.at(o, c);
            fn += cm.at(c, o);
        }
        ClassMetrics& m = report.per_class[static_cast<std::size_t>(c)];
        m.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        const std::int64_t f1_den = 2 * tp + fp + fn;
        m.f1 = f1_den > 0 ? static_cast<double>(2 * tp) / static_cast<double>(f1_den) : 0.0;
        macro.add(f1_den > 0 ? 2 * tp : 0, f1_den > 0 ? f1_den : 1);
    }
    macro.den *= cm.n_classes;
    macro.reduce();
    report.macro_f1 = cm.n_classes > 0 ? macro.value() : 0.0;

    const std::int64_t total = cm.total();
    report.accuracy = total > 0 ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
    return report;
}

RocCurve roc_ovr(const std::vector<int>& y_true, const std::vector<std::vector<double>>& scores,
                 int class_index) {
    if (y_true.size() != scores.size()) throw ShapeError("roc_ovr: length mismatch");

    std::vector<std::pair<double, bool>> ranked; // (score, is_positive)
    std::int64_t positives = 0, negatives = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double s = scores[i][static_cast<std::size_t>(class_index)];
        if (!std::isfinite(s)) throw RangeError("roc_ovr: non-finite score");
        const bool pos = y_true[i] == class_index;
        ranked.emplace_back(s, pos);
        (pos ? positives : negatives)++;
    }
    if (positives == 0 || negatives == 0) {
        throw UndefinedAucError("roc_ovr: class " + std::to_string(class_index) +
                                " lacks positives or negatives");
    }

    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    RocCurve curve;
    curve.class_index = class_index;
    curve.points.emplace_back(0.0, 0.0);
    double auc = 0.0;
    std::int64_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < ranked.size()) {
        // Group tied scores so ties contribute a single diagonal segment.
        const double s = ranked[i].first;
        while (i < ranked.size() && ranked[i].first == s) {
            (ranked[i].second ? tp : fp)++;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
        const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
        curve.points.emplace_back(fpr, tpr);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    curve.auc = auc;
    return curve;
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["model_id"] = report.model_id;
    j["split"] = report.split;
    j["n"] = report.n;
    j["errors"] = report.errors;
    j["accuracy"] = report.accuracy;
    j["macro_f1"] = report.macro_f1;
    j["score_kind"] = report.score_kind;

    nlohmann::json per_class = nlohmann::json::array();
    for (const PerClassEntry& e : report.per_class) {
        nlohmann::json c;
        c["name"] = e.name;
        c["precision"] = e.precision;
        c["recall"] = e.recall;
        c["f1"] = e.f1;
        if (e.auc) c["auc"] = *e.auc;
        if (e.roc_points) {
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& [fpr, tpr] : *e.roc_points) pts.push_back({fpr, tpr});
            c["roc_points"] = pts;
        }
        per_class.push_back(c);
    }
    j["per_class"] = per_class;

    nlohmann::json cmj = nlohmann::json::array();
    for (int t = 0; t < report.confusion.n_classes; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int p = 0; p < report.confusion.n_classes; ++p) row.push_back(report.confusion.at(t, p));
        cmj.push_back(row);
    }
    j["confusion"] = cmj;
    if (report.macro_auc) j["macro_auc"] = *report.macro_auc;
    return j;
}

int argmax(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

EvalReport evaluate_model(const std::function<std::vector<double>(const LabeledSample&)>& predictor,
                          const std::vector<LabeledSample>& samples, int n_classes,
                          const EvalOptions& options) {
    if (samples.empty()) throw ConfigError("evaluate_model: empty sample list");

    std::vector<int> y_true, y_pred;
    std::vector<std::vector<double>> all_scores;
    std::int64_t errors = 0;
    for (const LabeledSample& sample : samples) {
        try {
            std::vector<double> scores = predictor(sample);
            if (static_cast<int>(scores.size()) != n_classes) {
                throw ShapeError("predictor returned wrong score count");
            }
            y_true.push_back(sample.class_index);
            y_pred.push_back(argmax(scores));
            all_scores.push_back(std::move(scores));
        } catch (const std::exception&) {
            ++errors;
        }
    }

    EvalReport report;
    report.model_id = options.model_id;
    report.split = options.split_name;
    report.score_kind = options.score_kind;
    report.n = static_cast<std::int64_t>(y_true.size());
    report.errors = errors;
    report.confusion = confusion(y_true, y_pred, n_classes);
    const ClassReport cr = class_report(report.confusion);
    report.accuracy = cr.accuracy;
    report.macro_f1 = cr.macro_f1;

    double auc_sum = 0.0;
    int auc_count = 0;
    for (int c = 0; c < n_classes; ++c) {
        PerClassEntry entry;
        entry.name = c < static_cast<int>(options.class_names.size())
                         ? options.class_names[static_cast<std::size_t>(c)]
                         : "class_" + std::to_string(c);
        entry.precision = cr.per_class[static_cast<std::size_t>(c)].precision;
        entry.recall = cr.per_class[static_cast<std::size_t>(c)].recall;
        entry.f1 = cr.per_class[static_cast<std::size_t>(c)].f1;
        if (options.with_roc) {
            try {
                RocCurve curve = roc_ovr(y_true, all_scores, c);
                entry.auc = curve.auc;
                entry.roc_points = std::move(curve.points);
                auc_sum += *entry.auc;
                ++auc_count;
            } catch (const UndefinedAucError&) {
                // class absent from this split; AUC stays undefined
            }
        }
        report.per_class.push_back(std::move(entry));
    }
    if (auc_count > 0) report.macro_auc = auc_sum / auc_count;
    return report;
}

} // namespace vbx
