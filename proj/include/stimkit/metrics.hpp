#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimkit/core.hpp"

namespace stimkit {

struct Prediction {
    std::string clip_id;
    ClassLabel true_label = ClassLabel::ArmFlapping;
    ClassLabel pred_label = ClassLabel::ArmFlapping;
    std::optional<std::array<double, kNumClasses>> probs;

    bool operator==(const Prediction&) const = default;
};

/// confusion[t][p] counts samples with true class t predicted as p.
using ConfusionMatrix = std::array<std::array<long long, kNumClasses>, kNumClasses>;

inline ConfusionMatrix confusion_matrix(std::span<const Prediction> preds) {
    ConfusionMatrix m{};
    for (const Prediction& p : preds)
        ++m[static_cast<std::size_t>(class_index(p.true_label))]
          [static_cast<std::size_t>(class_index(p.pred_label))];
    return m;
}

inline double accuracy(std::span<const Prediction> preds) {
    if (preds.empty()) throw std::invalid_argument("accuracy: no predictions");
    long long correct = 0;
    for (const Prediction& p : preds) correct += p.true_label == p.pred_label;
    return static_cast<double>(correct) / static_cast<double>(preds.size());
}

struct ClassMetrics {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long support = 0;  // tp + fn
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // false when the corresponding ratio was 0/0 and collapsed to 0
    bool precision_defined = false;
    bool recall_defined = false;
    bool f1_defined = false;
};

inline ClassMetrics class_metrics(const ConfusionMatrix& m, ClassLabel label) {
    const auto k = static_cast<std::size_t>(class_index(label));
    ClassMetrics cm;
    cm.tp = m[k][k];
    for (std::size_t j = 0; j < kNumClasses; ++j) {
        if (j == k) continue;
        cm.fn += m[k][j];
        cm.fp += m[j][k];
    }
    cm.support = cm.tp + cm.fn;
    cm.precision_defined = cm.tp + cm.fp > 0;
    cm.recall_defined = cm.support > 0;
    if (cm.precision_defined) cm.precision = static_cast<double>(cm.tp) / (cm.tp + cm.fp);
    if (cm.recall_defined) cm.recall = static_cast<double>(cm.tp) / cm.support;
    cm.f1_defined = cm.precision + cm.recall > 0.0;
    if (cm.f1_defined)
        cm.f1 = 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall);
    return cm;
}

/// Mean negative natural log-likelihood of the true class. Probabilities are
/// clamped into [1e-12, 1] before the log. Every prediction must carry a
/// probability vector.
inline double cross_entropy(std::span<const Prediction> preds) {
    if (preds.empty()) throw std::invalid_argument("cross_entropy: no predictions");
    double sum = 0.0;
    for (const Prediction& p : preds) {
        if (!p.probs)
            throw std::invalid_argument("cross_entropy: prediction '" + p.clip_id +
                                        "' has no probabilities");
        double q = (*p.probs)[static_cast<std::size_t>(class_index(p.true_label))];
        if (!std::isfinite(q) || q < 0.0)
            throw std::invalid_argument("cross_entropy: bad probability for '" + p.clip_id + "'");
        q = std::min(std::max(q, 1e-12), 1.0);
        sum -= std::log(q);
    }
    return sum / static_cast<double>(preds.size());
}

struct EvalReport {
    long long total = 0;
    double accuracy = 0.0;
    ConfusionMatrix confusion{};
    std::array<ClassMetrics, kNumClasses> per_class{};
    std::optional<double> cross_entropy;  // present when every row has probabilities
};

inline EvalReport evaluate(std::span<const Prediction> preds) {
    EvalReport r;
    r.total = static_cast<long long>(preds.size());
    r.accuracy = accuracy(preds);
    r.confusion = confusion_matrix(preds);
    for (ClassLabel label : kAllClasses)
        r.per_class[static_cast<std::size_t>(class_index(label))] =
            class_metrics(r.confusion, label);
    bool all_probs = true;
    for (const Prediction& p : preds) all_probs = all_probs && p.probs.has_value();
    if (all_probs) r.cross_entropy = cross_entropy(preds);
    return r;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
    nlohmann::json confusion = nlohmann::json::array();
    for (std::size_t t = 0; t < kNumClasses; ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t p = 0; p < kNumClasses; ++p) row.push_back(r.confusion[t][p]);
        confusion.push_back(std::move(row));
    }
    nlohmann::json per_class = nlohmann::json::object();
    for (ClassLabel label : kAllClasses) {
        const ClassMetrics& cm = r.per_class[static_cast<std::size_t>(class_index(label))];
        per_class[std::string(class_name(label))] =
            nlohmann::json{{"support", cm.support},
                           {"tp", cm.tp},
                           {"fp", cm.fp},
                           {"fn", cm.fn},
                           {"precision", cm.precision},
                           {"recall", cm.recall},
                           {"accuracy", cm.recall},  // per-class accuracy is recall
                           {"f1", cm.f1},
                           {"precision_defined", cm.precision_defined},
                           {"recall_defined", cm.recall_defined},
                           {"f1_defined", cm.f1_defined}};
    }
    nlohmann::json j{{"total", r.total},
                     {"accuracy", r.accuracy},
                     {"confusion", std::move(confusion)},
                     {"per_class", std::move(per_class)}};
    if (r.cross_entropy) j["cross_entropy"] = *r.cross_entropy;
    return j;
}

namespace detail {

inline ClassLabel parse_label_token(const std::string& token) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(token, &used);
        if (used == token.size()) return class_from_index(v);
    } catch (const std::exception&) {
        // fall through to name lookup
    }
    return class_from_name(token);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        std::size_t b = field.find_first_not_of(' ');
        fields.push_back(b == std::string::npos ? std::string() : field.substr(b));
    }
    if (!line.empty() && line.find_last_of(',') == line.size() - 1) fields.emplace_back();
    return fields;
}

}  // namespace detail

/// Predictions CSV. Header must be either
/// `clip_id,true_label,pred_label,p0,p1,p2` or the first three columns
/// alone; labels may be class names or indices.
inline std::vector<Prediction> parse_predictions_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("predictions: empty file");
    {
        const auto header = detail::split_csv_line(line);
        const std::vector<std::string> with_probs = {"clip_id", "true_label", "pred_label",
                                                     "p0", "p1", "p2"};
        const std::vector<std::string> bare = {"clip_id", "true_label", "pred_label"};
        if (header != with_probs && header != bare)
            throw std::runtime_error(
                "predictions: header must be 'clip_id,true_label,pred_label[,p0,p1,p2]'");
    }
    std::vector<Prediction> preds;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != 3 && fields.size() != 6)
            throw std::runtime_error("predictions line " + std::to_string(line_no) +
                                     ": expected 3 or 6 fields, got " +
                                     std::to_string(fields.size()));
        try {
            Prediction p;
            p.clip_id = fields[0];
            p.true_label = detail::parse_label_token(fields[1]);
            p.pred_label = detail::parse_label_token(fields[2]);
            if (fields.size() == 6) {
                std::array<double, kNumClasses> probs{};
                for (std::size_t k = 0; k < kNumClasses; ++k) {
                    std::size_t used = 0;
                    probs[k] = std::stod(fields[3 + k], &used);
                    if (used != fields[3 + k].size())
                        throw std::invalid_argument("bad probability '" + fields[3 + k] + "'");
                }
                p.probs = probs;
            }
            preds.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw std::runtime_error("predictions line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    if (preds.empty()) throw std::runtime_error("predictions: no data rows");
    return preds;
}

inline std::vector<Prediction> parse_predictions_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_predictions_csv(in);
}

/// CSV writer for the same format parse_predictions_csv reads.
inline std::string predictions_to_csv(std::span<const Prediction> preds) {
    bool any_probs = false;
    for (const Prediction& p : preds) any_probs = any_probs || p.probs.has_value();
    std::ostringstream out;
    out << "clip_id,true_label,pred_label";
    if (any_probs) out << ",p0,p1,p2";
    out << "\n";
    out.precision(17);
    for (const Prediction& p : preds) {
        out << p.clip_id << ',' << class_name(p.true_label) << ',' << class_name(p.pred_label);
        if (any_probs) {
            if (!p.probs)
                throw std::invalid_argument("predictions_to_csv: mixed rows with and without "
                                            "probabilities");
            for (double q : *p.probs) out << ',' << q;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace stimkit
