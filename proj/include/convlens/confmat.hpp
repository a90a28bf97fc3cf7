#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlens {

/// Square matrix of classification counts. Rows are true classes, columns
/// are predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix(std::vector<std::string> labels,
                    std::vector<std::vector<std::uint64_t>> cells)
        : labels_(std::move(labels)), cells_(std::move(cells)) {
        validate();
    }

    std::size_t size() const { return cells_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::vector<std::uint64_t>>& cells() const { return cells_; }
    std::uint64_t at(std::size_t i, std::size_t j) const { return cells_[i][j]; }

    std::uint64_t row_sum(std::size_t i) const {
        std::uint64_t s = 0;
        for (std::uint64_t v : cells_[i]) s += v;
        return s;
    }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < size(); ++i) s += row_sum(i);
        return s;
    }

    /// Jointly permute rows and columns: result[p][q] = cells[order[p]][order[q]].
    ConfusionMatrix permuted(const std::vector<std::size_t>& order) const {
        if (order.size() != size())
            throw std::invalid_argument("permutation length does not match matrix size");
        std::vector<std::string> lab(size());
        std::vector<std::vector<std::uint64_t>> out(size(), std::vector<std::uint64_t>(size()));
        for (std::size_t p = 0; p < size(); ++p) {
            lab[p] = labels_[order[p]];
            for (std::size_t q = 0; q < size(); ++q)
                out[p][q] = cells_[order[p]][order[q]];
        }
        return ConfusionMatrix(std::move(lab), std::move(out));
    }

private:
    void validate() const {
        const std::size_t k = cells_.size();
        if (k < 2) throw std::invalid_argument("confusion matrix needs at least 2 classes");
        if (labels_.size() != k)
            throw std::invalid_argument("label count does not match matrix size");
        std::uint64_t total = 0;
        for (const auto& row : cells_) {
            if (row.size() != k) throw std::invalid_argument("confusion matrix is not square");
            for (std::uint64_t v : row) total += v;
        }
        if (total == 0) throw std::invalid_argument("confusion matrix is all-zero");
        std::vector<std::string> sorted = labels_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("class labels must be unique");
    }

    std::vector<std::string> labels_;
    std::vector<std::vector<std::uint64_t>> cells_;
};

struct MetricsReport {
    double accuracy = 0.0;
    double mean_accuracy = 0.0;
    std::vector<double> sensitivity;              // s(k) = c_kk / r(k)
    std::vector<std::vector<double>> confusability; // row-normalized counts
    bool skew_flag = false;
    double epsilon = 0.0;
};

/// Tally argmax predictions into a confusion matrix. Ties go to the lowest
/// index.
inline ConfusionMatrix build_confusion(const std::vector<std::vector<double>>& predictions,
                                       const std::vector<std::size_t>& true_labels,
                                       const std::vector<std::string>& labels) {
    const std::size_t k = labels.size();
    if (predictions.empty()) throw std::invalid_argument("no prediction rows");
    if (predictions.size() != true_labels.size())
        throw std::invalid_argument("prediction and label counts differ");
    std::vector<std::vector<std::uint64_t>> cells(k, std::vector<std::uint64_t>(k, 0));
    for (std::size_t n = 0; n < predictions.size(); ++n) {
        const auto& row = predictions[n];
        if (row.size() != k) throw std::invalid_argument("ragged prediction row");
        if (true_labels[n] >= k) throw std::invalid_argument("true label out of range");
        std::size_t arg = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (row[j] > row[arg]) arg = j;
        cells[true_labels[n]][arg] += 1;
    }
    return ConfusionMatrix(labels, std::move(cells));
}

/// Accuracy, mean accuracy, sensitivities, confusability and the skew check.
/// Classes with an empty row are excluded from the mean accuracy.
inline MetricsReport metrics(const ConfusionMatrix& c, double epsilon = 0.01) {
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw std::invalid_argument("epsilon must be in [0, 1)");
    const std::size_t k = c.size();
    MetricsReport rep;
    rep.epsilon = epsilon;
    rep.sensitivity.assign(k, 0.0);
    rep.confusability.assign(k, std::vector<double>(k, 0.0));

    std::uint64_t diag = 0, total = 0, max_row = 0;
    double mean_acc = 0.0;
    std::size_t populated = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint64_t r = c.row_sum(i);
        diag += c.at(i, i);
        total += r;
        max_row = std::max(max_row, r);
        if (r > 0) {
            rep.sensitivity[i] = static_cast<double>(c.at(i, i)) / static_cast<double>(r);
            for (std::size_t j = 0; j < k; ++j)
                rep.confusability[i][j] =
                    static_cast<double>(c.at(i, j)) / static_cast<double>(r);
            mean_acc += rep.sensitivity[i];
            ++populated;
        }
    }
    rep.accuracy = static_cast<double>(diag) / static_cast<double>(total);
    rep.mean_accuracy = populated ? mean_acc / static_cast<double>(populated) : 0.0;
    rep.skew_flag =
        rep.accuracy <= static_cast<double>(max_row) / static_cast<double>(total) + epsilon;
    return rep;
}

/// Regularized cross-entropy: data term plus l1/l2 penalties over the weights.
/// Outputs are clamped into [clamp_eps, 1 - clamp_eps] before the logarithms.
inline double cross_entropy_loss(const std::vector<std::vector<double>>& outputs,
                                 const std::vector<std::vector<double>>& targets,
                                 std::span<const double> weights = {},
                                 double lambda1 = 0.0, double lambda2 = 0.0,
                                 double clamp_eps = 1e-7) {
    if (outputs.empty()) throw std::invalid_argument("empty output set");
    if (outputs.size() != targets.size())
        throw std::invalid_argument("output and target counts differ");
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw std::invalid_argument("regularization weights must be non-negative");
    if (clamp_eps <= 0.0) throw std::invalid_argument("clamp_eps must be positive");

    double data = 0.0;
    for (std::size_t n = 0; n < outputs.size(); ++n) {
        if (outputs[n].size() != targets[n].size())
            throw std::invalid_argument("output and target shapes differ");
        for (std::size_t j = 0; j < outputs[n].size(); ++j) {
            const double o = std::clamp(outputs[n][j], clamp_eps, 1.0 - clamp_eps);
            const double t = targets[n][j];
            data -= t * std::log(o) + (1.0 - t) * std::log(1.0 - o);
        }
    }
    double l1 = 0.0, l2 = 0.0;
    for (double w : weights) {
        l1 += std::abs(w);
        l2 += w * w;
    }
    return data + lambda1 * l1 + lambda2 * l2;
}

} // namespace convlens
