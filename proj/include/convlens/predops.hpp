#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlens {

/// Row-stochastic N x K prediction rows.
struct PredictionSet {
    std::vector<std::vector<double>> rows;

    std::size_t samples() const { return rows.size(); }
    std::size_t classes() const { return rows.empty() ? 0 : rows[0].size(); }

    void validate(double tolerance = 1e-6) const {
        if (rows.empty()) throw std::invalid_argument("prediction set is empty");
        for (const auto& row : rows) {
            if (row.size() != rows[0].size())
                throw std::invalid_argument("ragged prediction rows");
            double sum = 0.0;
            for (double v : row) {
                if (v < 0.0 || v > 1.0)
                    throw std::invalid_argument("prediction outside [0, 1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > tolerance)
                throw std::invalid_argument("prediction row does not sum to 1");
        }
    }
};

inline PredictionSet ensemble_average(const std::vector<PredictionSet>& members) {
    if (members.empty()) throw std::invalid_argument("empty ensemble");
    const std::size_t n = members[0].samples();
    const std::size_t k = members[0].classes();
    for (const PredictionSet& m : members)
        if (m.samples() != n || m.classes() != k)
            throw std::invalid_argument("ensemble members have mismatched shapes");
    PredictionSet out;
    out.rows.assign(n, std::vector<double>(k, 0.0));
    for (const PredictionSet& m : members)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) out.rows[i][j] += m.rows[i][j];
    const double inv = 1.0 / static_cast<double>(members.size());
    for (auto& row : out.rows)
        for (double& v : row) v *= inv;
    return out;
}

/// t'(x) = alpha * t(x) + (1 - alpha) * y_E(x), element-wise.
inline PredictionSet smooth_labels(const PredictionSet& targets, const PredictionSet& ensemble,
                                   double alpha) {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0, 1]");
    if (targets.samples() != ensemble.samples() || targets.classes() != ensemble.classes())
        throw std::invalid_argument("target and ensemble shapes differ");
    PredictionSet out;
    out.rows = targets.rows;
    for (std::size_t i = 0; i < out.samples(); ++i)
        for (std::size_t j = 0; j < out.classes(); ++j)
            out.rows[i][j] = alpha * targets.rows[i][j] + (1.0 - alpha) * ensemble.rows[i][j];
    return out;
}

// ---------------------------------------------------------------------------
// Activation functions
// ---------------------------------------------------------------------------

struct ActivationValue {
    double value = 0.0;
    double derivative = 0.0;
};

/// Scalar activations with their derivatives. At non-differentiable points
/// the derivative is the right-hand limit.
inline ActivationValue activation(const std::string& name, double x, double alpha = 0.01) {
    auto logistic = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    if (name == "identity") return {x, 1.0};
    if (name == "logistic") {
        const double s = logistic(x);
        return {s, s * (1.0 - s)};
    }
    if (name == "logistic_minus") {
        const double s = logistic(x);
        return {s - 0.5, s * (1.0 - s)};
    }
    if (name == "tanh") {
        const double t = std::tanh(x);
        return {t, 1.0 - t * t};
    }
    if (name == "softsign") {
        const double d = 1.0 + std::abs(x);
        return {x / d, 1.0 / (d * d)};
    }
    if (name == "relu") return {std::max(0.0, x), x >= 0.0 ? 1.0 : 0.0};
    if (name == "relu_minus") return {std::max(-1.0, x), x >= -1.0 ? 1.0 : 0.0};
    if (name == "softplus") return {std::log1p(std::exp(x)), logistic(x)};
    if (name == "s2relu") {
        // ReLU(x/2 + 1) - ReLU(-x/2 + 1)
        const double a = std::max(0.0, x / 2.0 + 1.0);
        const double b = std::max(0.0, -x / 2.0 + 1.0);
        const double da = x / 2.0 + 1.0 >= 0.0 ? 0.5 : 0.0;
        const double db = -x / 2.0 + 1.0 >= 0.0 ? 0.5 : 0.0; // minus sign folded in
        return {a - b, da + db};
    }
    if (name == "lrelu" || name == "prelu") {
        if (alpha <= 0.0 || alpha >= 1.0)
            throw std::invalid_argument("alpha must be in (0, 1) for " + name);
        return {x >= 0.0 ? x : alpha * x, x >= 0.0 ? 1.0 : alpha};
    }
    if (name == "elu") {
        if (alpha <= 0.0 || alpha >= 1.0)
            throw std::invalid_argument("alpha must be in (0, 1) for elu");
        if (x >= 0.0) return {x, 1.0};
        return {alpha * (std::exp(x) - 1.0), alpha * std::exp(x)};
    }
    throw std::invalid_argument("unknown activation '" + name + "'");
}

/// Numerically stable softmax over a flat vector.
inline std::vector<double> softmax(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("softmax of empty vector");
    const double m = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline double maxout(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("maxout of empty vector");
    return *std::max_element(x.begin(), x.end());
}

// ---------------------------------------------------------------------------
// Filter correlation
// ---------------------------------------------------------------------------

/// k_w x k_h x d filter stored row-major as (width, height, channel) with the
/// first axis being the width.
struct FilterTensor {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t depth = 0;
    std::vector<double> values; // index: (x * height + y) * depth + c

    double at(std::size_t x, std::size_t y, std::size_t c) const {
        return values[(x * height + y) * depth + c];
    }

    void validate() const {
        if (width < 1 || height < 1 || depth < 1)
            throw std::invalid_argument("degenerate filter dimensions");
        if (values.size() != width * height * depth)
            throw std::invalid_argument("filter value count does not match dimensions");
    }

    double norm() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return std::sqrt(s);
    }
};

/// Maximum normalized inner product of `a` against all nonzero integer
/// translations of `b` within the (2k+1)^2 window, with zero fill.
inline double k_translation_correlation(const FilterTensor& a, const FilterTensor& b,
                                        std::size_t k) {
    a.validate();
    b.validate();
    if (a.width != b.width || a.height != b.height || a.depth != b.depth)
        throw std::invalid_argument("filter dimensions differ");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("zero-norm filter");

    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(a.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(a.height);
    const std::ptrdiff_t kk = static_cast<std::ptrdiff_t>(k);
    double best = -2.0;
    for (std::ptrdiff_t dx = -kk; dx <= kk; ++dx) {
        for (std::ptrdiff_t dy = -kk; dy <= kk; ++dy) {
            if (dx == 0 && dy == 0) continue;
            double dot = 0.0;
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                const std::ptrdiff_t sx = x - dx;
                if (sx < 0 || sx >= w) continue;
                for (std::ptrdiff_t y = 0; y < h; ++y) {
                    const std::ptrdiff_t sy = y - dy;
                    if (sy < 0 || sy >= h) continue;
                    for (std::size_t c = 0; c < a.depth; ++c)
                        dot += a.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) *
                               b.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy), c);
                }
            }
            best = std::max(best, dot / (na * nb));
        }
    }
    return best;
}

/// Mean over filters of the maximum correlation against every other filter.
inline double avg_max_translation_correlation(const std::vector<FilterTensor>& layer,
                                              std::size_t k) {
    if (layer.size() < 2) throw std::invalid_argument("need at least two filters");
    double sum = 0.0;
    for (std::size_t i = 0; i < layer.size(); ++i) {
        double best = -2.0;
        for (std::size_t j = 0; j < layer.size(); ++j) {
            if (j == i) continue;
            best = std::max(best, k_translation_correlation(layer[i], layer[j], k));
        }
        sum += best;
    }
    return sum / static_cast<double>(layer.size());
}

// ---------------------------------------------------------------------------
// Weight update tracking
// ---------------------------------------------------------------------------

/// Per-epoch, per-layer flat weight vectors. Layer shapes must stay constant
/// across epochs.
struct SnapshotSeries {
    std::vector<std::string> layer_names;
    std::vector<std::vector<std::vector<double>>> epochs; // [epoch][layer][weight]
};

struct UpdateStats {
    double mean = 0.0;
    double max = 0.0;
    double sum = 0.0;
};

/// Statistics of |delta w| per layer for each consecutive epoch pair.
/// Result shape: [interval][layer].
inline std::vector<std::vector<UpdateStats>> weight_update_stats(const SnapshotSeries& series) {
    if (series.epochs.size() < 2) throw std::invalid_argument("need at least two epochs");
    const std::size_t layers = series.layer_names.size();
    for (const auto& epoch : series.epochs) {
        if (epoch.size() != layers)
            throw std::invalid_argument("epoch layer count does not match names");
        for (std::size_t l = 0; l < layers; ++l)
            if (epoch[l].size() != series.epochs[0][l].size())
                throw std::invalid_argument("layer shape drift across epochs");
    }
    std::vector<std::vector<UpdateStats>> out;
    for (std::size_t e = 0; e + 1 < series.epochs.size(); ++e) {
        std::vector<UpdateStats> interval(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            UpdateStats s;
            const auto& before = series.epochs[e][l];
            const auto& after = series.epochs[e + 1][l];
            for (std::size_t w = 0; w < before.size(); ++w) {
                const double d = std::abs(after[w] - before[w]);
                s.sum += d;
                s.max = std::max(s.max, d);
            }
            s.mean = before.empty() ? 0.0 : s.sum / static_cast<double>(before.size());
            interval[l] = s;
        }
        out.push_back(std::move(interval));
    }
    return out;
}

} // namespace convlens
