#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "confmat.hpp"
#include "ordering.hpp"

namespace convlens {

/// Contiguous [first, last] range of display positions.
struct ClusterRange {
    std::size_t first = 0;
    std::size_t last = 0;
};

struct ClusterPlan {
    Permutation order;
    std::vector<std::uint64_t> strengths; // K-1 adjacency strengths on the ordered matrix
    std::uint64_t threshold = 0;
    std::vector<ClusterRange> clusters;
};

/// Adjacency strengths a_i = C'[i][i+1] + C'[i+1][i] on the ordered matrix.
inline std::vector<std::uint64_t> adjacency_strengths(const ConfusionMatrix& c,
                                                      const Permutation& order) {
    if (order.size() != c.size())
        throw std::invalid_argument("permutation length does not match matrix size");
    std::vector<std::uint64_t> strengths(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i)
        strengths[i] = c.at(order[i], order[i + 1]) + c.at(order[i + 1], order[i]);
    return strengths;
}

/// Cut between adjacent display positions whose strength falls below theta.
inline ClusterPlan split_by_threshold(const ConfusionMatrix& c, const Permutation& order,
                                      std::uint64_t theta) {
    ClusterPlan plan;
    plan.order = order;
    plan.strengths = adjacency_strengths(c, order);
    plan.threshold = theta;
    ClusterRange cur{0, 0};
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        if (plan.strengths[i] < theta) {
            plan.clusters.push_back(cur);
            cur.first = i + 1;
        }
        cur.last = i + 1;
    }
    plan.clusters.push_back(cur);
    return plan;
}

/// Smallest theta (drawn from the strength values, or max+1) such that the
/// fraction of pairs at or above it does not exceed fraction_above.
inline std::uint64_t percentile_threshold(const std::vector<std::uint64_t>& strengths,
                                          double fraction_above) {
    if (strengths.empty()) throw std::invalid_argument("empty strength list");
    if (fraction_above <= 0.0 || fraction_above > 1.0)
        throw std::invalid_argument("fraction_above must be in (0, 1]");
    std::vector<std::uint64_t> candidates(strengths.begin(), strengths.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(candidates.back() + 1);
    const double n = static_cast<double>(strengths.size());
    for (std::uint64_t theta : candidates) {
        std::size_t above = 0;
        for (std::uint64_t a : strengths)
            if (a >= theta) ++above;
        if (static_cast<double>(above) / n <= fraction_above) return theta;
    }
    return candidates.back(); // unreachable: count at max+1 is zero
}

/// Asks yes/no questions; arguments are the class names of the adjacent pair
/// being probed. Returns true when the classes belong to one cluster.
using Responder = std::function<bool(const std::string& left, const std::string& right)>;

/// Binary search over the distinct strength values using log(m) yes/no
/// decisions. "Yes" bounds theta at or below that strength, "no" above it;
/// the result is (largest "no" strength) + 1, or 0 if every answer was yes.
inline std::uint64_t interactive_threshold(const ConfusionMatrix& c, const Permutation& order,
                                           const Responder& responder,
                                           std::size_t* query_count = nullptr) {
    const std::vector<std::uint64_t> strengths = adjacency_strengths(c, order);
    std::vector<std::uint64_t> distinct(strengths.begin(), strengths.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::size_t queries = 0;
    std::uint64_t largest_no = 0;
    bool any_no = false;
    std::size_t lo = 0, hi = distinct.size(); // candidate window into distinct values
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        const std::uint64_t value = distinct[mid];
        // Present the adjacent pair carrying this strength.
        std::size_t pair = 0;
        while (strengths[pair] != value) ++pair;
        ++queries;
        const bool same = responder(c.labels()[order[pair]], c.labels()[order[pair + 1]]);
        if (same) {
            hi = mid;
        } else {
            any_no = true;
            largest_no = std::max(largest_no, value);
            lo = mid + 1;
        }
    }
    if (query_count) *query_count = queries;
    return any_no ? largest_no + 1 : 0;
}

/// Flat clustering: disjoint groups of class names.
struct Clustering {
    std::vector<std::vector<std::string>> groups;
};

/// Class-name groups extracted from a plan.
inline Clustering plan_groups(const ConfusionMatrix& c, const ClusterPlan& plan) {
    Clustering out;
    for (const ClusterRange& r : plan.clusters) {
        std::vector<std::string> g;
        for (std::size_t p = r.first; p <= r.last; ++p)
            g.push_back(c.labels()[plan.order[p]]);
        out.groups.push_back(std::move(g));
    }
    return out;
}

struct ClusterErrorReport {
    std::vector<std::uint64_t> per_group; // one entry per coarse group, in order
    std::uint64_t total = 0;
};

/// Score a candidate clustering against coarse ground-truth groups. For each
/// coarse group the error is (touched candidate groups - 1) plus the foreign
/// classes pulled in by those groups.
inline ClusterErrorReport cluster_error(const Clustering& candidate, const Clustering& coarse) {
    std::set<std::string> universe;
    for (const auto& g : candidate.groups) universe.insert(g.begin(), g.end());

    ClusterErrorReport rep;
    for (const auto& coarse_group : coarse.groups) {
        const std::set<std::string> target(coarse_group.begin(), coarse_group.end());
        for (const auto& name : target)
            if (!universe.count(name))
                throw std::invalid_argument("coarse class missing from candidate: " + name);
        std::size_t touched = 0;
        std::set<std::string> merged;
        for (const auto& g : candidate.groups) {
            const bool intersects =
                std::any_of(g.begin(), g.end(),
                            [&](const std::string& name) { return target.count(name) > 0; });
            if (intersects) {
                ++touched;
                merged.insert(g.begin(), g.end());
            }
        }
        std::uint64_t foreign = 0;
        for (const auto& name : merged)
            if (!target.count(name)) ++foreign;
        const std::uint64_t err = static_cast<std::uint64_t>(touched - 1) + foreign;
        rep.per_group.push_back(err);
        rep.total += err;
    }
    return rep;
}

} // namespace convlens
