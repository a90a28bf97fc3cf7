#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include "confmat.hpp"
#include "ordering.hpp"

namespace convlens {

struct HeatmapOptions {
    bool zero_diagonal = false;
    bool row_normalize = false;
    bool log_scale = false; // log1p the displayed values before mapping
    bool show_labels = false;
    double cell_px = 16.0;
};

namespace detail {

inline std::string fmt2(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Grayscale SVG heatmap of the reordered matrix. Deterministic: fixed
/// header, two-decimal coordinates, no timestamps. An all-zero display
/// (e.g. a diagonal matrix with zero_diagonal) renders all-white.
inline std::string heatmap(const ConfusionMatrix& c, const Permutation& order,
                           const HeatmapOptions& opt = {}) {
    const std::size_t k = c.size();
    if (!is_valid_permutation(order) || order.size() != k)
        throw std::invalid_argument("invalid permutation for heatmap");

    // Displayed values after reordering, zeroing and normalization.
    std::vector<std::vector<double>> disp(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            disp[i][j] = static_cast<double>(c.at(order[i], order[j]));
        if (opt.zero_diagonal) disp[i][i] = 0.0;
        if (opt.row_normalize) {
            double sum = 0.0;
            for (double v : disp[i]) sum += v;
            if (sum > 0.0)
                for (double& v : disp[i]) v /= sum;
        }
    }
    double vmax = 0.0;
    for (auto& row : disp)
        for (double& v : row) {
            if (opt.log_scale) v = std::log1p(v);
            vmax = std::max(vmax, v);
        }

    const double margin = opt.show_labels ? 4.0 * opt.cell_px : 0.0;
    const double side = margin + opt.cell_px * static_cast<double>(k);
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << detail::fmt2(side) << "\" height=\"" << detail::fmt2(side) << "\">\n";
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const int shade =
                vmax > 0.0 ? static_cast<int>(std::lround(255.0 * (1.0 - disp[i][j] / vmax)))
                           : 255;
            svg << "<rect x=\"" << detail::fmt2(margin + opt.cell_px * static_cast<double>(j))
                << "\" y=\"" << detail::fmt2(margin + opt.cell_px * static_cast<double>(i))
                << "\" width=\"" << detail::fmt2(opt.cell_px) << "\" height=\""
                << detail::fmt2(opt.cell_px) << "\" fill=\"rgb(" << shade << ',' << shade << ','
                << shade << ")\"/>\n";
        }
    }
    if (opt.show_labels) {
        const double font = opt.cell_px * 0.6;
        for (std::size_t i = 0; i < k; ++i) {
            const std::string name = detail::xml_escape(c.labels()[order[i]]);
            const double center = margin + opt.cell_px * (static_cast<double>(i) + 0.5);
            svg << "<text x=\"" << detail::fmt2(margin - 2.0) << "\" y=\""
                << detail::fmt2(center + font / 3.0) << "\" font-size=\"" << detail::fmt2(font)
                << "\" text-anchor=\"end\" font-family=\"monospace\">" << name << "</text>\n";
            svg << "<text x=\"" << detail::fmt2(center) << "\" y=\"" << detail::fmt2(margin - 2.0)
                << "\" font-size=\"" << detail::fmt2(font)
                << "\" text-anchor=\"start\" font-family=\"monospace\" transform=\"rotate(-90 "
                << detail::fmt2(center) << ' ' << detail::fmt2(margin - 2.0) << ")\">" << name
                << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

struct TileBlock {
    std::size_t first = 0; // display positions, inclusive
    std::size_t last = 0;
};

struct TilePlan {
    std::vector<TileBlock> blocks;
    std::uint64_t required_matrices = 0;
};

/// Chunk the display order into consecutive blocks of at most max_block
/// classes. A diagonal matrix is needed per block; an off-diagonal pair
/// needs two more when its cross-block confusion mass exceeds the
/// threshold.
inline TilePlan tile_blocks(const ConfusionMatrix& c, const Permutation& order,
                            std::size_t max_block, std::uint64_t mass_threshold) {
    const std::size_t k = c.size();
    if (max_block < 2) throw std::invalid_argument("max_block must be >= 2");
    if (!is_valid_permutation(order) || order.size() != k)
        throw std::invalid_argument("invalid permutation for tiling");

    TilePlan plan;
    for (std::size_t start = 0; start < k; start += max_block)
        plan.blocks.push_back({start, std::min(start + max_block, k) - 1});

    plan.required_matrices = plan.blocks.size();
    for (std::size_t p = 0; p < plan.blocks.size(); ++p) {
        for (std::size_t q = p + 1; q < plan.blocks.size(); ++q) {
            std::uint64_t mass = 0;
            for (std::size_t i = plan.blocks[p].first; i <= plan.blocks[p].last; ++i)
                for (std::size_t j = plan.blocks[q].first; j <= plan.blocks[q].last; ++j)
                    mass += c.at(order[i], order[j]) + c.at(order[j], order[i]);
            if (mass > mass_threshold) plan.required_matrices += 2;
        }
    }
    return plan;
}

} // namespace convlens
