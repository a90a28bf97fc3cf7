#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace convlens {

enum class LayerKind {
    input,
    conv,
    fc,
    maxpool,
    avgpool,
    scaledavgpool,
    gap,
    bn,
    act,
    dropout,
    dense,
    lcn,
    flatten,
};

enum class Padding { same, valid };

struct LayerSpec {
    LayerKind kind = LayerKind::input;
    std::uint64_t filters = 0;   // conv/fc n; input channels
    std::uint64_t kernel_w = 0;  // input: width
    std::uint64_t kernel_h = 0;  // input: height
    std::uint64_t stride = 1;
    Padding padding = Padding::same;
    bool bias = true;
    std::optional<std::uint64_t> in_channels_override;
    double rate = 0.0;               // dropout probability
    std::string activation;          // act name
    std::uint64_t dense_layers = 0;  // dense L
    std::uint64_t dense_growth = 0;  // dense growth rate
};

struct Shape {
    std::uint64_t channels = 0;
    std::uint64_t height = 0;
    std::uint64_t width = 0;

    std::uint64_t floats() const { return channels * height * width; }
    bool operator==(const Shape&) const = default;
};

struct ArchSpec {
    std::vector<LayerSpec> layers;
    std::vector<Shape> shapes; // output shape per layer, same length as layers
};

struct ParseError : std::runtime_error {
    ParseError(std::size_t line, std::size_t column, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + message),
          line(line), column(column) {}
    std::size_t line;
    std::size_t column;
};

namespace detail {

// Whitespace-separated tokens of one line together with their columns.
struct LineTokens {
    std::vector<std::string> tokens;
    std::vector<std::size_t> columns; // 1-based
};

inline LineTokens tokenize_line(const std::string& line) {
    LineTokens out;
    std::size_t i = 0;
    while (i < line.size()) {
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        if (line[i] == '#') break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
            ++i;
        out.tokens.push_back(line.substr(start, i - start));
        out.columns.push_back(start + 1);
    }
    return out;
}

inline std::uint64_t parse_uint(const std::string& tok, std::size_t line, std::size_t col,
                                const char* what) {
    if (tok.empty() || tok[0] == '-')
        throw ParseError(line, col, std::string(what) + " must be a non-negative integer");
    std::uint64_t value = 0;
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw ParseError(line, col, std::string("invalid integer for ") + what);
        value = value * 10 + static_cast<std::uint64_t>(ch - '0');
    }
    return value;
}

inline void parse_kernel(const std::string& tok, std::size_t line, std::size_t col,
                         LayerSpec& layer) {
    const std::size_t x = tok.find('x');
    if (x == std::string::npos)
        throw ParseError(line, col, "expected kernel size of the form KxK");
    layer.kernel_w = parse_uint(tok.substr(0, x), line, col, "kernel width");
    layer.kernel_h = parse_uint(tok.substr(x + 1), line, col, "kernel height");
    if (layer.kernel_w < 1 || layer.kernel_h < 1)
        throw ParseError(line, col, "kernel dimensions must be >= 1");
}

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

} // namespace detail

/// Parse the line-oriented architecture description language and infer
/// per-layer output shapes.
inline ArchSpec parse_arch(const std::string& text) {
    using namespace detail;
    ArchSpec arch;
    std::istringstream stream(text);
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(stream, raw)) {
        ++lineno;
        const LineTokens lt = tokenize_line(raw);
        if (lt.tokens.empty()) continue;
        const std::string& kind = lt.tokens[0];
        const std::size_t kcol = lt.columns[0];
        LayerSpec layer;

        auto expect_args = [&](std::size_t lo, std::size_t hi) {
            const std::size_t n = lt.tokens.size() - 1;
            if (n < lo || n > hi)
                throw ParseError(lineno, kcol, "wrong argument count for '" + kind + "'");
        };
        // Optional trailing tokens shared by conv and pools.
        auto parse_tail = [&](std::size_t from, bool allow_pad, bool allow_bias,
                              bool allow_override) {
            for (std::size_t t = from; t < lt.tokens.size(); ++t) {
                const std::string& tok = lt.tokens[t];
                const std::size_t col = lt.columns[t];
                if (tok.size() > 1 && tok[0] == '/') {
                    layer.stride = parse_uint(tok.substr(1), lineno, col, "stride");
                    if (layer.stride < 1) throw ParseError(lineno, col, "stride must be >= 1");
                } else if (allow_pad && (tok == "same" || tok == "valid")) {
                    layer.padding = tok == "same" ? Padding::same : Padding::valid;
                } else if (allow_bias && tok == "nobias") {
                    layer.bias = false;
                } else if (allow_override && tok.rfind("in=", 0) == 0) {
                    const std::uint64_t d = parse_uint(tok.substr(3), lineno, col, "in=");
                    if (d < 1) throw ParseError(lineno, col, "in= override must be >= 1");
                    layer.in_channels_override = d;
                } else {
                    throw ParseError(lineno, col, "unexpected token '" + tok + "'");
                }
            }
        };

        if (kind == "input") {
            expect_args(3, 3);
            layer.kind = LayerKind::input;
            layer.filters = parse_uint(lt.tokens[1], lineno, lt.columns[1], "channels");
            layer.kernel_h = parse_uint(lt.tokens[2], lineno, lt.columns[2], "height");
            layer.kernel_w = parse_uint(lt.tokens[3], lineno, lt.columns[3], "width");
            if (layer.filters < 1 || layer.kernel_h < 1 || layer.kernel_w < 1)
                throw ParseError(lineno, kcol, "input dimensions must be >= 1");
        } else if (kind == "conv") {
            expect_args(2, 6);
            layer.kind = LayerKind::conv;
            layer.filters = parse_uint(lt.tokens[1], lineno, lt.columns[1], "filter count");
            if (layer.filters < 1) throw ParseError(lineno, lt.columns[1], "filter count must be >= 1");
            parse_kernel(lt.tokens[2], lineno, lt.columns[2], layer);
            layer.padding = Padding::same;
            parse_tail(3, true, true, true);
        } else if (kind == "fc") {
            expect_args(1, 2);
            layer.kind = LayerKind::fc;
            layer.filters = parse_uint(lt.tokens[1], lineno, lt.columns[1], "node count");
            if (layer.filters < 1) throw ParseError(lineno, lt.columns[1], "node count must be >= 1");
            parse_tail(2, false, true, false);
        } else if (kind == "maxpool" || kind == "avgpool" || kind == "scaledavgpool") {
            expect_args(1, 3);
            layer.kind = kind == "maxpool"   ? LayerKind::maxpool
                         : kind == "avgpool" ? LayerKind::avgpool
                                             : LayerKind::scaledavgpool;
            parse_kernel(lt.tokens[1], lineno, lt.columns[1], layer);
            layer.stride = 0; // filled with the kernel width below unless /S given
            layer.padding = Padding::valid;
            parse_tail(2, kind != "scaledavgpool", false, false);
            if (layer.stride == 0) layer.stride = layer.kernel_w;
        } else if (kind == "gap" || kind == "bn" || kind == "lcn" || kind == "flatten") {
            expect_args(0, 0);
            layer.kind = kind == "gap"  ? LayerKind::gap
                         : kind == "bn" ? LayerKind::bn
                         : kind == "lcn" ? LayerKind::lcn
                                         : LayerKind::flatten;
        } else if (kind == "act") {
            expect_args(1, 1);
            layer.kind = LayerKind::act;
            layer.activation = lt.tokens[1];
        } else if (kind == "dropout") {
            expect_args(1, 1);
            layer.kind = LayerKind::dropout;
            try {
                layer.rate = std::stod(lt.tokens[1]);
            } catch (const std::exception&) {
                throw ParseError(lineno, lt.columns[1], "invalid dropout rate");
            }
            if (layer.rate < 0.0 || layer.rate >= 1.0)
                throw ParseError(lineno, lt.columns[1], "dropout rate must be in [0, 1)");
        } else if (kind == "dense") {
            expect_args(2, 2);
            layer.kind = LayerKind::dense;
            layer.dense_layers = parse_uint(lt.tokens[1], lineno, lt.columns[1], "dense depth");
            layer.dense_growth = parse_uint(lt.tokens[2], lineno, lt.columns[2], "growth rate");
            if (layer.dense_layers < 1 || layer.dense_growth < 1)
                throw ParseError(lineno, kcol, "dense depth and growth must be >= 1");
        } else {
            throw ParseError(lineno, kcol, "unknown layer kind '" + kind + "'");
        }

        if (arch.layers.empty() && layer.kind != LayerKind::input)
            throw ParseError(lineno, kcol, "architecture must start with an input line");
        if (!arch.layers.empty() && layer.kind == LayerKind::input)
            throw ParseError(lineno, kcol, "duplicate input line");

        // Shape inference.
        Shape out;
        if (layer.kind == LayerKind::input) {
            out = {layer.filters, layer.kernel_h, layer.kernel_w};
        } else {
            const Shape in = arch.shapes.back();
            auto spatial = [&](std::uint64_t extent, std::uint64_t kernel) -> std::uint64_t {
                if (layer.padding == Padding::same) return detail::ceil_div(extent, layer.stride);
                if (kernel > extent)
                    throw ParseError(lineno, kcol, "kernel larger than input under VALID");
                return (extent - kernel) / layer.stride + 1;
            };
            switch (layer.kind) {
            case LayerKind::conv:
                out = {layer.filters, spatial(in.height, layer.kernel_h),
                       spatial(in.width, layer.kernel_w)};
                break;
            case LayerKind::maxpool:
            case LayerKind::avgpool:
            case LayerKind::scaledavgpool:
                out = {in.channels, spatial(in.height, layer.kernel_h),
                       spatial(in.width, layer.kernel_w)};
                break;
            case LayerKind::fc:
                out = {layer.filters, 1, 1};
                break;
            case LayerKind::gap:
                out = {in.channels, 1, 1};
                break;
            case LayerKind::flatten:
                out = {in.floats(), 1, 1};
                break;
            case LayerKind::dense:
                out = {in.channels + layer.dense_layers * layer.dense_growth, in.height,
                       in.width};
                break;
            default: // bn, act, dropout, lcn preserve shape
                out = in;
                break;
            }
        }
        arch.layers.push_back(layer);
        arch.shapes.push_back(out);
    }
    if (arch.layers.empty()) throw ParseError(1, 1, "empty architecture description");
    return arch;
}

inline const char* kind_name(LayerKind kind) {
    switch (kind) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::fc: return "fc";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::avgpool: return "avgpool";
    case LayerKind::scaledavgpool: return "scaledavgpool";
    case LayerKind::gap: return "gap";
    case LayerKind::bn: return "bn";
    case LayerKind::act: return "act";
    case LayerKind::dropout: return "dropout";
    case LayerKind::dense: return "dense";
    case LayerKind::lcn: return "lcn";
    case LayerKind::flatten: return "flatten";
    }
    return "?";
}

/// Canonical text form; reparsing the result yields an identical spec.
inline std::string print_arch(const ArchSpec& arch) {
    std::ostringstream out;
    for (const LayerSpec& l : arch.layers) {
        out << kind_name(l.kind);
        switch (l.kind) {
        case LayerKind::input:
            out << ' ' << l.filters << ' ' << l.kernel_h << ' ' << l.kernel_w;
            break;
        case LayerKind::conv:
            out << ' ' << l.filters << ' ' << l.kernel_w << 'x' << l.kernel_h << " /" << l.stride
                << (l.padding == Padding::same ? " same" : " valid");
            if (!l.bias) out << " nobias";
            if (l.in_channels_override) out << " in=" << *l.in_channels_override;
            break;
        case LayerKind::fc:
            out << ' ' << l.filters;
            if (!l.bias) out << " nobias";
            break;
        case LayerKind::maxpool:
        case LayerKind::avgpool:
            out << ' ' << l.kernel_w << 'x' << l.kernel_h << " /" << l.stride
                << (l.padding == Padding::same ? " same" : " valid");
            break;
        case LayerKind::scaledavgpool:
            out << ' ' << l.kernel_w << 'x' << l.kernel_h << " /" << l.stride;
            break;
        case LayerKind::act:
            out << ' ' << l.activation;
            break;
        case LayerKind::dropout:
            out << ' ' << l.rate;
            break;
        case LayerKind::dense:
            out << ' ' << l.dense_layers << ' ' << l.dense_growth;
            break;
        default:
            break;
        }
        out << '\n';
    }
    return out.str();
}

/// Substitute the class count into the last conv or fc layer and re-infer
/// shapes. Used to instantiate the symbolic fixtures.
inline ArchSpec with_class_count(const ArchSpec& arch, std::uint64_t classes) {
    if (classes < 1) throw std::invalid_argument("class count must be >= 1");
    ArchSpec copy = arch;
    for (auto it = copy.layers.rbegin(); it != copy.layers.rend(); ++it) {
        if (it->kind == LayerKind::conv || it->kind == LayerKind::fc) {
            it->filters = classes;
            return parse_arch(print_arch(copy));
        }
    }
    throw std::invalid_argument("architecture has no conv or fc layer");
}

} // namespace convlens
