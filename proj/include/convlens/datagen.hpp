#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "predops.hpp" // FilterTensor
#include "random.hpp"

namespace convlens {

/// Row-major raster. Values are doubles throughout; `integer_payload`
/// flags label maps (class ids) as opposed to images.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    bool integer_payload = false;
    std::vector<double> values; // index: (y * width + x) * channels + c

    double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return values[(y * width + x) * channels + c];
    }
    double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
        return values[(y * width + x) * channels + c];
    }

    void validate() const {
        if (width < 1 || height < 1 || channels < 1)
            throw std::invalid_argument("degenerate raster dimensions");
        if (values.size() != width * height * channels)
            throw std::invalid_argument("raster value count does not match dimensions");
    }
};

enum class Boundary { dont_compute, zero, nearest, reflect };

inline Boundary boundary_from_name(const std::string& name) {
    if (name == "dont_compute") return Boundary::dont_compute;
    if (name == "zero") return Boundary::zero;
    if (name == "nearest") return Boundary::nearest;
    if (name == "reflect") return Boundary::reflect;
    throw std::invalid_argument("unknown boundary mode '" + name + "'");
}

namespace detail {

// Fold an out-of-range coordinate back into [0, n) by mirroring at the
// borders (edge pixel repeated).
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
}

} // namespace detail

/// Linear filter: out(x, y) = sum_{ix, iy, c} I(x + ix - ax, y + iy - ay, c)
/// * F(ix, iy, c), anchored at the kernel center (ax, ay) = ((kw-1)/2,
/// (kh-1)/2) for the size-preserving modes. dont_compute keeps only fully
/// interior positions and shrinks the output.
inline Raster filter2d(const Raster& image, const FilterTensor& kernel, Boundary boundary) {
    image.validate();
    kernel.validate();
    if (kernel.depth != image.channels)
        throw std::invalid_argument("kernel depth does not match image channels");

    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(image.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(image.height);
    const std::ptrdiff_t kw = static_cast<std::ptrdiff_t>(kernel.width);
    const std::ptrdiff_t kh = static_cast<std::ptrdiff_t>(kernel.height);

    Raster out;
    out.channels = 1;
    if (boundary == Boundary::dont_compute) {
        if (kw > w || kh > h)
            throw std::invalid_argument("kernel larger than image under dont_compute");
        out.width = static_cast<std::size_t>(w - kw + 1);
        out.height = static_cast<std::size_t>(h - kh + 1);
    } else {
        out.width = image.width;
        out.height = image.height;
    }
    out.values.assign(out.width * out.height, 0.0);

    const std::ptrdiff_t ax = boundary == Boundary::dont_compute ? 0 : (kw - 1) / 2;
    const std::ptrdiff_t ay = boundary == Boundary::dont_compute ? 0 : (kh - 1) / 2;
    for (std::size_t oy = 0; oy < out.height; ++oy) {
        for (std::size_t ox = 0; ox < out.width; ++ox) {
            double acc = 0.0;
            for (std::ptrdiff_t iy = 0; iy < kh; ++iy) {
                for (std::ptrdiff_t ix = 0; ix < kw; ++ix) {
                    std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(ox) + ix - ax;
                    std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(oy) + iy - ay;
                    if (sx < 0 || sx >= w || sy < 0 || sy >= h) {
                        if (boundary == Boundary::zero) continue;
                        if (boundary == Boundary::nearest) {
                            sx = std::clamp<std::ptrdiff_t>(sx, 0, w - 1);
                            sy = std::clamp<std::ptrdiff_t>(sy, 0, h - 1);
                        } else { // reflect
                            sx = detail::reflect_index(sx, w);
                            sy = detail::reflect_index(sy, h);
                        }
                    }
                    for (std::size_t c = 0; c < image.channels; ++c)
                        acc += image.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy),
                                        c) *
                               kernel.at(static_cast<std::size_t>(ix),
                                         static_cast<std::size_t>(iy), c);
                }
            }
            out.at(ox, oy) = acc;
        }
    }
    return out;
}

/// One draw of the segmentation-to-classification crop extraction. A draw
/// with no majority class is kept in the list but has no class assigned.
struct CropSample {
    std::size_t x = 0;
    std::size_t y = 0;
    Raster image;
    Raster labels;
    std::optional<int> majority_class; // empty means rejected
};

namespace detail {

inline Raster crop(const Raster& src, std::size_t x0, std::size_t y0, std::size_t w,
                   std::size_t h) {
    Raster out;
    out.width = w;
    out.height = h;
    out.channels = src.channels;
    out.integer_payload = src.integer_payload;
    out.values.reserve(w * h * src.channels);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < src.channels; ++c)
                out.values.push_back(src.at(x0 + x, y0 + y, c));
    return out;
}

} // namespace detail

/// Draw `count` uniform crop positions and classify each crop by majority
/// label. Positions are inclusive: x in [0, width - w], y in [0, height - h].
/// A crop is accepted when some class covers >= majority of its label patch;
/// ties go to the lowest class id. Deterministic per seed.
inline std::vector<CropSample> crop_dataset(const Raster& image, const Raster& labels,
                                            std::size_t w, std::size_t h, std::size_t count,
                                            double majority, std::uint64_t seed) {
    image.validate();
    labels.validate();
    if (labels.channels != 1) throw std::invalid_argument("label raster must have one channel");
    if (labels.width != image.width || labels.height != image.height)
        throw std::invalid_argument("label raster dimensions differ from image");
    if (w < 1 || h < 1 || w > image.width || h > image.height)
        throw std::invalid_argument("crop larger than raster");
    if (majority < 0.5 || majority > 1.0)
        throw std::invalid_argument("majority must be in [0.5, 1]");

    SplitMix64 rng(seed);
    std::vector<CropSample> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        CropSample s;
        s.x = rng.next_range(0, image.width - w);
        s.y = rng.next_range(0, image.height - h);
        s.image = detail::crop(image, s.x, s.y, w, h);
        s.labels = detail::crop(labels, s.x, s.y, w, h);

        std::map<int, std::size_t> tally;
        for (double v : s.labels.values) ++tally[static_cast<int>(std::llround(v))];
        const double area = static_cast<double>(w * h);
        for (const auto& [cls, cnt] : tally) { // map order = lowest id first
            if (static_cast<double>(cnt) / area >= majority) {
                s.majority_class = cls;
                break;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Netpbm I/O (P2/P5 graymaps, P3/P6 pixmaps)
// ---------------------------------------------------------------------------

namespace detail {

inline int next_pnm_int(std::istream& in) {
    // Skip whitespace and '#' comments between tokens.
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            in.unget();
            break;
        }
    }
    int v;
    if (!(in >> v)) throw std::invalid_argument("truncated netpbm header or data");
    return v;
}

} // namespace detail

inline Raster read_pnm(std::istream& in) {
    std::string magic;
    if (!(in >> magic)) throw std::invalid_argument("empty netpbm stream");
    if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6")
        throw std::invalid_argument("unsupported netpbm magic '" + magic + "'");
    const bool color = magic == "P3" || magic == "P6";
    const bool binary = magic == "P5" || magic == "P6";

    Raster r;
    r.width = static_cast<std::size_t>(detail::next_pnm_int(in));
    r.height = static_cast<std::size_t>(detail::next_pnm_int(in));
    const int maxval = detail::next_pnm_int(in);
    if (maxval < 1 || maxval > 255)
        throw std::invalid_argument("only 8-bit netpbm files are supported");
    r.channels = color ? 3 : 1;
    r.integer_payload = !color;
    const std::size_t n = r.width * r.height * r.channels;
    r.values.reserve(n);
    if (binary) {
        in.get(); // single whitespace byte after maxval
        for (std::size_t i = 0; i < n; ++i) {
            const int c = in.get();
            if (c == EOF) throw std::invalid_argument("truncated netpbm data");
            r.values.push_back(static_cast<double>(c));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            r.values.push_back(static_cast<double>(detail::next_pnm_int(in)));
    }
    r.validate();
    return r;
}

inline Raster read_pnm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    return read_pnm(in);
}

/// Writes P2/P5 for single-channel rasters and P3/P6 for three channels.
/// Values are clamped into [0, 255] and rounded.
inline void write_pnm(std::ostream& out, const Raster& r, bool binary) {
    r.validate();
    if (r.channels != 1 && r.channels != 3)
        throw std::invalid_argument("netpbm supports 1 or 3 channels");
    const bool color = r.channels == 3;
    out << (color ? (binary ? "P6" : "P3") : (binary ? "P5" : "P2")) << '\n'
        << r.width << ' ' << r.height << '\n'
        << 255 << '\n';
    std::size_t col = 0;
    for (double v : r.values) {
        const int byte = static_cast<int>(std::llround(std::clamp(v, 0.0, 255.0)));
        if (binary) {
            out.put(static_cast<char>(byte));
        } else {
            out << byte;
            out.put(++col % 16 == 0 ? '\n' : ' ');
        }
    }
    if (!binary && col % 16 != 0) out << '\n';
}

inline void write_pnm_file(const std::string& path, const Raster& r, bool binary = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
    write_pnm(out, r, binary);
}

} // namespace convlens
