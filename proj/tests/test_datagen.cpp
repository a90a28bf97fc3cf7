#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "convlens/datagen.hpp"

using namespace convlens;

namespace {

Raster gray(std::size_t w, std::size_t h, const std::vector<double>& values) {
    Raster r;
    r.width = w;
    r.height = h;
    r.channels = 1;
    r.values = values;
    r.validate();
    return r;
}

FilterTensor box3() {
    FilterTensor f;
    f.width = f.height = 3;
    f.depth = 1;
    f.values.assign(9, 1.0 / 9.0);
    return f;
}

} // namespace

TEST_CASE("identity kernel reproduces the input") {
    const Raster img = gray(3, 2, {1, 2, 3, 4, 5, 6});
    const FilterTensor ident{1, 1, 1, {1.0}};
    for (Boundary b : {Boundary::dont_compute, Boundary::zero, Boundary::nearest,
                       Boundary::reflect}) {
        const Raster out = filter2d(img, ident, b);
        CHECK(out.values == img.values);
    }
}

TEST_CASE("box kernel keeps a constant image constant except under zero fill") {
    const Raster img = gray(5, 5, std::vector<double>(25, 7.0));
    for (Boundary b : {Boundary::dont_compute, Boundary::nearest, Boundary::reflect}) {
        const Raster out = filter2d(img, box3(), b);
        for (double v : out.values) CHECK(v == doctest::Approx(7.0));
    }
    // zero padding darkens the border
    const Raster z = filter2d(img, box3(), Boundary::zero);
    CHECK(z.at(0, 0) < 7.0);
    CHECK(z.at(2, 2) == doctest::Approx(7.0));
}

TEST_CASE("zero boundary on a ramp matches a hand-unrolled loop") {
    // 4x4 ramp 0..15, row-major
    std::vector<double> ramp(16);
    for (std::size_t i = 0; i < 16; ++i) ramp[i] = static_cast<double>(i);
    const Raster img = gray(4, 4, ramp);
    FilterTensor k;
    k.width = k.height = 3;
    k.depth = 1;
    k.values = {1, 0, -1, 2, 0, -2, 1, 0, -1}; // values[(x*3)+y]
    const Raster out = filter2d(img, k, Boundary::zero);
    REQUIRE(out.width == 4);
    REQUIRE(out.height == 4);
    for (std::size_t oy = 0; oy < 4; ++oy)
        for (std::size_t ox = 0; ox < 4; ++ox) {
            double want = 0.0;
            for (int iy = 0; iy < 3; ++iy)
                for (int ix = 0; ix < 3; ++ix) {
                    const int sx = static_cast<int>(ox) + ix - 1;
                    const int sy = static_cast<int>(oy) + iy - 1;
                    if (sx < 0 || sx > 3 || sy < 0 || sy > 3) continue;
                    want += img.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy)) *
                            k.at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), 0);
                }
            CHECK(out.at(ox, oy) == doctest::Approx(want));
        }
}

TEST_CASE("dont_compute equals zero filtering on the interior") {
    SplitMix64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t w = 5 + rng.next_below(5), h = 5 + rng.next_below(5);
        std::vector<double> values(w * h);
        for (double& v : values) v = rng.next_unit();
        const Raster img = gray(w, h, values);

        FilterTensor k;
        k.width = k.height = 3;
        k.depth = 1;
        k.values.resize(9);
        for (double& v : k.values) v = rng.next_unit() - 0.5;

        const Raster interior = filter2d(img, k, Boundary::dont_compute);
        const Raster padded = filter2d(img, k, Boundary::zero);
        for (std::size_t y = 0; y < interior.height; ++y)
            for (std::size_t x = 0; x < interior.width; ++x)
                CHECK(interior.at(x, y) == doctest::Approx(padded.at(x + 1, y + 1)));
    }
}

TEST_CASE("average pooling is a strided box filter") {
    SplitMix64 rng(11);
    const std::size_t p = 2;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t w = 8, h = 6;
        std::vector<double> values(w * h);
        for (double& v : values) v = rng.next_unit();
        const Raster img = gray(w, h, values);

        FilterTensor k;
        k.width = k.height = p;
        k.depth = 1;
        k.values.assign(p * p, 1.0 / static_cast<double>(p * p));
        const Raster filtered = filter2d(img, k, Boundary::dont_compute);

        for (std::size_t py = 0; py * p + p <= h; ++py)
            for (std::size_t px = 0; px * p + p <= w; ++px) {
                double pooled = 0.0;
                for (std::size_t dy = 0; dy < p; ++dy)
                    for (std::size_t dx = 0; dx < p; ++dx)
                        pooled += img.at(px * p + dx, py * p + dy);
                pooled /= static_cast<double>(p * p);
                CHECK(std::abs(filtered.at(px * p, py * p) - pooled) < 1e-9);
            }
    }
}

TEST_CASE("kernel depth must match channels") {
    const Raster img = gray(4, 4, std::vector<double>(16, 1.0));
    FilterTensor k{1, 1, 3, {1, 1, 1}};
    CHECK_THROWS_AS(filter2d(img, k, Boundary::zero), std::invalid_argument);
    FilterTensor big{5, 5, 1, std::vector<double>(25, 1.0)};
    CHECK_THROWS_AS(filter2d(img, big, Boundary::dont_compute), std::invalid_argument);
}

TEST_CASE("uniform label raster accepts every crop") {
    const Raster img = gray(8, 8, std::vector<double>(64, 100.0));
    Raster labels = gray(8, 8, std::vector<double>(64, 3.0));
    labels.integer_payload = true;
    const auto samples = crop_dataset(img, labels, 3, 3, 25, 0.5, 42);
    REQUIRE(samples.size() == 25);
    for (const CropSample& s : samples) {
        REQUIRE(s.majority_class.has_value());
        CHECK(*s.majority_class == 3);
        CHECK(s.image.width == 3);
        CHECK(s.labels.height == 3);
        CHECK(s.x <= 5);
        CHECK(s.y <= 5);
    }
}

TEST_CASE("an exact 50 percent cover counts as accepted") {
    // left half class 0, right half class 1; full-size crops split evenly
    std::vector<double> half(16);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) half[y * 4 + x] = x < 2 ? 0.0 : 1.0;
    const Raster labels = gray(4, 4, half);
    const Raster img = gray(4, 4, std::vector<double>(16, 1.0));
    const auto samples = crop_dataset(img, labels, 4, 4, 5, 0.5, 7);
    for (const CropSample& s : samples) {
        REQUIRE(s.majority_class.has_value());
        CHECK(*s.majority_class == 0); // tie broken by lowest class id
    }
    // a strict majority of 0.6 rejects the same crops
    for (const CropSample& s : crop_dataset(img, labels, 4, 4, 5, 0.6, 7))
        CHECK_FALSE(s.majority_class.has_value());
}

TEST_CASE("crop draws replay the documented random stream") {
    std::vector<double> board(36);
    for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) board[y * 6 + x] = static_cast<double>((x + y) % 2);
    const Raster labels = gray(6, 6, board);
    const Raster img = gray(6, 6, std::vector<double>(36, 1.0));

    const std::uint64_t seed = 123;
    const auto samples = crop_dataset(img, labels, 2, 2, 100, 0.5, seed);
    SplitMix64 replay(seed);
    for (const CropSample& s : samples) {
        CHECK(s.x == replay.next_range(0, 4));
        CHECK(s.y == replay.next_range(0, 4));
        // recount the majority decision
        std::map<int, int> tally;
        for (double v : s.labels.values) ++tally[static_cast<int>(v)];
        bool expect_accept = false;
        int expect_class = 0;
        for (const auto& [cls, cnt] : tally)
            if (!expect_accept && cnt * 2 >= 4) {
                expect_accept = true;
                expect_class = cls;
            }
        CHECK(s.majority_class.has_value() == expect_accept);
        if (expect_accept) CHECK(*s.majority_class == expect_class);
    }
}

TEST_CASE("crop precondition checks") {
    const Raster img = gray(4, 4, std::vector<double>(16, 1.0));
    const Raster labels = gray(4, 4, std::vector<double>(16, 0.0));
    CHECK_THROWS_AS(crop_dataset(img, labels, 5, 4, 1, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(crop_dataset(img, labels, 2, 2, 1, 0.4, 0), std::invalid_argument);
    const Raster small = gray(3, 4, std::vector<double>(12, 0.0));
    CHECK_THROWS_AS(crop_dataset(img, small, 2, 2, 1, 0.5, 0), std::invalid_argument);
}

TEST_CASE("netpbm round trips") {
    Raster g = gray(3, 2, {0, 50, 100, 150, 200, 255});
    for (bool binary : {false, true}) {
        std::stringstream buf;
        write_pnm(buf, g, binary);
        const Raster back = read_pnm(buf);
        CHECK(back.width == 3);
        CHECK(back.height == 2);
        CHECK(back.channels == 1);
        CHECK(back.values == g.values);
    }

    Raster rgb;
    rgb.width = 2;
    rgb.height = 1;
    rgb.channels = 3;
    rgb.values = {10, 20, 30, 40, 50, 60};
    for (bool binary : {false, true}) {
        std::stringstream buf;
        write_pnm(buf, rgb, binary);
        const Raster back = read_pnm(buf);
        CHECK(back.channels == 3);
        CHECK(back.values == rgb.values);
    }
}

TEST_CASE("netpbm comments and errors") {
    std::stringstream ok("P2\n# a comment\n2 2\n255\n1 2\n3 4\n");
    const Raster r = read_pnm(ok);
    CHECK(r.at(1, 1) == 4);

    std::stringstream bad_magic("P9\n1 1\n255\n0\n");
    CHECK_THROWS_AS(read_pnm(bad_magic), std::invalid_argument);
    std::stringstream truncated("P5\n2 2\n255\nab");
    CHECK_THROWS_AS(read_pnm(truncated), std::invalid_argument);
}
