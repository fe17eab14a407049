#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "faz3d/phantom.hpp"
#include "faz3d/vessel2d.hpp"
#include "oracles.hpp"

using namespace faz3d;

namespace {

ScalarImage horizontal_tube(int n, int y0, int y1, float value) {
    ScalarImage img(n, n, 0.0f);
    for (int y = y0; y <= y1; ++y)
        for (int x = 0; x < n; ++x) img(x, y) = value;
    return img;
}

double mean_far_from(const ScalarImage& r, auto&& dist, double min_dist) {
    double s = 0;
    int n = 0;
    for (int y = 0; y < r.ny(); ++y)
        for (int x = 0; x < r.nx(); ++x)
            if (dist(x, y) > min_dist) {
                s += r(x, y);
                ++n;
            }
    return n ? s / n : 0.0;
}

BinaryImage bar(int nx, int ny, int x0, int x1, int y0, int y1) {
    BinaryImage m(nx, ny, 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m(x, y) = 1;
    return m;
}

}  // namespace

TEST_CASE("vesselness of a constant image is zero") {
    for (float c : {0.0f, 1.0f, 37.5f, 255.0f}) {
        const auto r = frangi_enhance(ScalarImage(40, 30, c));
        for (float v : r.values()) REQUIRE(v == 0.0f);
    }
}

TEST_CASE("vesselness stays in [0, 1] on random input") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.0f, 255.0f);
    for (int t = 0; t < 20; ++t) {
        ScalarImage img(48, 40);
        for (auto& v : img.values()) v = u(rng);
        for (float v : frangi_enhance(img).values()) REQUIRE((v >= 0.0f && v <= 1.0f));
    }
}

TEST_CASE("vesselness rejects negative or non-finite input") {
    ScalarImage img(8, 8, 1.0f);
    img(3, 3) = -1.0f;
    CHECK_THROWS_AS((void)frangi_enhance(img), Error);
    img(3, 3) = std::nanf("");
    CHECK_THROWS_AS((void)frangi_enhance(img), Error);
}

TEST_CASE("bright tube of width 4 stands out and the response is rotation invariant") {
    const int n = 96;
    const auto img = horizontal_tube(n, 46, 49, 200.0f);
    const auto r = frangi_enhance(img);
    const double center = std::max(r(48, 47), r(48, 48));
    const double bg = mean_far_from(r, [](int, int y) { return std::abs(y - 47.5); }, 10.0);
    CHECK(center > 0.1);
    CHECK(center > 10.0 * bg);

    // The same tube along the diagonal: |x - y| / sqrt2 < 2.
    ScalarImage diag(n, n, 0.0f);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (std::abs(x - y) / std::sqrt(2.0) < 2.0) diag(x, y) = 200.0f;
    const auto rd = frangi_enhance(diag);
    double dc = 0;
    for (int k = -2; k <= 2; ++k) dc = std::max(dc, static_cast<double>(rd(48 + k, 48)));
    CHECK(std::abs(dc - center) <= 0.2 * center);
}

TEST_CASE("dark line on bright background gives no response") {
    ScalarImage img(64, 64, 200.0f);
    for (int x = 0; x < 64; ++x) img(x, 31) = img(x, 32) = 0.0f;
    const auto r = frangi_enhance(img);
    CHECK(r(32, 31) == 0.0f);
    CHECK(r(32, 32) == 0.0f);
}

TEST_CASE("default configuration uses scales 2 and 3 with the published betas") {
    const PipelineConfig cfg;
    CHECK(cfg.frangi_scales() == std::vector<double>{2.0, 3.0});
    CHECK(cfg.frangi.beta_one == 0.6);
    CHECK(cfg.frangi.beta_two == 22.0);
}

TEST_CASE("otsu separates a two-level image exactly") {
    ScalarImage img(10, 10);
    for (int i = 0; i < 100; ++i) img.values()[static_cast<std::size_t>(i)] = i < 60 ? 0.1f : 0.9f;
    const auto r = otsu_threshold(img);
    CHECK(r.threshold > 0.1);
    CHECK(r.threshold < 0.9);
    for (int i = 0; i < 100; ++i) CHECK(r.mask.values()[static_cast<std::size_t>(i)] == (i < 60 ? 0 : 1));
}

TEST_CASE("otsu matches the exhaustive between-class variance search") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 40), mode(0, 3);
    for (int t = 0; t < 500; ++t) {
        ScalarImage img(dim(rng), dim(rng));
        const int m = mode(rng);
        std::uniform_real_distribution<float> u(0.0f, 1.0f);
        std::normal_distribution<float> g(0.0f, 1.0f);
        std::uniform_int_distribution<int> levels(0, 6);
        for (auto& v : img.values()) {
            switch (m) {
                case 0: v = u(rng); break;
                case 1: v = u(rng) < 0.7f ? g(rng) : 4.0f + g(rng); break;
                case 2: v = static_cast<float>(levels(rng)); break;  // many exact ties
                default: v = std::exp(2.0f * g(rng)); break;
            }
        }
        img.values()[0] = 0.0f;
        img.values()[img.size() - 1] = 1.0f + std::abs(img.values()[img.size() - 1]);
        const auto r = otsu_threshold(img);
        REQUIRE(r.cut == oracle::otsu_cut(img));
        float lo = img.values()[0], hi = lo;
        for (float v : img.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (std::size_t i = 0; i < img.size(); ++i) {
            REQUIRE(r.mask.values()[i] == (otsu_bin(img.values()[i], lo, hi) > r.cut ? 1 : 0));
        }
    }
}

TEST_CASE("otsu on an image above 2^18 pixels still matches the oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<float> g(0.0f, 1.0f);
    ScalarImage img(600, 600);
    for (auto& v : img.values()) v = std::abs(g(rng)) + (g(rng) > 1.0f ? 3.0f : 0.0f);
    CHECK(otsu_threshold(img).cut == oracle::otsu_cut(img));
}

TEST_CASE("otsu degenerate input follows the configuration") {
    const ScalarImage flat(16, 16, 0.25f);
    PipelineConfig cfg;
    CHECK_THROWS_AS((void)otsu_threshold(flat, cfg), Error);
    cfg.otsu_degenerate = OtsuDegenerate::empty;
    const auto r = otsu_threshold(flat, cfg);
    CHECK(r.degenerate);
    CHECK(count_true(r.mask) == 0);
}

TEST_CASE("skeleton of a 3x20 bar is its middle row") {
    const auto m = bar(30, 9, 5, 24, 3, 5);
    const auto s = skeletonize(m);
    const auto n = count_true(s);
    CHECK(n >= 18);
    CHECK(n <= 20);
    for (int y = 0; y < s.ny(); ++y)
        for (int x = 0; x < s.nx(); ++x)
            if (s(x, y)) CHECK(y == 4);
    CHECK(oracle::count_components(s) == 1);
}

TEST_CASE("skeleton trivial cases") {
    CHECK(count_true(skeletonize(BinaryImage(7, 7, 0))) == 0);
    BinaryImage one(7, 7, 0);
    one(3, 2) = 1;
    CHECK(skeletonize(one) == one);
}

TEST_CASE("skeleton is a thin subset with the same 8-connected components") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> dim(3, 40), shapes(1, 6);
    std::uniform_real_distribution<double> dens(0.2, 0.9);
    for (int t = 0; t < 500; ++t) {
        const int nx = dim(rng), ny = dim(rng);
        const auto m = t % 2 ? oracle::random_shapes(rng, nx, ny, shapes(rng)) : oracle::random_mask(rng, nx, ny, dens(rng));
        const auto s = skeletonize(m);
        for (std::size_t i = 0; i < m.size(); ++i) REQUIRE((!s.values()[i] || m.values()[i]));
        REQUIRE_FALSE(oracle::has_full_block(s));
        REQUIRE_FALSE(oracle::has_reducible_square(s));
        REQUIRE(oracle::count_components(s) == oracle::count_components(m));
    }
}

TEST_CASE("distance transform basics") {
    BinaryImage one(9, 9, 0);
    one(4, 4) = 1;
    const auto d = distance_transform(one);
    CHECK(d(4, 4) == 1.0f);
    CHECK(d(0, 0) == 0.0f);

    BinaryImage disk(41, 41, 0);
    for (int y = 0; y < 41; ++y)
        for (int x = 0; x < 41; ++x)
            if ((x - 20) * (x - 20) + (y - 20) * (y - 20) <= 100) disk(x, y) = 1;
    CHECK(std::abs(distance_transform(disk)(20, 20) - 10.0) <= 0.8);
}

TEST_CASE("distance transform equals brute-force chamfer") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> dim(1, 32), shapes(1, 5);
    std::uniform_real_distribution<double> dens(0.3, 1.0);
    for (int t = 0; t < 300; ++t) {
        const int nx = dim(rng), ny = dim(rng);
        const auto m = t % 3 == 0 ? oracle::random_shapes(rng, nx, ny, shapes(rng)) : oracle::random_mask(rng, nx, ny, dens(rng));
        REQUIRE(distance_transform(m) == oracle::chamfer_dt(m));
    }
}

TEST_CASE("distance transform honors custom weights") {
    std::mt19937_64 rng(9);
    for (int t = 0; t < 50; ++t) {
        const auto m = oracle::random_mask(rng, 20, 17, 0.8);
        REQUIRE(distance_transform(m, 3.0, 4.0) == oracle::chamfer_dt(m, 3.0, 4.0));
    }
}

TEST_CASE("radius of a tube with half-width 3 is 3 along its interior") {
    const auto m = bar(60, 21, 0, 59, 7, 13);  // 7 rows: center 10, 3 on each side
    BinaryImage sk(60, 21, 0);
    for (int x = 0; x < 60; ++x) sk(x, 10) = 1;
    const auto r = skeleton_radii(sk, distance_transform(m));
    REQUIRE(r.points.size() == 60);
    for (const auto& p : r.points)
        if (p.x >= 5 && p.x < 55) CHECK(p.radius == 3);
}

TEST_CASE("radius floor and empty skeleton") {
    BinaryImage m(9, 9, 0);
    m(4, 4) = 1;
    const auto r = skeleton_radii(m, distance_transform(m));
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].radius == 1);
    CHECK(skeleton_radii(BinaryImage(9, 9, 0), ScalarImage(9, 9, 0.0f)).points.empty());
}

TEST_CASE("radius along a tube whose half-width steps from 2 to 4") {
    BinaryImage m(80, 25, 0);
    for (int x = 0; x < 80; ++x) {
        const int h = x < 40 ? 2 : 4;
        for (int y = 12 - h; y <= 12 + h; ++y) m(x, y) = 1;
    }
    BinaryImage sk(80, 25, 0);
    for (int x = 0; x < 80; ++x) sk(x, 12) = 1;
    const auto r = skeleton_radii(sk, distance_transform(m));
    int prev = 0;
    for (const auto& p : r.points) {
        if (p.x < 5 || p.x >= 75) continue;
        CHECK(p.radius >= 2);
        CHECK(p.radius <= 4);
        CHECK(p.radius >= prev);
        prev = p.radius;
    }
    CHECK(r.points[10].radius == 2);
    CHECK(r.points[70].radius == 4);
}

TEST_CASE("segmentation of a phantom en face recovers the planted centerlines") {
    const auto spec = load_phantom_spec(std::string(FAZ3D_SPEC_DIR) + "/axial_tubes.json");
    const auto ph = generate_phantom(spec, 1);
    for (Plexus p : kAllPlexuses) {
        const auto i = static_cast<std::size_t>(p);
        const auto seg = segment_plexus_2d(ph.scan.enfaces[i]);
        // skeleton within the vessel mask, on positive distance
        for (const auto& q : seg.skeleton.points) {
            REQUIRE(seg.mask(q.x, q.y));
            REQUIRE(seg.distance(q.x, q.y) > 0.0f);
        }
        BinaryImage truth(spec.nx, spec.ny, 0);
        for (const auto& c : ph.truth.plexuses[i].centerline) {
            truth(static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y))) = 1;
        }
        std::size_t hit = 0, total = 0;
        for (int y = 0; y < spec.ny; ++y)
            for (int x = 0; x < spec.nx; ++x) {
                if (!truth(x, y)) continue;
                ++total;
                bool near = false;
                for (int dy = -1; dy <= 1 && !near; ++dy)
                    for (int dx = -1; dx <= 1 && !near; ++dx)
                        near = seg.skeleton_mask.contains(x + dx, y + dy) && seg.skeleton_mask(x + dx, y + dy);
                hit += near;
            }
        INFO(plexus_name(p));
        CHECK(static_cast<double>(hit) / static_cast<double>(total) >= 0.90);
    }
}

TEST_CASE("all-dark en face yields an empty result on the degenerate path") {
    PipelineConfig cfg;
    cfg.otsu_degenerate = OtsuDegenerate::empty;
    const auto seg = segment_plexus_2d(EnFaceImage{ScalarImage(32, 32, 0.0f), Plexus::deep}, cfg);
    CHECK(count_true(seg.mask) == 0);
    CHECK(seg.skeleton.points.empty());
    CHECK_THROWS_AS((void)segment_plexus_2d(EnFaceImage{ScalarImage(32, 32, 0.0f), Plexus::deep}), Error);
}
