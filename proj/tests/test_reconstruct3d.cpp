#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "faz3d/morphology.hpp"
#include "faz3d/reconstruct3d.hpp"
#include "oracles.hpp"

using namespace faz3d;

namespace {

PlexusBounds flat_bounds(int nx, int ny, float up, float lo) {
    return {SurfaceMap(nx, ny, up), SurfaceMap(nx, ny, lo), Plexus::superficial};
}

}  // namespace

TEST_CASE("axial location picks the brightest voxel strictly inside the slab") {
    ScalarVolume v(3, 1, 10, 0.0f);
    v(0, 0, 4) = 5.0f;
    v(0, 0, 7) = 3.0f;
    v(0, 0, 2) = 9.0f;  // on the upper bound, excluded
    v(1, 0, 8) = 9.0f;  // on the lower bound, excluded
    v(1, 0, 5) = 1.0f;
    Skeleton2D sk{{{0, 0, 2}, {1, 0, 3}, {2, 0, 1}}};
    const auto out = locate_axial(sk, v, flat_bounds(3, 1, 2.0f, 8.0f));
    REQUIRE(out.points.size() == 3);
    CHECK(out.points[0] == SkeletonPoint3D{0, 0, 4, 2});
    CHECK(out.points[1] == SkeletonPoint3D{1, 0, 5, 3});
    // A flat column ties everywhere: the smallest admissible z wins.
    CHECK(out.points[2] == SkeletonPoint3D{2, 0, 3, 1});
    CHECK(out.dropped == 0);
}

TEST_CASE("fractional bounds are not rounded") {
    ScalarVolume v(1, 1, 10, 0.0f);
    v(0, 0, 3) = 1.0f;
    v(0, 0, 5) = 2.0f;
    Skeleton2D sk{{{0, 0, 1}}};
    // Open interval (2.5, 5.0) holds z = 3 and 4 only.
    const auto out = locate_axial(sk, v, flat_bounds(1, 1, 2.5f, 5.0f));
    REQUIRE(out.points.size() == 1);
    CHECK(out.points[0].z == 3);
}

TEST_CASE("empty slabs drop the point") {
    ScalarVolume v(2, 1, 6, 1.0f);
    Skeleton2D sk{{{0, 0, 1}, {1, 0, 1}}};
    PlexusBounds b = flat_bounds(2, 1, 2.0f, 3.0f);
    b.lower(1, 0) = 5.0f;
    const auto out = locate_axial(sk, v, b);
    CHECK(out.dropped == 1);
    REQUIRE(out.points.size() == 1);
    CHECK(out.points[0].x == 1);
    CHECK(out.points[0].z == 3);
    // Bounds beyond the volume clip to it.
    const auto wide = locate_axial(Skeleton2D{{{0, 0, 1}}}, v, flat_bounds(2, 1, -4.0f, 40.0f));
    REQUIRE(wide.points.size() == 1);
    CHECK(wide.points[0].z == 0);
}

TEST_CASE("located points stay inside the slab for random data") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<float> u(0.0f, 1.0f), s(0.0f, 30.0f), t(0.0f, 8.0f);
    for (int trial = 0; trial < 500; ++trial) {
        const int nx = 6, ny = 5, nz = 32;
        ScalarVolume v(nx, ny, nz);
        for (auto& x : v.values()) x = u(rng);
        PlexusBounds b = flat_bounds(nx, ny, 0, 0);
        Skeleton2D sk;
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                b.upper(x, y) = s(rng);
                b.lower(x, y) = b.upper(x, y) + t(rng);
                sk.points.push_back({x, y, 1});
            }
        const auto out = locate_axial(sk, v, b);
        REQUIRE(out.points.size() + out.dropped == sk.points.size());
        for (const auto& p : out.points) {
            REQUIRE(static_cast<float>(p.z) > b.upper(p.x, p.y));
            REQUIRE(static_cast<float>(p.z) < b.lower(p.x, p.y));
            for (int z = 0; z < nz; ++z)
                if (z > b.upper(p.x, p.y) && z < b.lower(p.x, p.y)) REQUIRE(v(p.x, p.y, z) <= v(p.x, p.y, p.z));
        }
    }
}

TEST_CASE("locate_axial rejects mismatched inputs") {
    ScalarVolume v(4, 4, 4, 0.0f);
    CHECK_THROWS((void)locate_axial(Skeleton2D{}, v, flat_bounds(3, 4, 0, 3)));
    CHECK_THROWS((void)locate_axial(Skeleton2D{{{9, 0, 1}}}, v, flat_bounds(4, 4, 0, 3)));
}

TEST_CASE("inflation of a single point is a ball") {
    for (int r = 1; r <= 6; ++r) {
        Skeleton3D sk;
        sk.points.push_back({10, 10, 10, r});
        const auto m = inflate_network(sk, 21, 21, 21);
        CHECK(count_true(m) == ball_offsets(r).size());
    }
}

TEST_CASE("inflation equals dilation of each radius group, clipped at the border") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> c(0, 15), rr(1, 4);
    for (int trial = 0; trial < 60; ++trial) {
        Skeleton3D sk;
        BinaryVolume expect(16, 16, 16, 0);
        for (int i = 0; i < 6; ++i) {
            const SkeletonPoint3D p{c(rng), c(rng), c(rng), rr(rng)};
            sk.points.push_back(p);
            BinaryVolume one(16, 16, 16, 0);
            one(p.x, p.y, p.z) = 1;
            const auto d = oracle::dilate_ball(one, p.radius);
            for (std::size_t k = 0; k < d.size(); ++k) expect.values()[k] |= d.values()[k];
        }
        REQUIRE(inflate_network(sk, 16, 16, 16) == expect);
    }
}

TEST_CASE("merge is a voxelwise OR") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        BinaryVolume a(5, 4, 3), b(5, 4, 3), c(5, 4, 3);
        std::bernoulli_distribution bit(0.3);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a.values()[i] = bit(rng);
            b.values()[i] = bit(rng);
            c.values()[i] = bit(rng);
        }
        const auto m = merge_networks(a, b, c);
        for (std::size_t i = 0; i < a.size(); ++i)
            REQUIRE(m.values()[i] == (a.values()[i] | b.values()[i] | c.values()[i]));
        REQUIRE(merge_networks(a, b) == merge_networks(b, a));
        REQUIRE(merge_networks(a, a) == a);
        REQUIRE(merge_networks(a, merge_networks(b, c)) == m);
    }
    CHECK_THROWS_AS((void)merge_networks(BinaryVolume(2, 2, 2), BinaryVolume(2, 2, 3)), std::invalid_argument);
}
