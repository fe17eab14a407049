#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <omp.h>

#include "faz3d/phantom.hpp"
#include "faz3d/preprocess.hpp"

using namespace faz3d;

namespace {

PhantomSpec small_spec() {
    PhantomSpec s;
    s.nx = 64;
    s.ny = 56;
    s.nz = 48;
    s.res_plane_um = 4.0;
    s.res_axial_um = 4.0;
    s.ilm = 8;
    s.ipl = 20;
    s.opl = 32;
    s.rpe = 40;
    s.slope_x = 0.03;
    for (auto& p : s.plexuses) {
        p.faz_radius_um = 60;
        p.lattice.spacing_um = 40;
        p.lattice.depth_jitter = 0.1;
    }
    s.noise_sigma = 20;
    s.speckle = 0.1;
    return s;
}

}  // namespace

TEST_CASE("generation is deterministic and independent of threads") {
    const auto spec = small_spec();
    omp_set_num_threads(1);
    const auto a = generate_phantom(spec, 3);
    omp_set_num_threads(4);
    const auto b = generate_phantom(spec, 3);
    omp_set_num_threads(1);
    CHECK(a.scan.volume.data == b.scan.volume.data);
    CHECK(a.scan.enfaces[2].data == b.scan.enfaces[2].data);
    CHECK(a.truth.plexuses[0].centerline.size() == b.truth.plexuses[0].centerline.size());
    const auto c = generate_phantom(spec, 4);
    CHECK_FALSE(a.scan.volume.data == c.scan.volume.data);
}

TEST_CASE("max projection equals brute force") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(0.0f, 1.0f), b(-3.0f, 14.0f);
    for (int t = 0; t < 500; ++t) {
        ScalarVolume v(5, 4, 12);
        for (auto& x : v.values()) x = u(rng);
        PlexusBounds bd{SurfaceMap(5, 4), SurfaceMap(5, 4), Plexus::deep};
        for (auto& x : bd.upper.values()) x = b(rng);
        for (auto& x : bd.lower.values()) x = b(rng);
        const auto e = max_projection(v, bd);
        REQUIRE(e.plexus == Plexus::deep);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x) {
                float m = 0.0f;
                bool any = false;
                for (int z = 0; z < 12; ++z) {
                    if (z < bd.upper(x, y) || z > bd.lower(x, y)) continue;
                    m = any ? std::max(m, v(x, y, z)) : v(x, y, z);
                    any = true;
                }
                REQUIRE(e.data(x, y) == m);
            }
    }
}

TEST_CASE("noiseless phantom: exact intensities, vessels on the centerline, clear FAZ") {
    auto spec = small_spec();
    spec.noise_sigma = 0;
    spec.speckle = 0;
    const auto ph = generate_phantom(spec, 1);
    const auto& v = ph.scan.volume.data;
    for (float x : v.values()) REQUIRE((x == 200.0f || x == 40.0f));
    const auto& surf = ph.scan.surfaces;
    for (const auto& pt : ph.truth.plexuses[1].centerline) {
        const int x = static_cast<int>(std::lround(pt.x)), y = static_cast<int>(std::lround(pt.y));
        const int z = static_cast<int>(std::lround(pt.z));
        if (!v.contains(x, y, z)) continue;
        REQUIRE(v(x, y, z) == 200.0f);
        REQUIRE(pt.z >= surf.ilm(x, y) - 1.0);
        REQUIRE(pt.z <= surf.opl(x, y) + 1.0);
    }
    // Nothing inside the avascular disk.
    const double r = 60.0 / 4.0;
    for (int y = 0; y < spec.ny; ++y)
        for (int x = 0; x < spec.nx; ++x) {
            if (std::hypot(x - 32.0, y - 28.0) >= r - 1.0) continue;
            for (int z = 0; z < spec.nz; ++z) REQUIRE(v(x, y, z) == 40.0f);
        }
}

TEST_CASE("en faces are slab projections of the stored volume") {
    const auto spec = small_spec();
    const auto ph = generate_phantom(spec, 2);
    SurfaceSet s = ph.scan.surfaces;
    const auto bounds = derive_plexus_bounds(s, spec.res_axial_um);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ph.scan.enfaces[i].plexus == kAllPlexuses[i]);
        CHECK(ph.scan.enfaces[i].data == max_projection(ph.scan.volume.data, bounds[i]).data);
    }
}

TEST_CASE("ground truth area and volume") {
    auto spec = small_spec();
    spec.slope_x = 0;
    spec.plexuses[1].faz_radius_um = 40;
    const auto ph = generate_phantom(spec, 1);
    CHECK(ph.truth.plexuses[0].faz_area_mm2 == doctest::Approx(std::numbers::pi * 0.06 * 0.06));
    CHECK(ph.truth.plexuses[1].faz_area_mm2 == doctest::Approx(std::numbers::pi * 0.04 * 0.04));

    // Equal radii and flat layers: one cylinder from ILM to OPL.
    spec.plexuses[1].faz_radius_um = 60;
    const auto flat = generate_phantom(spec, 1);
    const double expect = std::numbers::pi * 0.06 * 0.06 * (spec.opl - spec.ilm) * spec.res_axial_um * 1e-3;
    CHECK(flat.truth.faz_volume_mm3 == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("a foveal pit thins the inner layers at the center only") {
    auto spec = small_spec();
    spec.slope_x = 0;
    spec.pit_depth_fraction = 0.5;
    spec.pit_width_um = 40;
    const auto s = phantom_surfaces(spec);
    CHECK(s.ilm(32, 28) == doctest::Approx(20.0));  // halfway from 8 to 32
    CHECK(s.opl(32, 28) == doctest::Approx(32.0));
    CHECK(s.ilm(0, 0) == doctest::Approx(8.0).epsilon(1e-3));
}

TEST_CASE("spec JSON round trip and validation") {
    const auto spec = small_spec();
    const auto j = phantom_spec_to_json(spec);
    CHECK(phantom_spec_to_json(phantom_spec_from_json(j)) == j);

    auto bad = j;
    bad["unknown_key"] = 1;
    CHECK_THROWS_AS((void)phantom_spec_from_json(bad), Error);

    auto layers = spec;
    layers.ipl = layers.opl + 1;
    CHECK_THROWS_AS(layers.validate(), Error);
    auto tilt = spec;
    tilt.slope_x = 1.0;  // layers leave the volume
    CHECK_THROWS_AS(tilt.validate(), Error);
    auto speckle = spec;
    speckle.speckle = 1.0;
    CHECK_THROWS_AS(speckle.validate(), Error);
}

TEST_CASE("bundled specs load and validate") {
    for (const char* name : {"axial_tubes", "faz_disk", "clinical", "cube128", "cube256", "small"}) {
        CAPTURE(name);
        const auto s = load_phantom_spec(std::string(FAZ3D_SPEC_DIR) + "/" + name + ".json");
        CHECK_NOTHROW(s.validate());
    }
}
