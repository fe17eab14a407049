#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

#include "faz3d/volume_io.hpp"

namespace faz3d {

// Synthetic scan with known capillary geometry. Layer depths and tube depths are in
// native axial voxels; planar positions in pixels; physical sizes in micrometers.

struct TubeSpec {
    std::vector<std::array<double, 2>> points;  // polyline, pixels
    bool closed = false;
    double radius_um = 6.0;
    /// Position inside the plexus slab, 0 = upper bound, 1 = lower bound.
    double depth_fraction = 0.5;
};

struct LatticeSpec {
    double spacing_um = 0.0;  // 0 disables the lattice
    double jitter = 0.25;     // node jitter as a fraction of spacing
    double radius_um = 6.0;
    double depth_fraction = 0.5;
    double depth_jitter = 0.0;  // +- uniform, added to depth_fraction per segment
};

struct PlexusSpec {
    double faz_radius_um = 0.0;  // 0: no avascular zone
    /// Ring vessel hugging the avascular zone (inner edge at faz_radius_um).
    bool ring = true;
    double ring_radius_um = 6.0;
    double ring_depth_fraction = 0.5;
    LatticeSpec lattice;
    std::vector<TubeSpec> tubes;
};

struct PhantomSpec {
    int nx = 128, ny = 128, nz = 96;
    double res_plane_um = 3.87;
    double res_axial_um = 3.87;
    /// Avascular center; defaults to (nx / 2, ny / 2).
    std::optional<std::array<double, 2>> center;

    // Layer depths at the center, native voxels, and a shared planar tilt (voxels/pixel).
    double ilm = 20, ipl = 38, opl = 60, rpe = 80;
    double slope_x = 0.0, slope_y = 0.0;

    // Foveal pit: inner layers (ILM, IPL) are pulled toward the OPL by
    // depth_fraction * exp(-(rho / width)^shape) of their distance to it.
    double pit_depth_fraction = 0.0;
    double pit_width_um = 300.0;
    double pit_shape = 2.0;

    std::array<PlexusSpec, 3> plexuses;

    double vessel_intensity = 200.0;
    double background_intensity = 40.0;
    double noise_sigma = 0.0;
    double speckle = 0.0;  // multiplicative uniform [1 - a, 1 + a]

    std::uint64_t seed = 1;

    /// Throws faz3d::Error on a violated invariant.
    void validate() const;
};

[[nodiscard]] PhantomSpec phantom_spec_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json phantom_spec_to_json(const PhantomSpec& spec);
[[nodiscard]] PhantomSpec load_phantom_spec(const std::filesystem::path& path);

struct CenterlinePoint {
    double x = 0, y = 0, z = 0;  // z in native voxels
    double radius_um = 0;
};

struct PlexusTruth {
    /// Centerline samples, roughly 4 per pixel of arc length.
    std::vector<CenterlinePoint> centerline;
    double faz_radius_um = 0.0;
    double faz_area_mm2 = 0.0;
};

struct GroundTruth {
    std::array<PlexusTruth, 3> plexuses;
    /// Avascular columns (one radius per plexus slab) clipped to [ILM, OPL].
    double faz_volume_mm3 = 0.0;
};

[[nodiscard]] nlohmann::json ground_truth_to_json(const GroundTruth& gt);

struct Phantom {
    Scan scan;
    GroundTruth truth;
};

/// Deterministic in (spec, seed); independent of the thread count.
[[nodiscard]] Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Per column, max of vol over integer z with upper <= z <= lower; 0 for an empty slab.
[[nodiscard]] EnFaceImage max_projection(const ScalarVolume& vol, const PlexusBounds& bounds);

/// The analytic layer surfaces of a spec, native voxels.
[[nodiscard]] SurfaceSet phantom_surfaces(const PhantomSpec& spec);

}  // namespace faz3d
