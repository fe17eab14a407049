#pragma once

#include <array>

#include "faz3d/config.hpp"
#include "faz3d/types.hpp"

namespace faz3d {

/// Linear resampling along z so that res_axial becomes res_plane.
/// Ratio R = res_axial / res_plane, nz' = round(nz * R), output slice k samples input z = k / R.
[[nodiscard]] OctaVolume resample_axial(const OctaVolume& vol);

/// Multiplies every surface map by `ratio` (the same R used for the volume).
[[nodiscard]] SurfaceSet rescale_surfaces(const SurfaceSet& surfaces, double ratio);

/// Replaces outliers against a moving-window median with a tensor-product cubic spline
/// fitted to the surrounding inliers. Inliers are returned unchanged.
[[nodiscard]] SurfaceMap regularize_surface(const SurfaceMap& surface, const PipelineConfig& cfg = {});

/// Inlier/outlier flags used by regularize_surface (1 = outlier).
[[nodiscard]] BinaryImage surface_outliers(const SurfaceMap& surface, const PipelineConfig& cfg = {});

struct FlattenResult {
    OctaVolume volume;
    SurfaceSet surfaces;
    /// Integer shift applied to each column (voxels toward larger z).
    Grid2<int> shift;
};

/// Shifts each column by nz - 1 - round(rpe) with zero fill.
[[nodiscard]] FlattenResult flatten_on_rpe(const OctaVolume& vol, const SurfaceSet& surfaces);

/// Separable 3D Gaussian, kernel truncated at 4 sigma, replicate borders.
[[nodiscard]] OctaVolume gaussian3d(const OctaVolume& vol, double sigma = 3.0);

/// SVC = (ilm, ipl-), ICP = (ipl-, ipl+), DCP = (ipl+, opl), offsets converted with the
/// axial voxel pitch. Stores ipl_minus / ipl_plus into `surfaces`.
[[nodiscard]] std::array<PlexusBounds, 3> derive_plexus_bounds(SurfaceSet& surfaces, double axial_pitch_um,
                                                               const PipelineConfig& cfg = {});

struct PreprocessResult {
    OctaVolume volume;
    SurfaceSet surfaces;
    std::array<PlexusBounds, 3> bounds;
    Grid2<int> shift;
    double ratio = 1.0;
};

/// resample -> regularize -> flatten -> Gaussian -> plexus bounds.
[[nodiscard]] PreprocessResult preprocess(const OctaVolume& vol, const SurfaceSet& surfaces,
                                          const PipelineConfig& cfg = {});

}  // namespace faz3d
