#pragma once

#include <optional>

#include "faz3d/config.hpp"
#include "faz3d/types.hpp"

namespace faz3d {

/// Multiscale Hessian vesselness for bright tubular structures, in [0, 1].
/// Per scale s: Hessian of the Gaussian-smoothed image scaled by s^2, eigenvalues
/// |l1| <= |l2|, V = exp(-Rb^2 / 2b1^2) * (1 - exp(-S^2 / 2b2^2)) with Rb = |l1|/|l2|,
/// S^2 = l1^2 + l2^2, and V = 0 where l2 >= 0. Output is the maximum over scales.
[[nodiscard]] ScalarImage frangi_enhance(const ScalarImage& img, const PipelineConfig& cfg = {});

struct OtsuResult {
    BinaryImage mask;
    /// Upper edge of the last background bin; mask is true above it.
    double threshold = 0.0;
    /// Background is bins [0, cut]; -1 when the input was degenerate.
    int cut = -1;
    bool degenerate = false;
};

inline constexpr int kOtsuBins = 256;

/// 256-bin histogram over [min, max]; the cut maximizes between-class variance
/// (evaluated exactly on integer counts; ties go to the lowest cut).
/// Constant input: throws when cfg.otsu_degenerate == error, else returns an all-false mask.
[[nodiscard]] OtsuResult otsu_threshold(const ScalarImage& img, const PipelineConfig& cfg = {});

/// Histogram bin of each pixel as used by otsu_threshold.
[[nodiscard]] int otsu_bin(float value, float lo, float hi) noexcept;

/// Two-subcycle thinning with a live simple-point check so that deletions never split
/// or remove an 8-connected component. Result is a subset of the mask with no solid
/// 3x3 block, and a 2x2 square survives only where all four pixels are needed for
/// connectivity. Background holes may merge or open where that is needed.
[[nodiscard]] BinaryImage skeletonize(const BinaryImage& mask);

/// Two-pass chamfer distance to the nearest false pixel (pixels outside the image count
/// as false). Weights: `axial` for 4-neighbors, `diagonal` for diagonal neighbors.
[[nodiscard]] ScalarImage distance_transform(const BinaryImage& mask, double axial = 1.0,
                                             double diagonal = 1.4142135623730951);

/// radius(p) = max(1, round((G_sigma * dt)(p))) for each skeleton pixel p, raster order.
[[nodiscard]] Skeleton2D skeleton_radii(const BinaryImage& skeleton, const ScalarImage& dt, double sigma = 1.0);

struct PlexusSegmentation {
    ScalarImage enhanced;
    BinaryImage mask;
    BinaryImage skeleton_mask;
    ScalarImage distance;
    Skeleton2D skeleton;
    double otsu_threshold = 0.0;
};

/// frangi_enhance -> otsu_threshold -> skeletonize + distance_transform -> skeleton_radii.
[[nodiscard]] PlexusSegmentation segment_plexus_2d(const EnFaceImage& enface, const PipelineConfig& cfg = {});

}  // namespace faz3d
