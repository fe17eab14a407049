#pragma once

#include "faz3d/types.hpp"

namespace faz3d {

/// Lifts each skeleton point to the z of the brightest voxel strictly inside its
/// slab, upper(x,y) < z < lower(x,y) (fractional bounds, no rounding). Ties go to
/// the smallest z. Points whose open interval holds no voxel are dropped and counted.
[[nodiscard]] Skeleton3D locate_axial(const Skeleton2D& sk, const ScalarVolume& vol, const PlexusBounds& bounds);

/// Union of Euclidean balls of radius r(p) around every point, clipped to the grid.
[[nodiscard]] BinaryVolume inflate_network(const Skeleton3D& sk, int nx, int ny, int nz);

/// Voxelwise OR. Throws std::invalid_argument on a shape mismatch.
[[nodiscard]] BinaryVolume merge_networks(const BinaryVolume& a, const BinaryVolume& b, const BinaryVolume& c);
[[nodiscard]] BinaryVolume merge_networks(const BinaryVolume& a, const BinaryVolume& b);

}  // namespace faz3d
