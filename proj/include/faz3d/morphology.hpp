#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "faz3d/grid.hpp"

namespace faz3d {

// Binary morphology on dense grids. Structuring elements are Euclidean:
// disk(r) = {(dx,dy) : dx^2+dy^2 <= r^2}, ball(r) = {(dx,dy,dz) : dx^2+dy^2+dz^2 <= r^2}.
// Dilation is evaluated exactly through a squared Euclidean distance transform, so the
// cost does not depend on r.

[[nodiscard]] BinaryImage dilate_disk(const BinaryImage& mask, int radius);
[[nodiscard]] BinaryVolume dilate_ball(const BinaryVolume& mask, int radius);

/// Offsets {dx, dy, dz} of ball(r), enumerated in raster order.
[[nodiscard]] std::vector<std::array<int, 3>> ball_offsets(int radius);

enum class Connectivity { face, full };  // 4/6 or 8/26 neighbors

/// Run-length connected-component labeling for 2D (nz = 1) and 3D binary grids.
struct Components {
    struct Run {
        int y = 0;
        int z = 0;
        int x0 = 0;
        int x1 = 0;  // inclusive
    };
    int nx = 0;
    int ny = 0;
    int nz = 0;
    std::vector<Run> runs;
    /// Runs of row (y, z) occupy [row_start[y + ny*z], row_start[y + ny*z + 1]).
    std::vector<std::size_t> row_start;
    std::vector<int> run_label;
    /// Per label: voxel count and whether it touches any face of the grid.
    std::vector<std::int64_t> sizes;
    std::vector<std::uint8_t> touches_border;

    [[nodiscard]] int count() const noexcept { return static_cast<int>(sizes.size()); }
};

/// Labels are numbered 0.. in order of first appearance in raster order (z, y, x).
[[nodiscard]] Components label_components(const BinaryImage& mask, Connectivity conn = Connectivity::full);
[[nodiscard]] Components label_components(const BinaryVolume& mask, Connectivity conn = Connectivity::full);

/// Label at (x, y, z), or -1 when the voxel is false.
[[nodiscard]] int component_at(const Components& c, int x, int y, int z = 0);

[[nodiscard]] BinaryImage component_mask(const Components& c, int label, int nx, int ny);
[[nodiscard]] BinaryVolume component_mask(const Components& c, int label, int nx, int ny, int nz);

/// Drops components with fewer than `min_size` elements.
[[nodiscard]] BinaryImage remove_small_components(const BinaryImage& mask, int min_size,
                                                  Connectivity conn = Connectivity::full);
[[nodiscard]] BinaryVolume remove_small_components(const BinaryVolume& mask, int min_size,
                                                   Connectivity conn = Connectivity::full);

[[nodiscard]] BinaryImage logical_not(const BinaryImage& mask);
[[nodiscard]] BinaryVolume logical_not(const BinaryVolume& mask);

}  // namespace faz3d
