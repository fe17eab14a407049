#pragma once

#include <string>

#include "faz3d/config.hpp"
#include "faz3d/types.hpp"

namespace faz3d {

/// How the avascular component was chosen after inversion.
enum class FazSelection {
    largest_interior,  // largest component not touching the frame border
    center_fallback,   // no interior component: the one containing the frame center
    none,              // nothing left to select
};

struct FazRegion2D {
    BinaryImage mask;
    double area_mm2 = 0.0;
    FazSelection selection = FazSelection::none;
    std::string warning;
};

struct FazRegion3D {
    BinaryVolume mask;
    double volume_mm3 = 0.0;
    FazSelection selection = FazSelection::none;
    std::string warning;
};

/// Removes 8-connected components < min_component_px, dilates with disk(r), inverts,
/// keeps one component, dilates it with disk(r). Area uses res_plane_um^2.
[[nodiscard]] FazRegion2D faz_2d(const BinaryImage& vessel_mask, double res_plane_um, const PipelineConfig& cfg = {});

/// The same closing in 3D with ball(r) and 26-connectivity. The inverted map is limited to
/// ilm(x,y) <= z <= opl(x,y) before the component is chosen, and the result is limited
/// to the same slab after the final dilation. Volume uses res_plane_um^3.
[[nodiscard]] FazRegion3D faz_3d(const BinaryVolume& network, const SurfaceMap& ilm, const SurfaceMap& opl,
                                 double res_plane_um, const PipelineConfig& cfg = {});

}  // namespace faz3d
