#include "faz3d/faz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faz3d/morphology.hpp"

namespace faz3d {

namespace {

// Picks the largest label flagged interior, ties to the lowest label.
int largest_interior(const Components& c, const std::vector<std::uint8_t>& border) {
    int best = -1;
    for (int i = 0; i < c.count(); ++i) {
        if (border[static_cast<std::size_t>(i)]) continue;
        if (best < 0 || c.sizes[static_cast<std::size_t>(i)] > c.sizes[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

}  // namespace

FazRegion2D faz_2d(const BinaryImage& vessel_mask, double res_plane_um, const PipelineConfig& cfg) {
    const int nx = vessel_mask.nx(), ny = vessel_mask.ny();
    const auto vessels = remove_small_components(vessel_mask, cfg.min_component_px, Connectivity::full);
    const auto free = logical_not(dilate_disk(vessels, cfg.faz_dilation_radius));
    const auto comps = label_components(free, Connectivity::full);

    FazRegion2D out;
    int label = largest_interior(comps, comps.touches_border);
    if (label >= 0) {
        out.selection = FazSelection::largest_interior;
    } else {
        label = component_at(comps, nx / 2, ny / 2);
        if (label >= 0) {
            out.selection = FazSelection::center_fallback;
            out.warning = "no avascular component clear of the border; using the one at the frame center";
        } else {
            out.warning = "no avascular region found";
        }
    }
    if (label < 0) {
        out.mask = BinaryImage(nx, ny, 0);
        return out;
    }
    out.mask = dilate_disk(component_mask(comps, label, nx, ny), cfg.faz_dilation_radius);
    const double px_mm = res_plane_um / 1000.0;
    out.area_mm2 = static_cast<double>(count_true(out.mask)) * px_mm * px_mm;
    return out;
}

FazRegion3D faz_3d(const BinaryVolume& network, const SurfaceMap& ilm, const SurfaceMap& opl, double res_plane_um,
                   const PipelineConfig& cfg) {
    const int nx = network.nx(), ny = network.ny(), nz = network.nz();
    if (ilm.nx() != nx || ilm.ny() != ny || opl.nx() != nx || opl.ny() != ny) {
        throw std::invalid_argument("surface maps do not match the network");
    }
    const int r = cfg.faz_dilation_radius;

    // Integer slab per column: ilm <= z <= opl.
    Grid2<int> z_top(nx, ny), z_bot(nx, ny);
    int slab_lo = nz, slab_hi = -1;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const int a = std::max(0, static_cast<int>(std::ceil(ilm(x, y))));
            const int b = std::min(nz - 1, static_cast<int>(std::floor(opl(x, y))));
            z_top(x, y) = a;
            z_bot(x, y) = b;
            if (a <= b) {
                slab_lo = std::min(slab_lo, a);
                slab_hi = std::max(slab_hi, b);
            }
        }
    }

    FazRegion3D out;
    out.mask = BinaryVolume(nx, ny, nz, 0);
    if (slab_hi < slab_lo) {
        out.warning = "empty ILM-OPL slab";
        return out;
    }

    const auto vessels = remove_small_components(network, cfg.min_component_px, Connectivity::full);

    // Everything below only matters inside [slab_lo, slab_hi]; vessels further than r
    // from that range cannot reach it, so the work is done on a z crop.
    const int c_lo = std::max(0, slab_lo - r), c_hi = std::min(nz - 1, slab_hi + r);
    const int cnz = c_hi - c_lo + 1;
    BinaryVolume crop(nx, ny, cnz, 0);
    std::copy_n(vessels.plane(c_lo), crop.size(), crop.plane(0));
    const auto closed = dilate_ball(crop, r);

    const int snz = slab_hi - slab_lo + 1;
    BinaryVolume free(nx, ny, snz, 0);
    for (int z = slab_lo; z <= slab_hi; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                if (z >= z_top(x, y) && z <= z_bot(x, y) && !closed(x, y, z - c_lo)) free(x, y, z - slab_lo) = 1;
            }
        }
    }
    const auto comps = label_components(free, Connectivity::full);

    // Border means a face of the full volume, not of the crop.
    std::vector<std::uint8_t> border(static_cast<std::size_t>(comps.count()), 0);
    for (std::size_t i = 0; i < comps.runs.size(); ++i) {
        const auto& run = comps.runs[i];
        const int z = run.z + slab_lo;
        if (run.x0 == 0 || run.x1 == nx - 1 || run.y == 0 || run.y == ny - 1 || z == 0 || z == nz - 1) {
            border[static_cast<std::size_t>(comps.run_label[i])] = 1;
        }
    }

    int label = largest_interior(comps, border);
    if (label >= 0) {
        out.selection = FazSelection::largest_interior;
    } else {
        const int cx = nx / 2, cy = ny / 2;
        const int cz = static_cast<int>(std::lround(0.5 * (ilm(cx, cy) + opl(cx, cy))));
        label = component_at(comps, cx, cy, cz - slab_lo);
        if (label >= 0) {
            out.selection = FazSelection::center_fallback;
            out.warning = "no avascular component clear of the border; using the one at the volume center";
        } else {
            out.warning = "no avascular region found";
        }
    }
    if (label < 0) return out;

    const auto grown = dilate_ball(component_mask(comps, label, nx, ny, snz), r);
    std::size_t count = 0;
    for (int z = slab_lo; z <= slab_hi; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                if (grown(x, y, z - slab_lo) && z >= z_top(x, y) && z <= z_bot(x, y)) {
                    out.mask(x, y, z) = 1;
                    ++count;
                }
            }
        }
    }
    const double vx_mm = res_plane_um / 1000.0;
    out.volume_mm3 = static_cast<double>(count) * vx_mm * vx_mm * vx_mm;
    return out;
}

}  // namespace faz3d
