#include "faz3d/reconstruct3d.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "faz3d/morphology.hpp"

namespace faz3d {

Skeleton3D locate_axial(const Skeleton2D& sk, const ScalarVolume& vol, const PlexusBounds& bounds) {
    if (bounds.upper.nx() != vol.nx() || bounds.upper.ny() != vol.ny() || bounds.lower.nx() != vol.nx() ||
        bounds.lower.ny() != vol.ny()) {
        throw std::invalid_argument("slab bounds do not match the volume");
    }
    for (const auto& p : sk.points) {
        if (!vol.contains(p.x, p.y, 0)) throw std::invalid_argument("skeleton point outside the volume");
    }
    const auto n = static_cast<std::ptrdiff_t>(sk.points.size());
    std::vector<int> z_of(sk.points.size(), -1);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& p = sk.points[static_cast<std::size_t>(i)];
        const double up = bounds.upper(p.x, p.y);
        const double lo = bounds.lower(p.x, p.y);
        // Smallest integer strictly above `up`, largest strictly below `lo`.
        const int z0 = std::max(0, static_cast<int>(std::floor(up)) + 1);
        const int z1 = std::min(vol.nz() - 1, static_cast<int>(std::ceil(lo)) - 1);
        int best = -1;
        float best_v = 0;
        for (int z = z0; z <= z1; ++z) {
            const float v = vol(p.x, p.y, z);
            if (best < 0 || v > best_v) {
                best = z;
                best_v = v;
            }
        }
        z_of[static_cast<std::size_t>(i)] = best;
    }

    Skeleton3D out;
    out.plexus = bounds.plexus;
    out.points.reserve(sk.points.size());
    for (std::size_t i = 0; i < sk.points.size(); ++i) {
        if (z_of[i] < 0) {
            ++out.dropped;
            continue;
        }
        const auto& p = sk.points[i];
        out.points.push_back({p.x, p.y, z_of[i], p.radius});
    }
    return out;
}

BinaryVolume inflate_network(const Skeleton3D& sk, int nx, int ny, int nz) {
    BinaryVolume out(nx, ny, nz, 0);
    // Points grouped by radius; each group is stamped with its own ball.
    std::map<int, std::vector<const SkeletonPoint3D*>> by_radius;
    for (const auto& p : sk.points) {
        if (p.radius < 1) throw std::invalid_argument("skeleton radius must be >= 1");
        by_radius[p.radius].push_back(&p);
    }
    for (const auto& [r, pts] : by_radius) {
        const auto ball = ball_offsets(r);
        for (const auto* p : pts) {
            if (p->x - r >= 0 && p->y - r >= 0 && p->z - r >= 0 && p->x + r < nx && p->y + r < ny && p->z + r < nz) {
                for (const auto& o : ball) out(p->x + o[0], p->y + o[1], p->z + o[2]) = 1;
            } else {
                for (const auto& o : ball) {
                    const int x = p->x + o[0], y = p->y + o[1], z = p->z + o[2];
                    if (out.contains(x, y, z)) out(x, y, z) = 1;
                }
            }
        }
    }
    return out;
}

BinaryVolume merge_networks(const BinaryVolume& a, const BinaryVolume& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("network shapes differ");
    BinaryVolume out(a.nx(), a.ny(), a.nz(), 0);
    const auto av = a.values(), bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = (av[i] || bv[i]) ? 1 : 0;
    return out;
}

BinaryVolume merge_networks(const BinaryVolume& a, const BinaryVolume& b, const BinaryVolume& c) {
    if (!a.same_shape(b) || !a.same_shape(c)) throw std::invalid_argument("network shapes differ");
    BinaryVolume out(a.nx(), a.ny(), a.nz(), 0);
    const auto av = a.values(), bv = b.values(), cv = c.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = (av[i] || bv[i] || cv[i]) ? 1 : 0;
    return out;
}

}  // namespace faz3d
