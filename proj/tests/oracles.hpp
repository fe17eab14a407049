#pragma once

// Slow, obviously-correct reference implementations used as test oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "faz3d/grid.hpp"
#include "faz3d/vessel2d.hpp"

namespace oracle {

using namespace faz3d;

__extension__ typedef __int128 Wide;

/// Exhaustive Otsu: for every cut k, class weights and means straight from the pixels,
/// sigma_B^2 = w0 w1 (mu0 - mu1)^2 compared as exact rationals. Ties go to the lowest k.
inline int otsu_cut(const ScalarImage& img) {
    float lo = std::numeric_limits<float>::infinity(), hi = -lo;
    for (float v : img.values()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<int> bins;
    for (float v : img.values()) bins.push_back(otsu_bin(v, lo, hi));
    const auto n = static_cast<std::int64_t>(bins.size());
    int best = -1;
    Wide best_num = 0, best_den = 1;
    for (int k = 0; k < kOtsuBins - 1; ++k) {
        std::int64_t n0 = 0, s0 = 0, s1 = 0;
        for (int b : bins) {
            if (b <= k) {
                ++n0;
                s0 += b;
            } else {
                s1 += b;
            }
        }
        const std::int64_t n1 = n - n0;
        if (n0 == 0 || n1 == 0) continue;
        // w0 w1 (s0/n0 - s1/n1)^2 = (s0 n1 - s1 n0)^2 / (n^2 n0 n1)
        const Wide d = static_cast<Wide>(s0) * n1 - static_cast<Wide>(s1) * n0;
        const Wide num = d * d;
        const Wide den = static_cast<Wide>(n0) * n1;
        if (best < 0 || num * best_den > best_num * den) {
            best = k;
            best_num = num;
            best_den = den;
        }
    }
    return best;
}

/// Chamfer distance between two pixels: a per straight step, b per diagonal step.
inline double chamfer(int dx, int dy, double a, double b) {
    dx = std::abs(dx);
    dy = std::abs(dy);
    const int d = std::min(dx, dy);
    const int s = std::max(dx, dy) - d;
    return s * a + d * b;
}

/// Brute force: min chamfer distance from each true pixel to every false pixel, with
/// the ring of pixels just outside the image counted as false.
inline ScalarImage chamfer_dt(const BinaryImage& m, double a = 1.0, double b = std::sqrt(2.0)) {
    const int nx = m.nx(), ny = m.ny();
    std::vector<std::array<int, 2>> bg;
    for (int y = -1; y <= ny; ++y) {
        for (int x = -1; x <= nx; ++x) {
            if (!m.contains(x, y) || !m(x, y)) bg.push_back({x, y});
        }
    }
    ScalarImage out(nx, ny, 0.0f);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            if (!m(x, y)) continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : bg) best = std::min(best, chamfer(q[0] - x, q[1] - y, a, b));
            out(x, y) = static_cast<float>(best);
        }
    }
    return out;
}

/// Dilation by brute force over the structuring element.
inline BinaryImage dilate_disk(const BinaryImage& m, int r) {
    BinaryImage out(m.nx(), m.ny(), 0);
    for (int y = 0; y < m.ny(); ++y) {
        for (int x = 0; x < m.nx(); ++x) {
            if (!m(x, y)) continue;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx * dx + dy * dy <= r * r && out.contains(x + dx, y + dy)) out(x + dx, y + dy) = 1;
                }
            }
        }
    }
    return out;
}

inline BinaryVolume dilate_ball(const BinaryVolume& m, int r) {
    BinaryVolume out(m.nx(), m.ny(), m.nz(), 0);
    for (int z = 0; z < m.nz(); ++z) {
        for (int y = 0; y < m.ny(); ++y) {
            for (int x = 0; x < m.nx(); ++x) {
                if (!m(x, y, z)) continue;
                for (int dz = -r; dz <= r; ++dz)
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx)
                            if (dx * dx + dy * dy + dz * dz <= r * r && out.contains(x + dx, y + dy, z + dz))
                                out(x + dx, y + dy, z + dz) = 1;
            }
        }
    }
    return out;
}

/// Connected components by flood fill; returns a label per element (-1 background).
template <class G>
std::vector<int> flood_labels(const G& m, int nx, int ny, int nz, bool full, int& count) {
    std::vector<int> lab(static_cast<std::size_t>(nx) * ny * nz, -1);
    auto at = [&](int x, int y, int z) { return static_cast<std::size_t>(x) + static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z); };
    count = 0;
    std::vector<std::array<int, 3>> stack;
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                if (!m[at(x, y, z)] || lab[at(x, y, z)] >= 0) continue;
                lab[at(x, y, z)] = count;
                stack.push_back({x, y, z});
                while (!stack.empty()) {
                    const auto p = stack.back();
                    stack.pop_back();
                    for (int dz = -1; dz <= 1; ++dz)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const int k = std::abs(dx) + std::abs(dy) + std::abs(dz);
                                if (k == 0 || (!full && k > 1)) continue;
                                const int qx = p[0] + dx, qy = p[1] + dy, qz = p[2] + dz;
                                if (qx < 0 || qy < 0 || qz < 0 || qx >= nx || qy >= ny || qz >= nz) continue;
                                if (!m[at(qx, qy, qz)] || lab[at(qx, qy, qz)] >= 0) continue;
                                lab[at(qx, qy, qz)] = count;
                                stack.push_back({qx, qy, qz});
                            }
                }
                ++count;
            }
    return lab;
}

inline int count_components(const BinaryImage& m, bool full = true) {
    int n = 0;
    (void)flood_labels(m.storage(), m.nx(), m.ny(), 1, full, n);
    return n;
}

/// True if some pixel has all nine pixels of its 3x3 neighborhood set.
inline bool has_full_block(const BinaryImage& m) {
    for (int y = 1; y + 1 < m.ny(); ++y) {
        for (int x = 1; x + 1 < m.nx(); ++x) {
            bool all = true;
            for (int dy = -1; dy <= 1 && all; ++dy)
                for (int dx = -1; dx <= 1 && all; ++dx) all = m(x + dx, y + dy) != 0;
            if (all) return true;
        }
    }
    return false;
}

/// Yokoi 8-connectivity number of (x, y); 1 means the pixel is simple.
inline int yokoi8(const BinaryImage& m, int x, int y) {
    static constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1}, dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    int p[8];
    for (int k = 0; k < 8; ++k) p[k] = m.contains(x + dx[k], y + dy[k]) && m(x + dx[k], y + dy[k]) ? 1 : 0;
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = 1 - p[k], b = 1 - p[(k + 1) % 8], c = 1 - p[(k + 2) % 8];
        n += a - a * b * c;
    }
    return n;
}

/// True if some 2x2 square of set pixels holds a pixel that could be removed
/// without changing topology, i.e. the line there is thicker than it needs to be.
inline bool has_reducible_square(const BinaryImage& m) {
    for (int y = 0; y + 1 < m.ny(); ++y)
        for (int x = 0; x + 1 < m.nx(); ++x) {
            if (!(m(x, y) && m(x + 1, y) && m(x, y + 1) && m(x + 1, y + 1))) continue;
            for (int k = 0; k < 4; ++k)
                if (yokoi8(m, x + (k & 1), y + (k >> 1)) == 1) return true;
        }
    return false;
}

inline BinaryImage random_mask(std::mt19937_64& rng, int nx, int ny, double density) {
    std::bernoulli_distribution b(density);
    BinaryImage m(nx, ny, 0);
    for (auto& v : m.values()) v = b(rng) ? 1 : 0;
    return m;
}

/// Random blobs: union of a few filled disks and bars, typical of thresholded vessels.
inline BinaryImage random_shapes(std::mt19937_64& rng, int nx, int ny, int count) {
    BinaryImage m(nx, ny, 0);
    std::uniform_int_distribution<int> ux(0, nx - 1), uy(0, ny - 1), ur(1, std::max(1, std::min(nx, ny) / 4));
    std::uniform_int_distribution<int> kind(0, 1);
    for (int i = 0; i < count; ++i) {
        const int cx = ux(rng), cy = uy(rng), r = ur(rng);
        const bool disk = kind(rng) == 0;
        const int w = std::max(1, r / 3);
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const bool in = disk ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                                     : std::abs(y - cy) <= w && std::abs(x - cx) <= r;
                if (in) m(x, y) = 1;
            }
    }
    return m;
}

}  // namespace oracle
