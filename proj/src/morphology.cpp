#include "faz3d/morphology.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace faz3d {

namespace {

using Dist = std::uint16_t;

struct EnvelopeScratch {
    std::vector<int> sites;
    std::vector<double> bounds;
    explicit EnvelopeScratch(int n) : sites(static_cast<std::size_t>(n)), bounds(static_cast<std::size_t>(n) + 1) {}
};

// out[q] = min(cap, min_i (q - i)^2 + f[i]); values >= cap act as "no site".
// Lower envelope of parabolas; intersections are exact rationals of small integers,
// so double comparisons never misorder distinct breakpoints.
void envelope_1d(const Dist* f, int n, Dist* out, int cap, EnvelopeScratch& s) {
    auto& v = s.sites;
    auto& z = s.bounds;
    constexpr double inf = std::numeric_limits<double>::infinity();
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] >= cap) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
            continue;
        }
        const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
        double sect = 0;
        while (k >= 0) {
            const int p = v[static_cast<std::size_t>(k)];
            sect = (fq - (static_cast<double>(f[p]) + static_cast<double>(p) * p)) / (2.0 * (q - p));
            if (sect <= z[static_cast<std::size_t>(k)]) {
                --k;
            } else {
                break;
            }
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -inf;
            z[1] = inf;
        } else {
            ++k;
            v[static_cast<std::size_t>(k)] = q;
            z[static_cast<std::size_t>(k)] = sect;
            z[static_cast<std::size_t>(k) + 1] = inf;
        }
    }
    if (k < 0) {
        std::fill_n(out, n, static_cast<Dist>(cap));
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
        const int p = v[static_cast<std::size_t>(j)];
        const long d = static_cast<long>(q - p) * (q - p) + f[p];
        out[q] = static_cast<Dist>(std::min<long>(d, cap));
    }
}

// Squared distance along a row to the nearest set element, capped.
void row_distance(const std::uint8_t* row, int n, Dist* out, int cap) {
    constexpr int far = std::numeric_limits<int>::max() / 4;
    int last = -far;
    for (int x = 0; x < n; ++x) {
        if (row[x]) last = x;
        const long d = static_cast<long>(x - last);
        out[x] = static_cast<Dist>(std::min<long>(d * d, cap));
    }
    last = far;
    for (int x = n - 1; x >= 0; --x) {
        if (row[x]) last = x;
        const long d = static_cast<long>(last - x);
        out[x] = std::min(out[x], static_cast<Dist>(std::min<long>(d * d, cap)));
    }
}

void check_radius(int radius) {
    if (radius < 0 || radius > 254) throw std::invalid_argument("dilation radius must be in [0, 254]");
}

}  // namespace

BinaryImage dilate_disk(const BinaryImage& mask, int radius) {
    check_radius(radius);
    const int nx = mask.nx(), ny = mask.ny();
    const int cap = radius * radius + 1;
    Grid2<Dist> d(nx, ny);
    for (int y = 0; y < ny; ++y) row_distance(&mask(0, y), nx, &d(0, y), cap);

    BinaryImage out(nx, ny, 0);
    EnvelopeScratch scratch(ny);
    std::vector<Dist> line(static_cast<std::size_t>(ny)), res(static_cast<std::size_t>(ny));
    for (int x = 0; x < nx; ++x) {
        for (int y = 0; y < ny; ++y) line[static_cast<std::size_t>(y)] = d(x, y);
        envelope_1d(line.data(), ny, res.data(), cap, scratch);
        for (int y = 0; y < ny; ++y) out(x, y) = res[static_cast<std::size_t>(y)] < cap ? 1 : 0;
    }
    return out;
}

BinaryVolume dilate_ball(const BinaryVolume& mask, int radius) {
    check_radius(radius);
    const int nx = mask.nx(), ny = mask.ny(), nz = mask.nz();
    const int cap = radius * radius + 1;
    Grid3<Dist> d(nx, ny, nz);

    // x then y, one z plane at a time.
#pragma omp parallel
    {
        EnvelopeScratch scratch(ny);
        std::vector<Dist> line(static_cast<std::size_t>(ny)), res(static_cast<std::size_t>(ny));
#pragma omp for schedule(static)
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y) row_distance(&mask(0, y, z), nx, &d(0, y, z), cap);
            for (int x = 0; x < nx; ++x) {
                for (int y = 0; y < ny; ++y) line[static_cast<std::size_t>(y)] = d(x, y, z);
                envelope_1d(line.data(), ny, res.data(), cap, scratch);
                for (int y = 0; y < ny; ++y) d(x, y, z) = res[static_cast<std::size_t>(y)];
            }
        }
    }

    // z pass, gathering blocks of adjacent x so each plane read is contiguous.
    BinaryVolume out(nx, ny, nz, 0);
    constexpr int kBlock = 64;
#pragma omp parallel
    {
        EnvelopeScratch scratch(nz);
        std::vector<Dist> block(static_cast<std::size_t>(nz) * kBlock);
        std::vector<Dist> line(static_cast<std::size_t>(nz)), res(static_cast<std::size_t>(nz));
#pragma omp for schedule(static)
        for (int y = 0; y < ny; ++y) {
            for (int x0 = 0; x0 < nx; x0 += kBlock) {
                const int bw = std::min(kBlock, nx - x0);
                for (int z = 0; z < nz; ++z) {
                    std::copy_n(&d(x0, y, z), bw, &block[static_cast<std::size_t>(z) * kBlock]);
                }
                for (int b = 0; b < bw; ++b) {
                    bool any = false;
                    for (int z = 0; z < nz; ++z) {
                        line[static_cast<std::size_t>(z)] = block[static_cast<std::size_t>(z) * kBlock + b];
                        any = any || line[static_cast<std::size_t>(z)] < cap;
                    }
                    if (!any) continue;
                    envelope_1d(line.data(), nz, res.data(), cap, scratch);
                    for (int z = 0; z < nz; ++z) {
                        if (res[static_cast<std::size_t>(z)] < cap) out(x0 + b, y, z) = 1;
                    }
                }
            }
        }
    }
    return out;
}

std::vector<std::array<int, 3>> ball_offsets(int radius) {
    std::vector<std::array<int, 3>> off;
    const int r2 = radius * radius;
    for (int dz = -radius; dz <= radius; ++dz)
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx)
                if (dx * dx + dy * dy + dz * dz <= r2) off.push_back({dx, dy, dz});
    return off;
}

// ---------------------------------------------------------------------------
// Connected components

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) std::swap(a, b);
        parent[a] = b;  // smaller index is the root
    }
};

Components label_impl(const std::uint8_t* data, int nx, int ny, int nz, Connectivity conn) {
    Components c;
    c.nx = nx;
    c.ny = ny;
    c.nz = nz;
    const std::size_t rows = static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    c.row_start.resize(rows + 1);
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            const std::size_t r = static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z);
            c.row_start[r] = c.runs.size();
            const std::uint8_t* row = data + r * static_cast<std::size_t>(nx);
            int x = 0;
            while (x < nx) {
                if (!row[x]) {
                    ++x;
                    continue;
                }
                const int x0 = x;
                while (x < nx && row[x]) ++x;
                c.runs.push_back({y, z, x0, x - 1});
            }
        }
    }
    c.row_start[rows] = c.runs.size();

    DisjointSet ds(c.runs.size());
    const int slack = conn == Connectivity::full ? 1 : 0;
    auto merge_rows = [&](std::size_t ra, std::size_t rb) {
        std::size_t i = c.row_start[ra], ie = c.row_start[ra + 1];
        std::size_t j = c.row_start[rb], je = c.row_start[rb + 1];
        while (i < ie && j < je) {
            const auto& a = c.runs[i];
            const auto& b = c.runs[j];
            if (a.x0 <= b.x1 + slack && b.x0 <= a.x1 + slack) ds.unite(i, j);
            if (a.x1 < b.x1) ++i;
            else ++j;
        }
    };

    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            const std::size_t r = static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z);
            if (c.row_start[r] == c.row_start[r + 1]) continue;
            auto row_of = [&](int yy, int zz) {
                return static_cast<std::size_t>(yy) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(zz);
            };
            if (y > 0) merge_rows(r, row_of(y - 1, z));
            if (z > 0) {
                merge_rows(r, row_of(y, z - 1));
                if (conn == Connectivity::full) {
                    if (y > 0) merge_rows(r, row_of(y - 1, z - 1));
                    if (y + 1 < ny) merge_rows(r, row_of(y + 1, z - 1));
                }
            }
        }
    }

    c.run_label.assign(c.runs.size(), -1);
    std::vector<int> root_label(c.runs.size(), -1);
    for (std::size_t i = 0; i < c.runs.size(); ++i) {
        const std::size_t root = ds.find(i);
        int& lab = root_label[root];
        if (lab < 0) {
            lab = static_cast<int>(c.sizes.size());
            c.sizes.push_back(0);
            c.touches_border.push_back(0);
        }
        c.run_label[i] = lab;
        const auto& run = c.runs[i];
        c.sizes[static_cast<std::size_t>(lab)] += run.x1 - run.x0 + 1;
        const bool border = run.x0 == 0 || run.x1 == nx - 1 || run.y == 0 || run.y == ny - 1 ||
                            (nz > 1 && (run.z == 0 || run.z == nz - 1));
        if (border) c.touches_border[static_cast<std::size_t>(lab)] = 1;
    }
    return c;
}

template <class Paint>
void for_each_run_of(const Components& c, Paint&& paint) {
    for (std::size_t i = 0; i < c.runs.size(); ++i) paint(c.runs[i], c.run_label[i]);
}

}  // namespace

Components label_components(const BinaryImage& mask, Connectivity conn) {
    return label_impl(mask.storage().data(), mask.nx(), mask.ny(), 1, conn);
}

Components label_components(const BinaryVolume& mask, Connectivity conn) {
    return label_impl(mask.storage().data(), mask.nx(), mask.ny(), mask.nz(), conn);
}

int component_at(const Components& c, int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= c.nx || y >= c.ny || z >= c.nz) return -1;
    const std::size_t r = static_cast<std::size_t>(y) + static_cast<std::size_t>(c.ny) * static_cast<std::size_t>(z);
    const auto first = c.runs.begin() + static_cast<std::ptrdiff_t>(c.row_start[r]);
    const auto last = c.runs.begin() + static_cast<std::ptrdiff_t>(c.row_start[r + 1]);
    auto it = std::upper_bound(first, last, x, [](int v, const Components::Run& run) { return v < run.x0; });
    if (it == first) return -1;
    --it;
    if (x > it->x1) return -1;
    return c.run_label[static_cast<std::size_t>(it - c.runs.begin())];
}

BinaryImage component_mask(const Components& c, int label, int nx, int ny) {
    BinaryImage out(nx, ny, 0);
    for_each_run_of(c, [&](const Components::Run& run, int lab) {
        if (lab == label) std::fill(&out(run.x0, run.y), &out(run.x1, run.y) + 1, 1);
    });
    return out;
}

BinaryVolume component_mask(const Components& c, int label, int nx, int ny, int nz) {
    BinaryVolume out(nx, ny, nz, 0);
    for_each_run_of(c, [&](const Components::Run& run, int lab) {
        if (lab == label) std::fill(&out(run.x0, run.y, run.z), &out(run.x1, run.y, run.z) + 1, 1);
    });
    return out;
}

BinaryImage remove_small_components(const BinaryImage& mask, int min_size, Connectivity conn) {
    const auto c = label_components(mask, conn);
    BinaryImage out(mask.nx(), mask.ny(), 0);
    for_each_run_of(c, [&](const Components::Run& run, int lab) {
        if (c.sizes[static_cast<std::size_t>(lab)] >= min_size) std::fill(&out(run.x0, run.y), &out(run.x1, run.y) + 1, 1);
    });
    return out;
}

BinaryVolume remove_small_components(const BinaryVolume& mask, int min_size, Connectivity conn) {
    const auto c = label_components(mask, conn);
    BinaryVolume out(mask.nx(), mask.ny(), mask.nz(), 0);
    for_each_run_of(c, [&](const Components::Run& run, int lab) {
        if (c.sizes[static_cast<std::size_t>(lab)] >= min_size) {
            std::fill(&out(run.x0, run.y, run.z), &out(run.x1, run.y, run.z) + 1, 1);
        }
    });
    return out;
}

BinaryImage logical_not(const BinaryImage& mask) {
    BinaryImage out(mask.nx(), mask.ny());
    std::transform(mask.values().begin(), mask.values().end(), out.values().begin(),
                   [](std::uint8_t v) -> std::uint8_t { return v ? 0 : 1; });
    return out;
}

BinaryVolume logical_not(const BinaryVolume& mask) {
    BinaryVolume out(mask.nx(), mask.ny(), mask.nz());
    std::transform(mask.values().begin(), mask.values().end(), out.values().begin(),
                   [](std::uint8_t v) -> std::uint8_t { return v ? 0 : 1; });
    return out;
}

}  // namespace faz3d
