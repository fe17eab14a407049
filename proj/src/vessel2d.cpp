#include "faz3d/vessel2d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "faz3d/filters.hpp"

namespace faz3d {

namespace {

// First and second Gaussian derivative kernels for correlation. Both have zero sum
// and are normalized on polynomials: sum k*d1 = 1, sum k^2*d2 = 2.
struct DerivativeKernels {
    std::vector<float> g;
    std::vector<float> d1;
    std::vector<float> d2;
};

DerivativeKernels derivative_kernels(double sigma) {
    const int r = static_cast<int>(std::ceil(4.0 * sigma));
    const std::size_t n = static_cast<std::size_t>(2 * r + 1);
    std::vector<double> g(n), d1(n), d2(n);
    double gsum = 0;
    for (int k = -r; k <= r; ++k) {
        const auto i = static_cast<std::size_t>(k + r);
        g[i] = std::exp(-0.5 * k * k / (sigma * sigma));
        gsum += g[i];
    }
    for (auto& v : g) v /= gsum;

    double m1 = 0, d2sum = 0;
    for (int k = -r; k <= r; ++k) {
        const auto i = static_cast<std::size_t>(k + r);
        d1[i] = k * g[i];
        m1 += k * d1[i];
        d2[i] = (k * k / (sigma * sigma) - 1.0) * g[i];
        d2sum += d2[i];
    }
    double m2 = 0;
    for (int k = -r; k <= r; ++k) {
        const auto i = static_cast<std::size_t>(k + r);
        d2[i] -= d2sum * g[i];
        m2 += static_cast<double>(k) * k * d2[i];
    }
    DerivativeKernels out;
    out.g.resize(n);
    out.d1.resize(n);
    out.d2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.g[i] = static_cast<float>(g[i]);
        out.d1[i] = static_cast<float>(d1[i] / m1);
        out.d2[i] = static_cast<float>(2.0 * d2[i] / m2);
    }
    return out;
}

void vesselness_at_scale(const ScalarImage& img, double sigma, const FrangiParams& p, ScalarImage& best) {
    const auto k = derivative_kernels(sigma);
    const auto dxx = convolve_y(convolve_x(img, k.d2, KernelForm::difference), k.g);
    const auto dyy = convolve_x(convolve_y(img, k.d2, KernelForm::difference), k.g);
    const auto dxy = convolve_y(convolve_x(img, k.d1, KernelForm::difference), k.d1, KernelForm::difference);

    const double s2 = sigma * sigma;
    const double rb_den = 2.0 * p.beta_one * p.beta_one;
    const double s_den = 2.0 * p.beta_two * p.beta_two;
    const std::size_t n = img.size();
    const auto xx = dxx.values(), yy = dyy.values(), xy = dxy.values();
    auto out = best.values();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = s2 * xx[i], c = s2 * yy[i], b = s2 * xy[i];
        const double root = std::sqrt((a - c) * (a - c) + 4.0 * b * b);
        double l1 = 0.5 * (a + c + root);
        double l2 = 0.5 * (a + c - root);
        if (std::abs(l1) > std::abs(l2)) std::swap(l1, l2);
        // Bright ridges only: the dominant curvature must be negative.
        if (!(l2 < 0.0)) continue;
        const double rb = l1 / l2;
        const double ss = l1 * l1 + l2 * l2;
        const double v = std::exp(-rb * rb / rb_den) * (1.0 - std::exp(-ss / s_den));
        out[i] = std::max(out[i], static_cast<float>(v));
    }
}

}  // namespace

ScalarImage frangi_enhance(const ScalarImage& img, const PipelineConfig& cfg) {
    for (float v : img.values()) {
        if (!std::isfinite(v) || v < 0) throw Error("vesselness input must be finite and non-negative");
    }
    ScalarImage best(img.nx(), img.ny(), 0.0f);
    for (double s : cfg.frangi_scales()) vesselness_at_scale(img, s, cfg.frangi, best);
    return best;
}

int otsu_bin(float value, float lo, float hi) noexcept {
    const double t = (static_cast<double>(value) - lo) / (static_cast<double>(hi) - lo);
    return std::clamp(static_cast<int>(std::floor(t * kOtsuBins)), 0, kOtsuBins - 1);
}

namespace {

__extension__ typedef __int128 Wide;

// Between-class variance up to a positive constant, as a fraction num / den with
// num = (T*W - N*M)^2 and den = W*(N - W).
int otsu_cut(const std::array<std::int64_t, kOtsuBins>& hist) {
    std::int64_t total = 0, moment = 0;
    for (int i = 0; i < kOtsuBins; ++i) {
        total += hist[static_cast<std::size_t>(i)];
        moment += i * hist[static_cast<std::size_t>(i)];
    }
    int best = -1;
    std::int64_t w = 0, m = 0;
    if (total <= (std::int64_t{1} << 18)) {
        Wide best_num = -1, best_den = 1;
        for (int k = 0; k < kOtsuBins - 1; ++k) {
            w += hist[static_cast<std::size_t>(k)];
            m += k * hist[static_cast<std::size_t>(k)];
            if (w == 0 || w == total) continue;
            const Wide diff = static_cast<Wide>(moment) * w - static_cast<Wide>(total) * m;
            const Wide num = diff * diff;
            const Wide den = static_cast<Wide>(w) * (total - w);
            if (best < 0 || num * best_den > best_num * den) {
                best = k;
                best_num = num;
                best_den = den;
            }
        }
    } else {
        long double best_v = -1;
        for (int k = 0; k < kOtsuBins - 1; ++k) {
            w += hist[static_cast<std::size_t>(k)];
            m += k * hist[static_cast<std::size_t>(k)];
            if (w == 0 || w == total) continue;
            const long double diff =
                static_cast<long double>(moment) * w - static_cast<long double>(total) * m;
            const long double v = diff * diff / (static_cast<long double>(w) * (total - w));
            if (v > best_v) {
                best = k;
                best_v = v;
            }
        }
    }
    return best;
}

}  // namespace

OtsuResult otsu_threshold(const ScalarImage& img, const PipelineConfig& cfg) {
    OtsuResult res;
    res.mask = BinaryImage(img.nx(), img.ny(), 0);
    float lo = std::numeric_limits<float>::infinity(), hi = -lo;
    for (float v : img.values()) {
        if (!std::isfinite(v)) throw Error("threshold input must be finite");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) {
        if (cfg.otsu_degenerate == OtsuDegenerate::error) throw Error("constant image, threshold undefined");
        res.degenerate = true;
        res.threshold = hi;
        return res;
    }
    std::array<std::int64_t, kOtsuBins> hist{};
    for (float v : img.values()) ++hist[static_cast<std::size_t>(otsu_bin(v, lo, hi))];
    res.cut = otsu_cut(hist);
    res.threshold = lo + (res.cut + 1) * ((static_cast<double>(hi) - lo) / kOtsuBins);
    const auto src = img.values();
    auto dst = res.mask.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = otsu_bin(src[i], lo, hi) > res.cut ? 1 : 0;
    return res;
}

namespace {

// Neighbors P2..P9 clockwise from north: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDx{0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kDy{-1, -1, 0, 1, 1, 1, 0, -1};

std::array<int, 8> neighbors(const BinaryImage& m, int x, int y) {
    std::array<int, 8> p{};
    for (int k = 0; k < 8; ++k) {
        const int xx = x + kDx[static_cast<std::size_t>(k)], yy = y + kDy[static_cast<std::size_t>(k)];
        p[static_cast<std::size_t>(k)] = m.contains(xx, yy) && m(xx, yy) ? 1 : 0;
    }
    return p;
}

// 8-connectivity number: count of 4-adjacent background runs that separate
// 8-connected foreground neighbors. Removing p keeps topology iff it equals 1.
int connectivity_number(const std::array<int, 8>& p) {
    int n = 0;
    for (int k = 0; k < 8; k += 2) {
        const int a = 1 - p[static_cast<std::size_t>(k)];
        const int b = 1 - p[static_cast<std::size_t>((k + 1) % 8)];
        const int c = 1 - p[static_cast<std::size_t>((k + 2) % 8)];
        n += a - a * b * c;
    }
    return n;
}

}  // namespace

BinaryImage skeletonize(const BinaryImage& mask) {
    BinaryImage img(mask.nx(), mask.ny(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) img.values()[i] = mask.values()[i] ? 1 : 0;

    std::vector<std::pair<int, int>> marked;
    for (;;) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int pass = 0; pass < 2; ++pass) {
                marked.clear();
                for (int y = 0; y < img.ny(); ++y) {
                    for (int x = 0; x < img.nx(); ++x) {
                        if (!img(x, y)) continue;
                        const auto p = neighbors(img, x, y);
                        const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
                        if (b < 2 || b > 6) continue;
                        int a = 0;
                        for (int k = 0; k < 8; ++k) a += !p[static_cast<std::size_t>(k)] && p[static_cast<std::size_t>((k + 1) % 8)];
                        if (a != 1) continue;
                        // p[0]=N, p[2]=E, p[4]=S, p[6]=W
                        const bool ok = pass == 0 ? (p[0] * p[2] * p[4] == 0 && p[2] * p[4] * p[6] == 0)
                                                  : (p[0] * p[2] * p[6] == 0 && p[0] * p[4] * p[6] == 0);
                        if (ok) marked.emplace_back(x, y);
                    }
                }
                // Removal is sequential with a live simple-point and endpoint check, so one
                // sweep can never split a component or erase a two-pixel-thick line. Each
                // sweep starts on the side it peels (south-east first, then north-west).
                if (pass == 0) std::reverse(marked.begin(), marked.end());
                for (auto [x, y] : marked) {
                    const auto p = neighbors(img, x, y);
                    const int b = p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7];
                    if (b < 2 || connectivity_number(p) != 1) continue;
                    img(x, y) = 0;
                    changed = true;
                }
            }
        }
        // Thinning can stall on 2x2 squares. Any simple pixel of such a square is
        // redundant; squares whose four pixels all carry branches are real junctions.
        bool opened = false;
        for (int y = 0; y + 1 < img.ny(); ++y) {
            for (int x = 0; x + 1 < img.nx(); ++x) {
                for (int k = 0; k < 4; ++k) {
                    if (!(img(x, y) && img(x + 1, y) && img(x, y + 1) && img(x + 1, y + 1))) break;
                    const int px = x + (k & 1), py = y + (k >> 1);
                    if (connectivity_number(neighbors(img, px, py)) != 1) continue;
                    img(px, py) = 0;
                    opened = true;
                }
            }
        }
        // Small holes can pin a solid 3x3 block in place. Its center can go: the eight
        // pixels around it stay connected, so only a hole is created.
        for (int y = 1; y + 1 < img.ny(); ++y) {
            for (int x = 1; x + 1 < img.nx(); ++x) {
                if (!img(x, y)) continue;
                const auto p = neighbors(img, x, y);
                if (p[0] + p[1] + p[2] + p[3] + p[4] + p[5] + p[6] + p[7] == 8) {
                    img(x, y) = 0;
                    opened = true;
                }
            }
        }
        if (!opened) break;
    }
    return img;
}

ScalarImage distance_transform(const BinaryImage& mask, double axial, double diagonal) {
    if (!(axial > 0) || !(diagonal >= axial)) throw std::invalid_argument("chamfer weights must satisfy 0 < a <= b");
    const int nx = mask.nx(), ny = mask.ny();
    // Distances are carried as step counts so the result is an exact function of (s, d).
    constexpr int kFar = std::numeric_limits<int>::max() / 4;
    struct Steps {
        int s;
        int d;
    };
    Grid2<Steps> st(nx, ny, Steps{kFar, 0});
    auto cost = [&](Steps v) { return v.s * axial + v.d * diagonal; };
    auto at = [&](int x, int y) -> Steps {
        // Outside the image is background.
        if (!st.contains(x, y)) return Steps{0, 0};
        return st(x, y);
    };
    auto relax = [&](Steps& cur, Steps n, bool diag) {
        if (n.s >= kFar) return;
        const Steps c = diag ? Steps{n.s, n.d + 1} : Steps{n.s + 1, n.d};
        if (cost(c) < cost(cur)) cur = c;
    };
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            if (!mask(x, y)) {
                st(x, y) = Steps{0, 0};
                continue;
            }
            Steps cur{kFar, 0};
            relax(cur, at(x - 1, y), false);
            relax(cur, at(x, y - 1), false);
            relax(cur, at(x - 1, y - 1), true);
            relax(cur, at(x + 1, y - 1), true);
            st(x, y) = cur;
        }
    }
    for (int y = ny - 1; y >= 0; --y) {
        for (int x = nx - 1; x >= 0; --x) {
            if (!mask(x, y)) continue;
            Steps cur = st(x, y);
            relax(cur, at(x + 1, y), false);
            relax(cur, at(x, y + 1), false);
            relax(cur, at(x + 1, y + 1), true);
            relax(cur, at(x - 1, y + 1), true);
            st(x, y) = cur;
        }
    }
    ScalarImage out(nx, ny, 0.0f);
    for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] = static_cast<float>(cost(st.values()[i]));
    return out;
}

Skeleton2D skeleton_radii(const BinaryImage& skeleton, const ScalarImage& dt, double sigma) {
    if (skeleton.nx() != dt.nx() || skeleton.ny() != dt.ny()) throw std::invalid_argument("skeleton and dt shapes differ");
    Skeleton2D out;
    if (count_true(skeleton) == 0) return out;
    const auto smooth = gaussian_blur(dt, sigma);
    for (int y = 0; y < skeleton.ny(); ++y) {
        for (int x = 0; x < skeleton.nx(); ++x) {
            if (!skeleton(x, y)) continue;
            const int r = static_cast<int>(std::lround(smooth(x, y)));
            out.points.push_back({x, y, std::max(1, r)});
        }
    }
    return out;
}

PlexusSegmentation segment_plexus_2d(const EnFaceImage& enface, const PipelineConfig& cfg) {
    PlexusSegmentation seg;
    seg.enhanced = frangi_enhance(enface.data, cfg);
    auto otsu = otsu_threshold(seg.enhanced, cfg);
    seg.mask = std::move(otsu.mask);
    seg.otsu_threshold = otsu.threshold;
    seg.skeleton_mask = skeletonize(seg.mask);
    seg.distance = distance_transform(seg.mask, cfg.chamfer_axial, cfg.chamfer_diagonal);
    seg.skeleton = skeleton_radii(seg.skeleton_mask, seg.distance, cfg.sigma_radius);
    return seg;
}

}  // namespace faz3d
