#include "faz3d/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_interp.h>

#include "faz3d/filters.hpp"

namespace faz3d {

OctaVolume resample_axial(const OctaVolume& vol) {
    if (!(vol.res_plane_um > 0)) throw Error("resample_axial: res_plane must be > 0");
    if (!(vol.res_axial_um > 0)) throw Error("resample_axial: res_axial must be > 0");
    const double ratio = vol.res_axial_um / vol.res_plane_um;
    const int nx = vol.nx(), ny = vol.ny(), nz = vol.nz();
    const int nz_out = std::max(1, static_cast<int>(std::lround(nz * ratio)));

    OctaVolume out;
    out.data = ScalarVolume(nx, ny, nz_out);
    out.res_plane_um = vol.res_plane_um;
    out.res_axial_um = vol.res_plane_um;
    out.isotropic = true;

    const std::size_t plane = vol.data.plane_size();
#pragma omp parallel for schedule(static)
    for (int k = 0; k < nz_out; ++k) {
        const double zin = k / ratio;
        const int i0 = static_cast<int>(std::floor(zin));
        float* dst = out.data.plane(k);
        if (i0 >= nz - 1) {
            std::copy_n(vol.data.plane(nz - 1), plane, dst);
            continue;
        }
        const float t = static_cast<float>(zin - i0);
        const float* a = vol.data.plane(i0);
        if (t == 0.0f) {
            std::copy_n(a, plane, dst);
            continue;
        }
        const float* b = vol.data.plane(i0 + 1);
        for (std::size_t i = 0; i < plane; ++i) dst[i] = (1.0f - t) * a[i] + t * b[i];
    }
    return out;
}

SurfaceSet rescale_surfaces(const SurfaceSet& surfaces, double ratio) {
    SurfaceSet out = surfaces;
    auto scale = [ratio](SurfaceMap& m) {
        for (float& v : m.values()) v = static_cast<float>(v * ratio);
    };
    scale(out.ilm);
    scale(out.ipl);
    scale(out.opl);
    scale(out.rpe);
    if (out.ipl_minus) scale(*out.ipl_minus);
    if (out.ipl_plus) scale(*out.ipl_plus);
    return out;
}

// ---------------------------------------------------------------------------
// Surface regularization

namespace {

float median_of(std::vector<float>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const float upper = v[mid];
    if (n % 2 == 1) return upper;
    const float lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5f * (lower + upper);
}

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

/// Natural cubic spline through (xs, ys), evaluated at x; linear extrapolation outside the knots.
double spline_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    const std::size_t n = xs.size();
    if (n == 1) return ys[0];
    const gsl_interp_type* type = n >= 3 ? gsl_interp_cspline : gsl_interp_linear;
    gsl_interp* interp = gsl_interp_alloc(type, n);
    gsl_interp_accel* acc = gsl_interp_accel_alloc();
    gsl_interp_init(interp, xs.data(), ys.data(), n);
    double result = 0;
    if (x < xs.front()) {
        const double d = gsl_interp_eval_deriv(interp, xs.data(), ys.data(), xs.front(), acc);
        result = ys.front() + d * (x - xs.front());
    } else if (x > xs.back()) {
        const double d = gsl_interp_eval_deriv(interp, xs.data(), ys.data(), xs.back(), acc);
        result = ys.back() + d * (x - xs.back());
    } else {
        result = gsl_interp_eval(interp, xs.data(), ys.data(), x, acc);
    }
    gsl_interp_accel_free(acc);
    gsl_interp_free(interp);
    return result;
}

/// Tensor-product spline estimate at (x0, y0) from inliers within a (2h+1)^2 window:
/// a row spline per window row evaluated at x0, then a column spline through those.
bool interpolate_at(const SurfaceMap& s, const BinaryImage& outlier, int x0, int y0, int h, float& value) {
    std::vector<double> col_y, col_v, xs, vs;
    const int y_lo = std::max(0, y0 - h), y_hi = std::min(s.ny() - 1, y0 + h);
    const int x_lo = std::max(0, x0 - h), x_hi = std::min(s.nx() - 1, x0 + h);
    for (int y = y_lo; y <= y_hi; ++y) {
        xs.clear();
        vs.clear();
        for (int x = x_lo; x <= x_hi; ++x) {
            if (!outlier(x, y)) {
                xs.push_back(x);
                vs.push_back(s(x, y));
            }
        }
        if (xs.empty()) continue;
        col_y.push_back(y);
        col_v.push_back(spline_eval(xs, vs, x0));
    }
    if (col_y.empty()) return false;
    value = static_cast<float>(spline_eval(col_y, col_v, y0));
    return true;
}

}  // namespace

BinaryImage surface_outliers(const SurfaceMap& surface, const PipelineConfig& cfg) {
    const int nx = surface.nx(), ny = surface.ny();
    const int w = cfg.median_window;
    if (nx < w || ny < w) {
        throw Error("regularize_surface: surface " + std::to_string(nx) + "x" + std::to_string(ny) +
                    " smaller than window " + std::to_string(w));
    }
    const int h = w / 2;
    BinaryImage flags(nx, ny, 0);
#pragma omp parallel
    {
        std::vector<float> win;
        win.reserve(static_cast<std::size_t>(w * w));
#pragma omp for schedule(static)
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                win.clear();
                for (int yy = std::max(0, y - h); yy <= std::min(ny - 1, y + h); ++yy) {
                    for (int xx = std::max(0, x - h); xx <= std::min(nx - 1, x + h); ++xx) {
                        win.push_back(surface(xx, yy));
                    }
                }
                const float med = median_of(win);
                for (float& v : win) v = std::abs(v - med);
                const float mad = median_of(win);
                const double threshold =
                    std::max(cfg.outlier_mad_factor * 1.4826 * mad, cfg.outlier_floor_voxels);
                flags(x, y) = std::abs(surface(x, y) - med) > threshold ? 1 : 0;
            }
        }
    }
    return flags;
}

SurfaceMap regularize_surface(const SurfaceMap& surface, const PipelineConfig& cfg) {
    disable_gsl_abort();
    const BinaryImage outlier = surface_outliers(surface, cfg);
    if (count_true(outlier) == outlier.size()) {
        throw Error("regularize_surface: every point flagged as outlier");
    }
    SurfaceMap out = surface;
    const int max_h = std::max(surface.nx(), surface.ny());
    for (int y = 0; y < surface.ny(); ++y) {
        for (int x = 0; x < surface.nx(); ++x) {
            if (!outlier(x, y)) continue;
            float value = 0;
            // Grow the window until it holds inliers; an inlier exists, so this terminates.
            for (int h = std::max(1, cfg.median_window / 2);; h *= 2) {
                if (interpolate_at(surface, outlier, x, y, h, value)) break;
                if (h > max_h) throw Error("regularize_surface: no inliers reachable");
            }
            out(x, y) = value;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

FlattenResult flatten_on_rpe(const OctaVolume& vol, const SurfaceSet& surfaces) {
    const int nx = vol.nx(), ny = vol.ny(), nz = vol.nz();
    if (surfaces.rpe.nx() != nx || surfaces.rpe.ny() != ny) throw Error("flatten_on_rpe: surface dims mismatch");
    Grid2<int> shift(nx, ny);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const float r = surfaces.rpe(x, y);
            if (!(r >= 0.0f && r < static_cast<float>(nz))) {
                throw Error("flatten_on_rpe: rpe outside [0, nz) at (" + std::to_string(x) + ", " +
                            std::to_string(y) + ")");
            }
            shift(x, y) = nz - 1 - static_cast<int>(std::lround(r));
        }
    }

    FlattenResult res;
    res.volume.data = ScalarVolume(nx, ny, nz, 0.0f);
    res.volume.res_plane_um = vol.res_plane_um;
    res.volume.res_axial_um = vol.res_axial_um;
    res.volume.isotropic = vol.isotropic;
#pragma omp parallel for schedule(static)
    for (int z = 0; z < nz; ++z) {
        float* dst = res.volume.data.plane(z);
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const int src = z - shift(x, y);
                if (src >= 0 && src < nz) dst[x + nx * y] = vol.data(x, y, src);
            }
        }
    }

    res.surfaces = surfaces;
    auto apply = [&](SurfaceMap& m) {
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) m(x, y) += static_cast<float>(shift(x, y));
    };
    apply(res.surfaces.ilm);
    apply(res.surfaces.ipl);
    apply(res.surfaces.opl);
    apply(res.surfaces.rpe);
    if (res.surfaces.ipl_minus) apply(*res.surfaces.ipl_minus);
    if (res.surfaces.ipl_plus) apply(*res.surfaces.ipl_plus);
    res.shift = std::move(shift);
    return res;
}

OctaVolume gaussian3d(const OctaVolume& vol, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    const int nx = vol.nx(), ny = vol.ny(), nz = vol.nz();
    const std::size_t plane = vol.data.plane_size();

    ScalarVolume a(nx, ny, nz), b(nx, ny, nz, 0.0f);

    // x pass: vol -> a
#pragma omp parallel
    {
        std::vector<float> row(static_cast<std::size_t>(nx + 2 * r));
#pragma omp for schedule(static)
        for (int z = 0; z < nz; ++z) {
            for (int y = 0; y < ny; ++y) {
                const float* src = &vol.data(0, y, z);
                for (int i = 0; i < nx + 2 * r; ++i) row[static_cast<std::size_t>(i)] = src[std::clamp(i - r, 0, nx - 1)];
                float* dst = &a(0, y, z);
                for (int x = 0; x < nx; ++x) {
                    float acc = 0;
                    const float* p = row.data() + x;
                    for (std::size_t j = 0; j < k.size(); ++j) acc += k[j] * p[j];
                    dst[x] = acc;
                }
            }
        }
    }

    // y pass: a -> b
#pragma omp parallel for schedule(static)
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            float* dst = &b(0, y, z);
            for (std::size_t j = 0; j < k.size(); ++j) {
                const int yy = std::clamp(y + static_cast<int>(j) - r, 0, ny - 1);
                const float* src = &a(0, yy, z);
                const float w = k[j];
                for (int x = 0; x < nx; ++x) dst[x] += w * src[x];
            }
        }
    }

    // z pass: b -> a
#pragma omp parallel for schedule(static)
    for (int z = 0; z < nz; ++z) {
        float* dst = a.plane(z);
        std::fill_n(dst, plane, 0.0f);
        for (std::size_t j = 0; j < k.size(); ++j) {
            const int zz = std::clamp(z + static_cast<int>(j) - r, 0, nz - 1);
            const float* src = b.plane(zz);
            const float w = k[j];
            for (std::size_t i = 0; i < plane; ++i) dst[i] += w * src[i];
        }
    }

    OctaVolume out;
    out.data = std::move(a);
    out.res_plane_um = vol.res_plane_um;
    out.res_axial_um = vol.res_axial_um;
    out.isotropic = vol.isotropic;
    return out;
}

std::array<PlexusBounds, 3> derive_plexus_bounds(SurfaceSet& surfaces, double axial_pitch_um,
                                                 const PipelineConfig& cfg) {
    if (!(axial_pitch_um > 0)) throw Error("derive_plexus_bounds: axial pitch must be > 0");
    const int nx = surfaces.ilm.nx(), ny = surfaces.ilm.ny();
    SurfaceMap minus(nx, ny), plus(nx, ny);
    const double off_minus = cfg.offset_ipl_minus_um / axial_pitch_um;
    const double off_plus = cfg.offset_ipl_plus_um / axial_pitch_um;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const float ilm = surfaces.ilm(x, y), opl = surfaces.opl(x, y), ipl = surfaces.ipl(x, y);
            if (ilm > opl) {
                throw Error("derive_plexus_bounds: ILM below OPL at (" + std::to_string(x) + ", " +
                            std::to_string(y) + ")");
            }
            minus(x, y) = std::clamp(static_cast<float>(ipl + off_minus), ilm, opl);
            plus(x, y) = std::clamp(static_cast<float>(ipl + off_plus), ilm, opl);
            if (minus(x, y) > plus(x, y)) {
                throw Error("derive_plexus_bounds: IPL- below IPL+ after clamping");
            }
        }
    }
    surfaces.ipl_minus = minus;
    surfaces.ipl_plus = plus;
    return {PlexusBounds{surfaces.ilm, minus, Plexus::superficial},
            PlexusBounds{minus, plus, Plexus::intermediate},
            PlexusBounds{plus, surfaces.opl, Plexus::deep}};
}

PreprocessResult preprocess(const OctaVolume& vol, const SurfaceSet& surfaces, const PipelineConfig& cfg) {
    cfg.validate();
    PreprocessResult res;
    OctaVolume iso;
    if (vol.isotropic) {
        iso = vol;
        res.ratio = 1.0;
    } else {
        if (std::abs(vol.res_axial_um - cfg.axial_native_um) > 1e-6) {
            throw Error("preprocess: volume axial pitch " + std::to_string(vol.res_axial_um) +
                        " um differs from configured native pitch " + std::to_string(cfg.axial_native_um));
        }
        res.ratio = cfg.axial_native_um / vol.res_plane_um;
        iso = resample_axial(vol);
    }
    SurfaceSet s = rescale_surfaces(surfaces, res.ratio);
    const float z_max = static_cast<float>(iso.nz() - 1);
    for (auto* m : {&s.ilm, &s.ipl, &s.opl, &s.rpe}) {
        for (float& v : m->values()) v = std::clamp(v, 0.0f, z_max);
    }
    s.ilm = regularize_surface(s.ilm, cfg);
    s.ipl = regularize_surface(s.ipl, cfg);
    s.opl = regularize_surface(s.opl, cfg);
    s.rpe = regularize_surface(s.rpe, cfg);

    auto flat = flatten_on_rpe(iso, s);
    iso = OctaVolume{};
    res.volume = gaussian3d(flat.volume, cfg.sigma_volume);
    flat.volume = OctaVolume{};
    res.surfaces = std::move(flat.surfaces);
    res.shift = std::move(flat.shift);
    res.bounds = derive_plexus_bounds(res.surfaces, res.volume.res_axial_um, cfg);
    return res;
}

}  // namespace faz3d
