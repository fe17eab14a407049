#include "faz3d/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "faz3d/preprocess.hpp"

namespace faz3d {

using nlohmann::json;

namespace {

struct Layers {
    double ilm, ipl, opl, rpe;
};

std::array<double, 2> center_of(const PhantomSpec& s) {
    if (s.center) return *s.center;
    return {static_cast<double>(s.nx / 2), static_cast<double>(s.ny / 2)};
}

Layers layers_at(const PhantomSpec& s, double x, double y) {
    const auto c = center_of(s);
    const double tilt = s.slope_x * (x - c[0]) + s.slope_y * (y - c[1]);
    double keep = 1.0;
    if (s.pit_depth_fraction > 0) {
        const double rho = std::hypot(x - c[0], y - c[1]) * s.res_plane_um;
        keep = 1.0 - s.pit_depth_fraction * std::exp(-std::pow(rho / s.pit_width_um, s.pit_shape));
    }
    return {s.opl - (s.opl - s.ilm) * keep + tilt, s.opl - (s.opl - s.ipl) * keep + tilt, s.opl + tilt,
            s.rpe + tilt};
}

// Plexus slab at (x, y) with the default IPL offsets, clamped like derive_plexus_bounds.
std::array<double, 2> slab_at(const PhantomSpec& s, Plexus p, double x, double y) {
    const PipelineConfig defaults;
    const auto l = layers_at(s, x, y);
    const double minus = std::clamp(l.ipl + defaults.offset_ipl_minus_um / s.res_axial_um, l.ilm, l.opl);
    const double plus = std::clamp(l.ipl + defaults.offset_ipl_plus_um / s.res_axial_um, l.ilm, l.opl);
    switch (p) {
        case Plexus::superficial: return {l.ilm, minus};
        case Plexus::intermediate: return {minus, plus};
        case Plexus::deep: return {plus, l.opl};
    }
    return {l.ilm, l.opl};
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error("invalid phantom spec: " + what);
}

// Polyline with per-vertex slab fractions.
struct Path {
    std::vector<std::array<double, 2>> pts;
    std::vector<double> depth;
    double radius_um = 0;
};

double point_segment_distance(std::array<double, 2> p, std::array<double, 2> a, std::array<double, 2> b) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

std::vector<Path> plexus_paths(const PhantomSpec& s, Plexus p, std::mt19937_64& rng) {
    const auto& ps = s.plexuses[static_cast<std::size_t>(p)];
    const auto c = center_of(s);
    std::vector<Path> paths;

    for (const auto& t : ps.tubes) {
        Path path;
        path.pts = t.points;
        if (t.closed && !t.points.empty()) path.pts.push_back(t.points.front());
        path.depth.assign(path.pts.size(), t.depth_fraction);
        path.radius_um = t.radius_um;
        paths.push_back(std::move(path));
    }

    if (ps.faz_radius_um > 0 && ps.ring) {
        const double r_px = (ps.faz_radius_um + ps.ring_radius_um) / s.res_plane_um;
        const int n = std::max(16, static_cast<int>(std::ceil(2 * std::numbers::pi * r_px)));
        Path ring;
        for (int i = 0; i <= n; ++i) {
            const double a = 2 * std::numbers::pi * i / n;
            ring.pts.push_back({c[0] + r_px * std::cos(a), c[1] + r_px * std::sin(a)});
        }
        ring.depth.assign(ring.pts.size(), ps.ring_depth_fraction);
        ring.radius_um = ps.ring_radius_um;
        paths.push_back(std::move(ring));
    }

    const auto& lat = ps.lattice;
    if (lat.spacing_um > 0) {
        const double sp = lat.spacing_um / s.res_plane_um;
        const int ix0 = static_cast<int>(std::floor(-c[0] / sp)) - 1;
        const int ix1 = static_cast<int>(std::ceil((s.nx - 1 - c[0]) / sp)) + 1;
        const int iy0 = static_cast<int>(std::floor(-c[1] / sp)) - 1;
        const int iy1 = static_cast<int>(std::ceil((s.ny - 1 - c[1]) / sp)) + 1;
        const int w = ix1 - ix0 + 1, h = iy1 - iy0 + 1;
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<std::array<double, 2>> node(static_cast<std::size_t>(w * h));
        std::vector<double> node_depth(node.size());
        for (int j = 0; j < h; ++j) {
            for (int i = 0; i < w; ++i) {
                const auto k = static_cast<std::size_t>(i + w * j);
                const double jx = unit(rng), jy = unit(rng), jd = unit(rng);
                node[k] = {c[0] + (ix0 + i) * sp + lat.jitter * sp * jx, c[1] + (iy0 + j) * sp + lat.jitter * sp * jy};
                node_depth[k] = lat.depth_fraction + lat.depth_jitter * jd;
            }
        }
        const double keep_out = (ps.faz_radius_um + lat.radius_um) / s.res_plane_um;
        auto add = [&](std::size_t a, std::size_t b) {
            if (ps.faz_radius_um > 0 && point_segment_distance(c, node[a], node[b]) < keep_out) return;
            Path seg;
            seg.pts = {node[a], node[b]};
            seg.depth = {node_depth[a], node_depth[b]};
            seg.radius_um = lat.radius_um;
            paths.push_back(std::move(seg));
        };
        for (int j = 0; j < h; ++j) {
            for (int i = 0; i < w; ++i) {
                const auto k = static_cast<std::size_t>(i + w * j);
                if (i + 1 < w) add(k, k + 1);
                if (j + 1 < h) add(k, k + static_cast<std::size_t>(w));
            }
        }
    }
    return paths;
}

// Marks voxels inside the ellipsoid that is a ball of radius_um in physical units.
void stamp(BinaryVolume& mask, const PhantomSpec& s, double x, double y, double z, double radius_um) {
    const double rx = radius_um / s.res_plane_um, rz = radius_um / s.res_axial_um;
    const int x0 = std::max(0, static_cast<int>(std::ceil(x - rx)));
    const int x1 = std::min(s.nx - 1, static_cast<int>(std::floor(x + rx)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(y - rx)));
    const int y1 = std::min(s.ny - 1, static_cast<int>(std::floor(y + rx)));
    const int z0 = std::max(0, static_cast<int>(std::ceil(z - rz)));
    const int z1 = std::min(s.nz - 1, static_cast<int>(std::floor(z + rz)));
    for (int k = z0; k <= z1; ++k) {
        const double dz = (k - z) / rz;
        for (int j = y0; j <= y1; ++j) {
            const double dy = (j - y) / rx;
            for (int i = x0; i <= x1; ++i) {
                const double dx = (i - x) / rx;
                if (dx * dx + dy * dy + dz * dz <= 1.0) mask(i, j, k) = 1;
            }
        }
    }
}

constexpr double kSampleStep = 0.25;  // pixels of arc length between centerline samples

void render_path(const Path& path, const PhantomSpec& s, Plexus p, BinaryVolume& mask, PlexusTruth& truth) {
    for (std::size_t i = 0; i + 1 < path.pts.size(); ++i) {
        const auto a = path.pts[i], b = path.pts[i + 1];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        const int n = std::max(1, static_cast<int>(std::ceil(len / kSampleStep)));
        const bool last = i + 2 == path.pts.size();
        for (int k = 0; k <= n; ++k) {
            if (k == n && !last) break;  // shared vertex is emitted by the next segment
            const double t = static_cast<double>(k) / n;
            const double x = a[0] + t * (b[0] - a[0]), y = a[1] + t * (b[1] - a[1]);
            const double f = path.depth[i] + t * (path.depth[i + 1] - path.depth[i]);
            const auto slab = slab_at(s, p, x, y);
            const double z = slab[0] + f * (slab[1] - slab[0]);
            stamp(mask, s, x, y, z, path.radius_um);
            if (x >= -0.5 && y >= -0.5 && x < s.nx - 0.5 && y < s.ny - 0.5) {
                truth.centerline.push_back({x, y, z, path.radius_um});
            }
        }
    }
}

double column_volume_mm3(const PhantomSpec& s) {
    // Midpoint quadrature, 4x4 samples per pixel.
    constexpr int kSub = 4;
    const auto c = center_of(s);
    double um3 = 0;
    for (Plexus p : kAllPlexuses) {
        const double r_um = s.plexuses[static_cast<std::size_t>(p)].faz_radius_um;
        if (r_um <= 0) continue;
        const double r = r_um / s.res_plane_um;
        const int x0 = static_cast<int>(std::floor(c[0] - r)) - 1, x1 = static_cast<int>(std::ceil(c[0] + r)) + 1;
        const int y0 = static_cast<int>(std::floor(c[1] - r)) - 1, y1 = static_cast<int>(std::ceil(c[1] + r)) + 1;
        double sum = 0;
        for (int j = y0; j <= y1; ++j) {
            for (int i = x0; i <= x1; ++i) {
                for (int sj = 0; sj < kSub; ++sj) {
                    for (int si = 0; si < kSub; ++si) {
                        const double x = i - 0.5 + (si + 0.5) / kSub, y = j - 0.5 + (sj + 0.5) / kSub;
                        if (std::hypot(x - c[0], y - c[1]) > r) continue;
                        const auto slab = slab_at(s, p, x, y);
                        sum += slab[1] - slab[0];
                    }
                }
            }
        }
        um3 += sum / (kSub * kSub) * s.res_plane_um * s.res_plane_um * s.res_axial_um;
    }
    return um3 * 1e-9;
}

}  // namespace

void PhantomSpec::validate() const {
    require(nx > 0 && ny > 0 && nz > 0, "dims must be positive");
    require(res_plane_um > 0 && res_axial_um > 0, "resolutions must be positive");
    require(pit_depth_fraction >= 0 && pit_depth_fraction < 1, "pit depth_fraction must be in [0, 1)");
    require(pit_width_um > 0 && pit_shape > 0, "pit width and shape must be positive");
    require(noise_sigma >= 0, "noise sigma must be >= 0");
    require(speckle >= 0 && speckle < 1, "speckle must be in [0, 1)");
    require(vessel_intensity >= 0 && background_intensity >= 0, "intensities must be >= 0");
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const auto l = layers_at(*this, x, y);
            if (!(0 <= l.ilm && l.ilm < l.ipl && l.ipl < l.opl && l.opl < l.rpe && l.rpe <= nz - 1)) {
                require(false, "layers must satisfy 0 <= ilm < ipl < opl < rpe <= nz-1 everywhere (fails at " +
                                   std::to_string(x) + ", " + std::to_string(y) + ")");
            }
        }
    }
    const auto c = center_of(*this);
    for (Plexus p : kAllPlexuses) {
        const auto& ps = plexuses[static_cast<std::size_t>(p)];
        const std::string name(plexus_name(p));
        require(ps.faz_radius_um >= 0, name + ": faz_radius_um must be >= 0");
        require(ps.ring_radius_um > 0, name + ": ring_radius_um must be > 0");
        require(ps.ring_depth_fraction > 0 && ps.ring_depth_fraction < 1, name + ": ring depth must be in (0, 1)");
        const auto& l = ps.lattice;
        require(l.spacing_um >= 0 && l.radius_um > 0 && l.jitter >= 0 && l.jitter < 0.5,
                name + ": lattice needs spacing >= 0, radius > 0, jitter in [0, 0.5)");
        require(l.depth_fraction - l.depth_jitter > 0 && l.depth_fraction + l.depth_jitter < 1,
                name + ": lattice depths must stay inside the slab");
        for (const auto& t : ps.tubes) {
            require(!t.points.empty(), name + ": tube without points");
            require(t.radius_um > 0, name + ": tube radius must be > 0");
            require(t.depth_fraction > 0 && t.depth_fraction < 1, name + ": tube depth must be in (0, 1)");
            const double faz_px = ps.faz_radius_um / res_plane_um;
            for (std::size_t i = 0; i < t.points.size(); ++i) {
                const auto a = t.points[i];
                const auto b = t.points[std::min(i + 1, t.points.size() - 1)];
                require(point_segment_distance(c, a, b) >= faz_px, name + ": tube enters the avascular zone");
            }
        }
    }
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw Error("phantom spec: " + where + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.count(k)) throw Error("phantom spec: unknown key \"" + k + "\" in " + where);
    }
}

template <class T>
void opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

PhantomSpec phantom_spec_from_json(const json& j) {
    PhantomSpec s;
    check_keys(j, {"dims", "res_plane_um", "res_axial_um", "center", "layers", "pit", "plexuses", "intensity", "noise", "seed"},
               "spec");
    if (auto it = j.find("dims"); it != j.end()) {
        const auto d = it->get<std::array<int, 3>>();
        s.nx = d[0];
        s.ny = d[1];
        s.nz = d[2];
    }
    opt(j, "res_plane_um", s.res_plane_um);
    opt(j, "res_axial_um", s.res_axial_um);
    if (auto it = j.find("center"); it != j.end()) s.center = it->get<std::array<double, 2>>();
    if (auto it = j.find("layers"); it != j.end()) {
        check_keys(*it, {"ilm", "ipl", "opl", "rpe", "slope_x", "slope_y"}, "layers");
        opt(*it, "ilm", s.ilm);
        opt(*it, "ipl", s.ipl);
        opt(*it, "opl", s.opl);
        opt(*it, "rpe", s.rpe);
        opt(*it, "slope_x", s.slope_x);
        opt(*it, "slope_y", s.slope_y);
    }
    if (auto it = j.find("pit"); it != j.end()) {
        check_keys(*it, {"depth_fraction", "width_um", "shape"}, "pit");
        opt(*it, "depth_fraction", s.pit_depth_fraction);
        opt(*it, "width_um", s.pit_width_um);
        opt(*it, "shape", s.pit_shape);
    }
    if (auto it = j.find("plexuses"); it != j.end()) {
        check_keys(*it, {"superficial", "intermediate", "deep"}, "plexuses");
        for (const auto& [name, pj] : it->items()) {
            auto& ps = s.plexuses[static_cast<std::size_t>(plexus_from_name(name))];
            check_keys(pj, {"faz_radius_um", "ring", "ring_radius_um", "ring_depth_fraction", "lattice", "tubes"}, name);
            opt(pj, "faz_radius_um", ps.faz_radius_um);
            opt(pj, "ring", ps.ring);
            opt(pj, "ring_radius_um", ps.ring_radius_um);
            opt(pj, "ring_depth_fraction", ps.ring_depth_fraction);
            if (auto lt = pj.find("lattice"); lt != pj.end()) {
                check_keys(*lt, {"spacing_um", "jitter", "radius_um", "depth_fraction", "depth_jitter"}, name + ".lattice");
                opt(*lt, "spacing_um", ps.lattice.spacing_um);
                opt(*lt, "jitter", ps.lattice.jitter);
                opt(*lt, "radius_um", ps.lattice.radius_um);
                opt(*lt, "depth_fraction", ps.lattice.depth_fraction);
                opt(*lt, "depth_jitter", ps.lattice.depth_jitter);
            }
            if (auto tt = pj.find("tubes"); tt != pj.end()) {
                for (const auto& tj : *tt) {
                    check_keys(tj, {"points", "closed", "radius_um", "depth_fraction"}, name + ".tubes[]");
                    TubeSpec t;
                    opt(tj, "points", t.points);
                    opt(tj, "closed", t.closed);
                    opt(tj, "radius_um", t.radius_um);
                    opt(tj, "depth_fraction", t.depth_fraction);
                    ps.tubes.push_back(std::move(t));
                }
            }
        }
    }
    if (auto it = j.find("intensity"); it != j.end()) {
        check_keys(*it, {"vessel", "background"}, "intensity");
        opt(*it, "vessel", s.vessel_intensity);
        opt(*it, "background", s.background_intensity);
    }
    if (auto it = j.find("noise"); it != j.end()) {
        check_keys(*it, {"sigma", "speckle"}, "noise");
        opt(*it, "sigma", s.noise_sigma);
        opt(*it, "speckle", s.speckle);
    }
    opt(j, "seed", s.seed);
    s.validate();
    return s;
}

json phantom_spec_to_json(const PhantomSpec& s) {
    json plex = json::object();
    for (Plexus p : kAllPlexuses) {
        const auto& ps = s.plexuses[static_cast<std::size_t>(p)];
        json tubes = json::array();
        for (const auto& t : ps.tubes) {
            tubes.push_back({{"points", t.points}, {"closed", t.closed}, {"radius_um", t.radius_um},
                             {"depth_fraction", t.depth_fraction}});
        }
        plex[std::string(plexus_name(p))] = {
            {"faz_radius_um", ps.faz_radius_um},
            {"ring", ps.ring},
            {"ring_radius_um", ps.ring_radius_um},
            {"ring_depth_fraction", ps.ring_depth_fraction},
            {"lattice",
             {{"spacing_um", ps.lattice.spacing_um},
              {"jitter", ps.lattice.jitter},
              {"radius_um", ps.lattice.radius_um},
              {"depth_fraction", ps.lattice.depth_fraction},
              {"depth_jitter", ps.lattice.depth_jitter}}},
            {"tubes", tubes},
        };
    }
    json j = {
        {"dims", {s.nx, s.ny, s.nz}},
        {"res_plane_um", s.res_plane_um},
        {"res_axial_um", s.res_axial_um},
        {"layers",
         {{"ilm", s.ilm}, {"ipl", s.ipl}, {"opl", s.opl}, {"rpe", s.rpe}, {"slope_x", s.slope_x}, {"slope_y", s.slope_y}}},
        {"pit", {{"depth_fraction", s.pit_depth_fraction}, {"width_um", s.pit_width_um}, {"shape", s.pit_shape}}},
        {"plexuses", plex},
        {"intensity", {{"vessel", s.vessel_intensity}, {"background", s.background_intensity}}},
        {"noise", {{"sigma", s.noise_sigma}, {"speckle", s.speckle}}},
        {"seed", s.seed},
    };
    if (s.center) j["center"] = *s.center;
    return j;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open phantom spec: " + path.string());
    try {
        return phantom_spec_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error("malformed phantom spec " + path.string() + ": " + e.what());
    }
}

json ground_truth_to_json(const GroundTruth& gt) {
    json plex = json::object();
    for (Plexus p : kAllPlexuses) {
        const auto& t = gt.plexuses[static_cast<std::size_t>(p)];
        plex[std::string(plexus_name(p))] = {
            {"faz_radius_um", t.faz_radius_um},
            {"faz_area_mm2", t.faz_area_mm2},
            {"centerline_samples", t.centerline.size()},
        };
    }
    return {{"plexuses", plex}, {"faz_volume_mm3", gt.faz_volume_mm3}};
}

SurfaceSet phantom_surfaces(const PhantomSpec& s) {
    SurfaceSet out{SurfaceMap(s.nx, s.ny), SurfaceMap(s.nx, s.ny), SurfaceMap(s.nx, s.ny), SurfaceMap(s.nx, s.ny),
                   std::nullopt, std::nullopt};
    for (int y = 0; y < s.ny; ++y) {
        for (int x = 0; x < s.nx; ++x) {
            const auto l = layers_at(s, x, y);
            out.ilm(x, y) = static_cast<float>(l.ilm);
            out.ipl(x, y) = static_cast<float>(l.ipl);
            out.opl(x, y) = static_cast<float>(l.opl);
            out.rpe(x, y) = static_cast<float>(l.rpe);
        }
    }
    return out;
}

EnFaceImage max_projection(const ScalarVolume& vol, const PlexusBounds& bounds) {
    if (bounds.upper.nx() != vol.nx() || bounds.upper.ny() != vol.ny()) {
        throw std::invalid_argument("slab bounds do not match the volume");
    }
    EnFaceImage out{ScalarImage(vol.nx(), vol.ny(), 0.0f), bounds.plexus};
    for (int y = 0; y < vol.ny(); ++y) {
        for (int x = 0; x < vol.nx(); ++x) {
            const int z0 = std::max(0, static_cast<int>(std::ceil(bounds.upper(x, y))));
            const int z1 = std::min(vol.nz() - 1, static_cast<int>(std::floor(bounds.lower(x, y))));
            if (z0 > z1) continue;
            float m = vol(x, y, z0);
            for (int z = z0 + 1; z <= z1; ++z) m = std::max(m, vol(x, y, z));
            out.data(x, y) = m;
        }
    }
    return out;
}

Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
    spec.validate();
    Phantom ph;
    std::mt19937_64 rng(seed);

    BinaryVolume vessels(spec.nx, spec.ny, spec.nz, 0);
    for (Plexus p : kAllPlexuses) {
        auto& truth = ph.truth.plexuses[static_cast<std::size_t>(p)];
        const auto& ps = spec.plexuses[static_cast<std::size_t>(p)];
        truth.faz_radius_um = ps.faz_radius_um;
        truth.faz_area_mm2 = std::numbers::pi * ps.faz_radius_um * ps.faz_radius_um * 1e-6;
        for (const auto& path : plexus_paths(spec, p, rng)) render_path(path, spec, p, vessels, truth);
    }
    ph.truth.faz_volume_mm3 = column_volume_mm3(spec);

    ScalarVolume data(spec.nx, spec.ny, spec.nz);
    const float vi = static_cast<float>(spec.vessel_intensity), bi = static_cast<float>(spec.background_intensity);
#pragma omp parallel for schedule(static)
    for (int z = 0; z < spec.nz; ++z) {
        // One stream per plane keeps the output independent of the thread count.
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(z), 0x6f637461u};
        std::mt19937_64 plane_rng(sq);
        std::normal_distribution<double> gauss(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
        std::uniform_real_distribution<double> spk(1.0 - spec.speckle, 1.0 + spec.speckle);
        const std::uint8_t* m = vessels.plane(z);
        float* d = data.plane(z);
        for (std::size_t i = 0; i < data.plane_size(); ++i) {
            double v = m[i] ? vi : bi;
            if (spec.noise_sigma > 0) v += gauss(plane_rng);
            if (spec.speckle > 0) v *= spk(plane_rng);
            d[i] = static_cast<float>(std::max(0.0, v));
        }
    }

    ph.scan.surfaces = phantom_surfaces(spec);
    ph.scan.volume = OctaVolume{std::move(data), spec.res_plane_um, spec.res_axial_um,
                                spec.res_plane_um == spec.res_axial_um};
    SurfaceSet native = ph.scan.surfaces;
    const auto bounds = derive_plexus_bounds(native, spec.res_axial_um);
    for (Plexus p : kAllPlexuses) {
        const auto i = static_cast<std::size_t>(p);
        ph.scan.enfaces[i] = max_projection(ph.scan.volume.data, bounds[i]);
    }
    return ph;
}

}  // namespace faz3d
