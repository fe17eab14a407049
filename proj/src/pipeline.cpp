#include "faz3d/pipeline.hpp"

#include <chrono>

#include "faz3d/reconstruct3d.hpp"

namespace faz3d {

namespace {

using Clock = std::chrono::steady_clock;

template <class F>
auto run_stage(const std::string& name, std::vector<StageTiming>& timings, F&& f) {
    const auto t0 = Clock::now();
    try {
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            timings.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
        } else {
            auto r = f();
            timings.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()});
            return r;
        }
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

PipelineResult measure(const Scan& scan, const PipelineConfig& cfg, const MeasureOptions& opts) {
    cfg.validate();
    const auto t_start = Clock::now();
    PipelineResult res;
    auto& timings = res.timings;

    auto pre = run_stage(stage::preprocess, timings, [&] { return preprocess(scan.volume, scan.surfaces, cfg); });
    const int nx = pre.volume.nx(), ny = pre.volume.ny(), nz = pre.volume.nz();

    std::array<PlexusSegmentation, 3> seg;
    for (Plexus p : kAllPlexuses) {
        const auto i = static_cast<std::size_t>(p);
        const auto name = std::string(stage::vessel2d) + ":" + std::string(plexus_name(p));
        seg[i] = run_stage(name, timings, [&] {
            if (scan.enfaces[i].data.nx() != nx || scan.enfaces[i].data.ny() != ny) {
                throw Error("en face image does not match the volume");
            }
            return segment_plexus_2d(scan.enfaces[i], cfg);
        });
    }

    std::array<Skeleton3D, 3> sk3;
    BinaryVolume network = run_stage(stage::reconstruct3d, timings, [&] {
        std::array<BinaryVolume, 3> nets;
        for (Plexus p : kAllPlexuses) {
            const auto i = static_cast<std::size_t>(p);
            sk3[i] = locate_axial(seg[i].skeleton, pre.volume.data, pre.bounds[i]);
            nets[i] = inflate_network(sk3[i], nx, ny, nz);
        }
        return merge_networks(nets[0], nets[1], nets[2]);
    });
    for (const auto& s : sk3) {
        if (s.dropped > 0) {
            res.warnings.push_back(std::string(plexus_name(s.plexus)) + ": " + std::to_string(s.dropped) +
                                   " skeleton points fell in an empty slab");
        }
    }

    run_stage(stage::faz2d, timings, [&] {
        for (Plexus p : kAllPlexuses) {
            const auto i = static_cast<std::size_t>(p);
            res.faz2d[i] = faz_2d(seg[i].mask, pre.volume.res_plane_um, cfg);
            if (!res.faz2d[i].warning.empty()) {
                res.warnings.push_back(std::string(plexus_name(p)) + " 2D FAZ: " + res.faz2d[i].warning);
            }
        }
    });
    res.faz3d = run_stage(stage::faz3d, timings, [&] {
        return faz_3d(network, pre.surfaces.ilm, pre.surfaces.opl, pre.volume.res_plane_um, cfg);
    });
    if (!res.faz3d.warning.empty()) res.warnings.push_back("3D FAZ: " + res.faz3d.warning);

    auto& m = res.measurement;
    m.res_plane_um = pre.volume.res_plane_um;
    m.area_svc_mm2 = res.faz2d[0].area_mm2;
    m.area_icp_mm2 = res.faz2d[1].area_mm2;
    m.area_dcp_mm2 = res.faz2d[2].area_mm2;
    m.volume_mm3 = res.faz3d.volume_mm3;
    m.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();

    if (opts.keep_intermediates) {
        res.preprocessed = std::move(pre);
        res.segmentations = std::move(seg);
        res.skeletons = std::move(sk3);
        res.network = std::move(network);
    } else {
        res.faz3d.mask = BinaryVolume();
    }
    return res;
}

}  // namespace faz3d
