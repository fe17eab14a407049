#include "faz3d/batch.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <omp.h>
#include <png.h>

namespace faz3d {

namespace fs = std::filesystem;

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw Error("empty manifest: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    auto col = [&](const char* name) -> int {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int c_path = col("path"), c_id = col("scan_id"), c_group = col("group_label");
    if (c_path < 0 || c_id < 0) throw Error("manifest header needs path and scan_id columns");

    std::vector<ManifestEntry> out;
    std::set<std::string> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() <= static_cast<std::size_t>(std::max(c_path, c_id))) {
            throw Error("manifest line " + std::to_string(lineno) + ": too few fields");
        }
        ManifestEntry e;
        e.scan_path = f[static_cast<std::size_t>(c_path)];
        if (e.scan_path.is_relative()) e.scan_path = path.parent_path() / e.scan_path;
        e.scan_id = f[static_cast<std::size_t>(c_id)];
        if (c_group >= 0 && static_cast<std::size_t>(c_group) < f.size()) e.group_label = f[static_cast<std::size_t>(c_group)];
        if (e.scan_id.empty()) throw Error("manifest line " + std::to_string(lineno) + ": empty scan_id");
        if (!seen.insert(e.scan_id).second) throw Error("manifest: duplicate scan_id " + e.scan_id);
        out.push_back(std::move(e));
    }
    return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void dump_image(const fs::path& path, const ScalarImage& img) { write_raw_f32(path, img.values()); }
void dump_mask(const fs::path& path, const BinaryImage& img) { write_raw_u8(path, img.values()); }

struct Outcome {
    std::optional<FazMeasurement> measurement;
    std::optional<ScanFailure> failure;
    ScanTiming timing;
    std::vector<std::string> warnings;
};

Outcome run_one(const ManifestEntry& e, const RunManifest& m, const PipelineConfig& cfg) {
    using Clock = std::chrono::steady_clock;
    Outcome o;
    o.timing.scan_id = e.scan_id;
    const auto t0 = Clock::now();
    Scan scan;
    try {
        scan = load_scan(e.scan_path);
    } catch (const std::exception& ex) {
        o.failure = ScanFailure{e.scan_id, "load", ex.what()};
        return o;
    }
    o.timing.load_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    try {
        MeasureOptions opts;
        opts.keep_intermediates = m.dump_stages || m.overlays;
        auto r = measure(scan, cfg, opts);
        scan = Scan{};
        const fs::path dir = m.out_dir / e.scan_id;
        if (m.dump_stages) dump_stages(r, dir / "stages");
        if (m.overlays) {
            fs::create_directories(dir);
            for (Plexus p : kAllPlexuses) {
                const auto i = static_cast<std::size_t>(p);
                write_overlay_png(r.segmentations[i].enhanced, r.faz2d[i].mask,
                                  dir / ("overlay_" + std::string(plexus_name(p)) + ".png"));
            }
        }
        r.measurement.scan_id = e.scan_id;
        r.measurement.group_label = e.group_label;
        r.measurement.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        o.timing.stages = r.timings;
        o.warnings = std::move(r.warnings);
        o.measurement = std::move(r.measurement);
    } catch (const StageError& ex) {
        o.failure = ScanFailure{e.scan_id, ex.stage(), ex.what()};
    } catch (const std::exception& ex) {
        o.failure = ScanFailure{e.scan_id, "output", ex.what()};
    }
    return o;
}

std::string format_failures(const std::vector<ScanFailure>& failures) {
    std::string s = "scan_id,stage,message\n";
    for (const auto& f : failures) s += csv_escape(f.scan_id) + "," + csv_escape(f.stage) + "," + csv_escape(f.message) + "\n";
    return s;
}

std::string format_timings(const std::vector<ScanTiming>& timings) {
    std::string s = "scan_id,stage,seconds\n";
    char buf[64];
    for (const auto& t : timings) {
        std::snprintf(buf, sizeof buf, "%.6f", t.load_seconds);
        s += csv_escape(t.scan_id) + ",load," + buf + "\n";
        for (const auto& st : t.stages) {
            std::snprintf(buf, sizeof buf, "%.6f", st.seconds);
            s += csv_escape(t.scan_id) + "," + csv_escape(st.stage) + "," + buf + "\n";
        }
    }
    return s;
}

}  // namespace

BatchResult run_batch(const RunManifest& manifest, const PipelineConfig& cfg) {
    cfg.validate();
    if (manifest.threads < 1) throw Error("thread count must be >= 1");
    fs::create_directories(manifest.out_dir);

    const std::size_t n = manifest.scans.size();
    std::vector<Outcome> outcomes(n);
    const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(manifest.threads), std::max<std::size_t>(n, 1)));
    const int inner = std::max(1, manifest.threads / workers);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        omp_set_num_threads(inner);
        for (std::size_t i = next++; i < n; i = next++) outcomes[i] = run_one(manifest.scans[i], manifest, cfg);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    BatchResult res;
    for (auto& o : outcomes) {
        if (o.measurement) {
            if (manifest.reproducible) o.measurement->elapsed_seconds.reset();
            res.measurements.push_back(std::move(*o.measurement));
            res.timings.push_back(std::move(o.timing));
            for (auto& w : o.warnings) res.warnings.push_back(res.timings.back().scan_id + ": " + w);
        } else if (o.failure) {
            res.failures.push_back(std::move(*o.failure));
        }
    }
    write_measurements(res.measurements, manifest.out_dir / "measurements.csv");
    write_text(manifest.out_dir / "failures.csv", format_failures(res.failures));
    write_text(manifest.out_dir / "timing.csv", format_timings(res.timings));
    return res;
}

void dump_stages(const PipelineResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    const auto& vol = r.preprocessed.volume;
    std::ostringstream shapes;
    shapes << "# raw grids are x-fastest; .f32 float32 little-endian, .u8 one byte per element\n";
    shapes << "enface " << vol.nx() << " " << vol.ny() << "\n";
    shapes << "volume " << vol.nx() << " " << vol.ny() << " " << vol.nz() << "\n";
    shapes << "voxel_um " << vol.res_plane_um << "\n";
    write_text(dir / "shapes.txt", shapes.str());

    for (Plexus p : kAllPlexuses) {
        const auto i = static_cast<std::size_t>(p);
        const std::string name(plexus_name(p));
        const auto& s = r.segmentations[i];
        dump_image(dir / ("enhanced_" + name + ".f32"), s.enhanced);
        dump_mask(dir / ("mask_" + name + ".u8"), s.mask);
        dump_mask(dir / ("skeleton_" + name + ".u8"), s.skeleton_mask);
        dump_image(dir / ("dt_" + name + ".f32"), s.distance);
        dump_mask(dir / ("faz2d_" + name + ".u8"), r.faz2d[i].mask);
    }

    std::string sk = "plexus,x,y,z,radius\n";
    for (const auto& s3 : r.skeletons) {
        for (const auto& p : s3.points) {
            sk += std::string(plexus_name(s3.plexus)) + "," + std::to_string(p.x) + "," + std::to_string(p.y) + "," +
                  std::to_string(p.z) + "," + std::to_string(p.radius) + "\n";
        }
    }
    write_text(dir / "skeleton3d.csv", sk);
    if (!r.network.empty()) write_raw_u8(dir / "network.u8", r.network.values());

    std::string cloud = "x,y,z\n";
    const auto& m = r.faz3d.mask;
    for (int z = 0; z < m.nz(); ++z) {
        for (int y = 0; y < m.ny(); ++y) {
            for (int x = 0; x < m.nx(); ++x) {
                if (m(x, y, z)) cloud += std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + "\n";
            }
        }
    }
    write_text(dir / "faz3d_points.csv", cloud);
}

void write_overlay_png(const ScalarImage& enhanced, const BinaryImage& faz, const fs::path& path) {
    const int nx = enhanced.nx(), ny = enhanced.ny();
    if (faz.nx() != nx || faz.ny() != ny) throw Error("overlay: image and FAZ mask shapes differ");
    float hi = 0;
    for (float v : enhanced.values()) hi = std::max(hi, v);
    std::vector<png_byte> rgb(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * 3);
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const auto g = static_cast<png_byte>(hi > 0 ? std::lround(255.0 * enhanced(x, y) / hi) : 0);
            png_byte* px = &rgb[(static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)) * 3];
            px[0] = px[1] = px[2] = g;
            if (!faz(x, y)) continue;
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!faz.contains(x + dx, y + dy) || !faz(x + dx, y + dy)) {
                        edge = true;
                        break;
                    }
                }
            }
            if (edge) {
                px[0] = 255;
                px[1] = 0;
                px[2] = 0;
            }
        }
    }

    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    if (!fp) throw Error("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("PNG encoding failed: " + path.string());
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(nx), static_cast<png_uint_32>(ny), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < ny; ++y) png_write_row(png, &rgb[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) * 3]);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

MetricSummary describe(std::vector<double> v) {
    MetricSummary s;
    s.n = v.size();
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    double sum = 0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    auto quantile = [&](double q) {
        const double h = q * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.median = quantile(0.5);
    s.q1 = quantile(0.25);
    s.q3 = quantile(0.75);
    s.iqr = s.q3 - s.q1;
    return s;
}

std::vector<GroupSummary> summarize_groups(const std::vector<FazMeasurement>& records) {
    if (records.empty()) throw Error("no measurements to summarize");
    std::map<std::string, std::array<std::vector<double>, 4>> by_group;
    for (const auto& r : records) {
        auto& g = by_group[r.group_label.empty() ? std::string(kUnlabeled) : r.group_label];
        g[0].push_back(r.area_svc_mm2);
        g[1].push_back(r.area_icp_mm2);
        g[2].push_back(r.area_dcp_mm2);
        g[3].push_back(r.volume_mm3);
    }
    static const std::array<std::string, 3> kKnown{"healthy", "diabetes_no_dr", "diabetes_dr"};
    auto rank = [&](const std::string& g) {
        const auto it = std::find(kKnown.begin(), kKnown.end(), g);
        if (it != kKnown.end()) return static_cast<int>(it - kKnown.begin());
        return g == kUnlabeled ? 4 : 3;
    };
    std::vector<std::string> order;
    for (const auto& [g, _] : by_group) order.push_back(g);
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });

    std::vector<GroupSummary> out;
    for (const auto& g : order) {
        GroupSummary s;
        s.group = g;
        for (std::size_t k = 0; k < 4; ++k) s.metrics[k] = describe(by_group[g][k]);
        out.push_back(std::move(s));
    }
    return out;
}

std::string format_summary(const std::vector<GroupSummary>& groups) {
    static const std::array<const char*, 4> kNames{"area_svc_mm2", "area_icp_mm2", "area_dcp_mm2", "volume_mm3"};
    std::string s = "group,metric,n,mean,sd,median,q1,q3,iqr\n";
    char buf[256];
    for (const auto& g : groups) {
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& m = g.metrics[k];
            std::snprintf(buf, sizeof buf, ",%s,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", kNames[k], m.n, m.mean, m.sd,
                          m.median, m.q1, m.q3, m.iqr);
            s += csv_escape(g.group) + buf;
        }
    }
    return s;
}

TimingReport report_timing(const std::vector<double>& elapsed, const std::vector<ScanTiming>& stages) {
    TimingReport r;
    const auto d = describe(elapsed);
    r.n = d.n;
    if (d.n == 0) return r;
    r.mean = d.mean;
    r.sd = d.sd;
    r.min = *std::min_element(elapsed.begin(), elapsed.end());
    r.max = *std::max_element(elapsed.begin(), elapsed.end());

    std::vector<std::string> order;
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& t : stages) {
        auto add = [&](const std::string& name, double sec) {
            if (!acc.count(name)) order.push_back(name);
            acc[name].first += sec;
            acc[name].second += 1;
        };
        add("load", t.load_seconds);
        for (const auto& s : t.stages) add(s.stage, s.seconds);
    }
    for (const auto& name : order) r.stage_means.push_back({name, acc[name].first / acc[name].second});
    return r;
}

std::string format_timing_report(const TimingReport& r) {
    std::string s;
    char buf[256];
    if (r.n == 0) return "no timed scans\n";
    std::snprintf(buf, sizeof buf, "scans: %zu\nelapsed s: mean %.3f  sd %.3f  min %.3f  max %.3f\n", r.n, r.mean, r.sd,
                  r.min, r.max);
    s += buf;
    if (!r.stage_means.empty()) {
        s += "per-stage mean s:\n";
        for (const auto& st : r.stage_means) {
            std::snprintf(buf, sizeof buf, "  %-24s %.3f\n", st.stage.c_str(), st.seconds);
            s += buf;
        }
    }
    s += "reference: 38.7 (2.6) s per volume, mean (SD), 4-core laptop\n";
    return s;
}

}  // namespace faz3d
