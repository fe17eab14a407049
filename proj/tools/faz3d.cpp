// faz3d command line: measure, phantom, summarize, bench.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "faz3d/batch.hpp"
#include "faz3d/phantom.hpp"

namespace fs = std::filesystem;
using namespace faz3d;

namespace {

PipelineConfig resolve_config(const std::string& flag, std::optional<fs::path>& used) {
    if (!flag.empty()) {
        used = flag;
        return load_config(flag);
    }
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
        used = fs::path(env);
        return load_config(env);
    }
    return {};
}

int cmd_measure(const std::string& manifest_path, const std::string& config_flag, const std::string& out, bool dumps,
                bool overlays, int threads, bool reproducible) {
    RunManifest m;
    m.scans = read_manifest(manifest_path);
    const auto cfg = resolve_config(config_flag, m.config_path);
    m.out_dir = out;
    m.dump_stages = dumps;
    m.overlays = overlays;
    m.threads = threads;
    m.reproducible = reproducible;
    if (m.scans.empty()) throw Error("manifest lists no scans");

    const auto res = run_batch(m, cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : res.failures) std::cerr << "failed: " << f.scan_id << " [" << f.stage << "] " << f.message << "\n";

    std::vector<double> elapsed;
    for (const auto& t : res.timings) {
        double s = t.load_seconds;
        for (const auto& st : t.stages) s += st.seconds;
        elapsed.push_back(s);
    }
    const auto report = format_timing_report(report_timing(elapsed, res.timings));
    std::ofstream(fs::path(out) / "timing.txt") << report;
    std::cout << res.measurements.size() << " measured, " << res.failures.size() << " failed; results in " << out
              << "\n";
    return res.failures.empty() ? 0 : 1;
}

int cmd_phantom(const std::string& spec_path, std::optional<std::uint64_t> seed, const std::string& out) {
    const auto spec = load_phantom_spec(spec_path);
    const auto ph = generate_phantom(spec, seed.value_or(spec.seed));
    save_scan(ph.scan, out);
    std::ofstream(fs::path(out) / "ground_truth.json") << ground_truth_to_json(ph.truth).dump(2) << "\n";
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_summarize(const std::string& csv) {
    std::cout << format_summary(summarize_groups(read_measurements(csv)));
    return 0;
}

int cmd_bench(const std::string& spec_path, int repeat, const std::string& config_flag, int threads,
              const std::string& workdir) {
    if (repeat < 1) throw Error("--repeat must be >= 1");
    std::optional<fs::path> used;
    const auto cfg = resolve_config(config_flag, used);
    const auto spec = load_phantom_spec(spec_path);
    const fs::path dir = workdir.empty() ? fs::temp_directory_path() / "faz3d-bench" : fs::path(workdir);
    const fs::path scan_dir = dir / "scan";
    {
        const auto ph = generate_phantom(spec, spec.seed);
        save_scan(ph.scan, scan_dir);
    }
    RunManifest m;
    m.out_dir = dir / "out";
    m.threads = threads;
    for (int i = 0; i < repeat; ++i) m.scans.push_back({scan_dir, "run" + std::to_string(i + 1), "bench"});
    // Repeats run one after another so each timing sees the whole machine.
    std::vector<double> elapsed;
    std::vector<ScanTiming> stages;
    for (auto& e : m.scans) {
        RunManifest one = m;
        one.scans = {e};
        const auto res = run_batch(one, cfg);
        if (!res.failures.empty()) throw Error("bench run failed: " + res.failures.front().message);
        elapsed.push_back(*res.measurements.front().elapsed_seconds);
        stages.push_back(res.timings.front());
    }
    std::cout << "volume " << spec.nx << "x" << spec.ny << "x" << spec.nz << ", threads " << threads << "\n";
    std::cout << format_timing_report(report_timing(elapsed, stages));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D capillary network reconstruction and foveal avascular zone measurement from OCTA"};
    app.require_subcommand(1);

    std::string manifest, config, out, spec, csv, workdir;
    bool dumps = false, overlays = false, reproducible = false;
    int threads = 1, repeat = 3;
    std::optional<std::uint64_t> seed;

    auto* measure = app.add_subcommand("measure", "run the pipeline over a manifest of scans");
    measure->add_option("--manifest", manifest, "CSV with path,scan_id,group_label")->required()->check(CLI::ExistingFile);
    measure->add_option("--config", config, std::string("pipeline config JSON (default: $") + kConfigEnvVar + ")");
    measure->add_option("--out", out, "output directory")->required();
    measure->add_flag("--dump-stages", dumps, "write intermediates per scan");
    measure->add_flag("--overlays", overlays, "write FAZ overlay PNGs per scan");
    measure->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    measure->add_flag("--reproducible", reproducible, "omit elapsed_seconds from measurements.csv");

    auto* phantom = app.add_subcommand("phantom", "generate a synthetic scan with known geometry");
    phantom->add_option("--spec", spec, "phantom spec JSON")->required()->check(CLI::ExistingFile);
    phantom->add_option("--seed", seed, "RNG seed (default: the spec's seed)");
    phantom->add_option("--out", out, "scan directory to write")->required();

    auto* summarize = app.add_subcommand("summarize", "per-group descriptive statistics of a measurements CSV");
    summarize->add_option("--csv", csv, "measurements.csv")->required()->check(CLI::ExistingFile);

    auto* bench = app.add_subcommand("bench", "time the full pipeline on a generated phantom");
    bench->add_option("--spec", spec, "phantom spec JSON")->required()->check(CLI::ExistingFile);
    bench->add_option("--repeat", repeat, "number of timed runs")->check(CLI::PositiveNumber);
    bench->add_option("--config", config, "pipeline config JSON");
    bench->add_option("--threads", threads, "threads")->check(CLI::PositiveNumber);
    bench->add_option("--workdir", workdir, "scratch directory (default: system temp)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*measure) return cmd_measure(manifest, config, out, dumps, overlays, threads, reproducible);
        if (*phantom) return cmd_phantom(spec, seed, out);
        if (*summarize) return cmd_summarize(csv);
        if (*bench) return cmd_bench(spec, repeat, config, threads, workdir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
