#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faz3d/pipeline.hpp"

namespace faz3d {

struct ManifestEntry {
    std::filesystem::path scan_path;
    std::string scan_id;
    std::string group_label;  // empty: unlabeled
};

struct RunManifest {
    std::vector<ManifestEntry> scans;
    std::optional<std::filesystem::path> config_path;
    std::filesystem::path out_dir;
    bool dump_stages = false;
    bool overlays = false;
    int threads = 1;
    /// Leave elapsed_seconds empty in measurements.csv so reruns are byte-identical.
    bool reproducible = false;
};

/// CSV with header path,scan_id,group_label. Relative paths resolve against the
/// manifest's directory. Throws on duplicate scan ids or a malformed file.
[[nodiscard]] std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct ScanFailure {
    std::string scan_id;
    std::string stage;
    std::string message;
};

struct ScanTiming {
    std::string scan_id;
    double load_seconds = 0.0;
    std::vector<StageTiming> stages;
};

struct BatchResult {
    std::vector<FazMeasurement> measurements;  // manifest order, successes only
    std::vector<ScanFailure> failures;         // manifest order
    std::vector<ScanTiming> timings;           // one per success
    std::vector<std::string> warnings;         // "scan_id: text"
};

/// Runs every scan; a failing scan is recorded and never stops the batch.
/// Writes measurements.csv, failures.csv and timing.csv into out_dir.
[[nodiscard]] BatchResult run_batch(const RunManifest& manifest, const PipelineConfig& cfg);

/// Writes intermediates of one scan under dir (raw grids, CSV point lists).
void dump_stages(const PipelineResult& r, const std::filesystem::path& dir);

/// Vessel-enhanced image in gray with the FAZ outline in red.
void write_overlay_png(const ScalarImage& enhanced, const BinaryImage& faz, const std::filesystem::path& path);

struct MetricSummary {
    std::size_t n = 0;
    double mean = 0, sd = 0, median = 0, q1 = 0, q3 = 0, iqr = 0;
};

struct GroupSummary {
    std::string group;
    /// area_svc, area_icp, area_dcp, volume
    std::array<MetricSummary, 4> metrics;
};

inline constexpr const char* kUnlabeled = "unlabeled";

/// Descriptive statistics per group: healthy, diabetes_no_dr, diabetes_dr first, then other
/// labels alphabetically, then unlabeled. SD is the sample SD (n - 1); quartiles interpolate
/// linearly between order statistics. Throws on empty input.
[[nodiscard]] std::vector<GroupSummary> summarize_groups(const std::vector<FazMeasurement>& records);
[[nodiscard]] std::string format_summary(const std::vector<GroupSummary>& groups);

[[nodiscard]] MetricSummary describe(std::vector<double> values);

struct TimingReport {
    std::size_t n = 0;
    double mean = 0, sd = 0, min = 0, max = 0;
    /// Mean seconds per stage, in pipeline order.
    std::vector<StageTiming> stage_means;
};

[[nodiscard]] TimingReport report_timing(const std::vector<double>& elapsed,
                                         const std::vector<ScanTiming>& stages = {});
[[nodiscard]] std::string format_timing_report(const TimingReport& r);

}  // namespace faz3d
