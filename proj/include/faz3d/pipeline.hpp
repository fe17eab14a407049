#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "faz3d/faz.hpp"
#include "faz3d/preprocess.hpp"
#include "faz3d/vessel2d.hpp"
#include "faz3d/volume_io.hpp"

namespace faz3d {

/// Stage names used in timings and in StageError::stage().
namespace stage {
inline constexpr const char* preprocess = "preprocess";
inline constexpr const char* vessel2d = "vessel2d";
inline constexpr const char* reconstruct3d = "reconstruct3d";
inline constexpr const char* faz2d = "faz2d";
inline constexpr const char* faz3d = "faz3d";
}  // namespace stage

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct MeasureOptions {
    /// Keep every intermediate in the result (stage dumps, overlays, tests).
    bool keep_intermediates = false;
};

struct PipelineResult {
    FazMeasurement measurement;
    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;

    // Filled only with keep_intermediates.
    PreprocessResult preprocessed;
    std::array<PlexusSegmentation, 3> segmentations;
    std::array<Skeleton3D, 3> skeletons;
    BinaryVolume network;

    // Always filled; the 3D mask is dropped unless intermediates are kept.
    std::array<FazRegion2D, 3> faz2d;
    FazRegion3D faz3d;
};

/// preprocess -> vessel2d x3 -> reconstruct3d -> faz_2d x3 + faz_3d.
/// Failures are rethrown as StageError tagged with the failing stage.
[[nodiscard]] PipelineResult measure(const Scan& scan, const PipelineConfig& cfg = {},
                                     const MeasureOptions& opts = {});

}  // namespace faz3d
