#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace faz3d {

enum class OtsuDegenerate { error, empty };

struct FrangiParams {
    std::array<double, 2> scale_range{2.0, 3.0};
    double scale_ratio = 1.0;
    double beta_one = 0.6;
    double beta_two = 22.0;
};

/// Every tunable of the pipeline. Defaults reproduce the published settings.
struct PipelineConfig {
    double sigma_volume = 3.0;
    int median_window = 15;
    /// Surface outlier rule: |v - median| > max(mad_factor * 1.4826 * MAD, floor).
    double outlier_mad_factor = 3.0;
    double outlier_floor_voxels = 2.0;
    FrangiParams frangi;
    OtsuDegenerate otsu_degenerate = OtsuDegenerate::error;
    double chamfer_axial = 1.0;
    double chamfer_diagonal = 1.4142135623730951;
    double sigma_radius = 1.0;
    int min_component_px = 5;
    int faz_dilation_radius = 15;
    double offset_ipl_minus_um = -17.0;
    double offset_ipl_plus_um = 22.0;
    double axial_native_um = 3.87;

    /// Throws faz3d::Error on a violated invariant.
    void validate() const;

    /// Scales visited by the vesselness filter: range[0], range[0]+ratio, ... <= range[1].
    [[nodiscard]] std::vector<double> frangi_scales() const;
};

[[nodiscard]] PipelineConfig config_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Reads a JSON file; keys absent from it keep their defaults.
[[nodiscard]] PipelineConfig load_config(const std::filesystem::path& path);

/// Environment variable consulted by the CLI when --config is not given.
inline constexpr const char* kConfigEnvVar = "FAZ3D_CONFIG";

}  // namespace faz3d
