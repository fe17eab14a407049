#include "faz3d/config.hpp"

#include <cmath>
#include <fstream>

#include "faz3d/types.hpp"

namespace faz3d {

using nlohmann::json;

void PipelineConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(std::string("invalid config: ") + what);
    };
    require(sigma_volume > 0, "sigma_volume must be > 0");
    require(median_window > 0 && median_window % 2 == 1, "median_window must be a positive odd number");
    require(outlier_mad_factor > 0, "outlier_mad_factor must be > 0");
    require(outlier_floor_voxels >= 0, "outlier_floor_voxels must be >= 0");
    require(frangi.scale_range[0] > 0, "frangi scale_range must be > 0");
    require(frangi.scale_range[0] <= frangi.scale_range[1], "frangi scale_range must be nondecreasing");
    require(frangi.scale_ratio > 0, "frangi scale_ratio must be > 0");
    require(frangi.beta_one > 0 && frangi.beta_two > 0, "frangi betas must be > 0");
    require(chamfer_axial > 0 && chamfer_diagonal > 0, "chamfer weights must be > 0");
    require(sigma_radius > 0, "sigma_radius must be > 0");
    require(min_component_px >= 0, "min_component_px must be >= 0");
    require(faz_dilation_radius > 0 && faz_dilation_radius < 255, "faz_dilation_radius must be in (0, 255)");
    require(axial_native_um > 0, "axial_native_um must be > 0");
}

std::vector<double> PipelineConfig::frangi_scales() const {
    std::vector<double> scales;
    const double lo = frangi.scale_range[0];
    const double hi = frangi.scale_range[1];
    const double step = frangi.scale_ratio;
    for (int i = 0;; ++i) {
        const double s = lo + step * i;
        if (s > hi + 1e-9) break;
        scales.push_back(s);
    }
    return scales;
}

namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    if (!j.is_object()) throw Error("config must be a JSON object");
    read_opt(j, "sigma_volume", cfg.sigma_volume);
    read_opt(j, "median_window", cfg.median_window);
    read_opt(j, "outlier_mad_factor", cfg.outlier_mad_factor);
    read_opt(j, "outlier_floor_voxels", cfg.outlier_floor_voxels);
    if (auto it = j.find("frangi"); it != j.end()) {
        read_opt(*it, "scale_range", cfg.frangi.scale_range);
        read_opt(*it, "scale_ratio", cfg.frangi.scale_ratio);
        read_opt(*it, "beta_one", cfg.frangi.beta_one);
        read_opt(*it, "beta_two", cfg.frangi.beta_two);
    }
    if (auto it = j.find("otsu_degenerate"); it != j.end()) {
        const auto v = it->get<std::string>();
        if (v == "error") cfg.otsu_degenerate = OtsuDegenerate::error;
        else if (v == "empty") cfg.otsu_degenerate = OtsuDegenerate::empty;
        else throw Error("otsu_degenerate must be \"error\" or \"empty\"");
    }
    read_opt(j, "chamfer_axial", cfg.chamfer_axial);
    read_opt(j, "chamfer_diagonal", cfg.chamfer_diagonal);
    read_opt(j, "sigma_radius", cfg.sigma_radius);
    read_opt(j, "min_component_px", cfg.min_component_px);
    read_opt(j, "faz_dilation_radius", cfg.faz_dilation_radius);
    read_opt(j, "offset_ipl_minus_um", cfg.offset_ipl_minus_um);
    read_opt(j, "offset_ipl_plus_um", cfg.offset_ipl_plus_um);
    read_opt(j, "axial_native_um", cfg.axial_native_um);
    cfg.validate();
    return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
    return json{
        {"sigma_volume", cfg.sigma_volume},
        {"median_window", cfg.median_window},
        {"outlier_mad_factor", cfg.outlier_mad_factor},
        {"outlier_floor_voxels", cfg.outlier_floor_voxels},
        {"frangi",
         {{"scale_range", cfg.frangi.scale_range},
          {"scale_ratio", cfg.frangi.scale_ratio},
          {"beta_one", cfg.frangi.beta_one},
          {"beta_two", cfg.frangi.beta_two}}},
        {"otsu_degenerate", cfg.otsu_degenerate == OtsuDegenerate::error ? "error" : "empty"},
        {"chamfer_axial", cfg.chamfer_axial},
        {"chamfer_diagonal", cfg.chamfer_diagonal},
        {"sigma_radius", cfg.sigma_radius},
        {"min_component_px", cfg.min_component_px},
        {"faz_dilation_radius", cfg.faz_dilation_radius},
        {"offset_ipl_minus_um", cfg.offset_ipl_minus_um},
        {"offset_ipl_plus_um", cfg.offset_ipl_plus_um},
        {"axial_native_um", cfg.axial_native_um},
    };
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("malformed config " + path.string() + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw Error("bad value in config " + path.string() + ": " + e.what());
    }
}

}  // namespace faz3d
