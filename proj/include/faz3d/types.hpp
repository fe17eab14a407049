#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "faz3d/grid.hpp"

namespace faz3d {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Error raised inside one pipeline stage; `stage()` names it for batch diagnostics.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

enum class Plexus { superficial = 0, intermediate = 1, deep = 2 };

inline constexpr std::array<Plexus, 3> kAllPlexuses{Plexus::superficial, Plexus::intermediate, Plexus::deep};

[[nodiscard]] std::string_view plexus_name(Plexus p) noexcept;
[[nodiscard]] Plexus plexus_from_name(std::string_view name);

/// Decorrelation volume. z increases toward the RPE.
struct OctaVolume {
    ScalarVolume data;
    double res_plane_um = 0.0;
    double res_axial_um = 0.0;
    bool isotropic = false;

    [[nodiscard]] int nx() const noexcept { return data.nx(); }
    [[nodiscard]] int ny() const noexcept { return data.ny(); }
    [[nodiscard]] int nz() const noexcept { return data.nz(); }
};

/// Per-column axial positions (fractional voxels) of the segmented layers.
struct SurfaceSet {
    SurfaceMap ilm;
    SurfaceMap ipl;
    SurfaceMap opl;
    SurfaceMap rpe;
    std::optional<SurfaceMap> ipl_minus;
    std::optional<SurfaceMap> ipl_plus;
};

struct EnFaceImage {
    ScalarImage data;
    Plexus plexus = Plexus::superficial;
};

/// One plexus slab: upper(x,y) <= lower(x,y).
struct PlexusBounds {
    SurfaceMap upper;
    SurfaceMap lower;
    Plexus plexus = Plexus::superficial;
};

struct SkeletonPoint2D {
    int x = 0;
    int y = 0;
    int radius = 1;
    friend bool operator==(const SkeletonPoint2D&, const SkeletonPoint2D&) = default;
};

struct Skeleton2D {
    std::vector<SkeletonPoint2D> points;
};

struct SkeletonPoint3D {
    int x = 0;
    int y = 0;
    int z = 0;
    int radius = 1;
    friend bool operator==(const SkeletonPoint3D&, const SkeletonPoint3D&) = default;
};

struct Skeleton3D {
    std::vector<SkeletonPoint3D> points;
    Plexus plexus = Plexus::superficial;
    /// Skeleton points whose slab was empty at their column.
    std::size_t dropped = 0;
};

/// Per-scan measurement record; one CSV row.
struct FazMeasurement {
    std::string scan_id;
    std::string group_label;
    double res_plane_um = 0.0;
    double area_svc_mm2 = 0.0;
    double area_icp_mm2 = 0.0;
    double area_dcp_mm2 = 0.0;
    double volume_mm3 = 0.0;
    /// Empty when timing was not recorded (reproducible output).
    std::optional<double> elapsed_seconds;
};

}  // namespace faz3d
