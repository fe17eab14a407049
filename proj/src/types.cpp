#include "faz3d/types.hpp"

namespace faz3d {

std::string_view plexus_name(Plexus p) noexcept {
    switch (p) {
        case Plexus::superficial: return "superficial";
        case Plexus::intermediate: return "intermediate";
        case Plexus::deep: return "deep";
    }
    return "unknown";
}

Plexus plexus_from_name(std::string_view name) {
    for (Plexus p : kAllPlexuses) {
        if (plexus_name(p) == name) return p;
    }
    throw Error("unknown plexus '" + std::string(name) + "'");
}

}  // namespace faz3d
