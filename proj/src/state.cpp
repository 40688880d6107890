#include "memflow/state.hpp"

namespace memflow {

std::string to_string(ConserveMode m)
{
    switch (m) {
    case ConserveMode::None: return "none";
    case ConserveMode::Volume: return "volume";
    case ConserveMode::Area: return "area";
    case ConserveMode::VolumeArea: return "volume+area";
    }
    return "?";
}

std::string to_string(MultiplierMode m)
{
    return m == MultiplierMode::Explicit ? "explicit" : "implicit";
}

ConserveMode conserve_from_string(const std::string& s)
{
    if (s == "none") return ConserveMode::None;
    if (s == "volume") return ConserveMode::Volume;
    if (s == "area") return ConserveMode::Area;
    if (s == "volume+area" || s == "area+volume") return ConserveMode::VolumeArea;
    throw std::invalid_argument("unknown conservation mode '" + s + "'");
}

MultiplierMode multiplier_from_string(const std::string& s)
{
    if (s == "explicit") return MultiplierMode::Explicit;
    if (s == "implicit") return MultiplierMode::Implicit;
    throw std::invalid_argument("unknown multiplier mode '" + s + "'");
}

} // namespace memflow
