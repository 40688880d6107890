#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "memflow/generators.hpp"
#include "memflow/solver.hpp"
#include "memflow/state.hpp"
#include "memflow/surface_mesh.hpp"

namespace memflow {

/// OFF with a per-face phase label: face rows are `3 a b c phase`.
std::tuple<MatX3d, MatX3i, VecXi> read_off(const std::string& path);
void write_off(const TwoPhaseSurfaceMesh& mesh, const std::string& path);

/// Legacy ASCII VTK PolyData snapshot with point data kappa_scalar, Y_norm,
/// phase and cell data phase.
void write_vtk(const TwoPhaseSurfaceMesh& mesh, const DiscreteState& state,
               const std::string& path);

extern const char* const kCsvHeader;
void write_csv(const std::vector<DiagnosticsRecord>& records, const std::string& path);
void append_csv(const DiagnosticsRecord& record, const std::string& path);

/// A full run description, parsed from a sectioned key/value file.
struct SimulationConfig {
    MeshSource mesh;
    PhaseParams params;
    SolverConfig solver;
    int steps = 0;
    double stop_velocity = 0.0;
    std::string out_dir = "out";
    std::string name = "run";
    int cadence = 10;
    std::string dump_system_dir;
};

SimulationConfig parse_config(const std::string& path);
SimulationConfig parse_config_text(const std::string& text);
std::string serialize_config(const SimulationConfig& cfg);

} // namespace memflow
