#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "memflow/flow.hpp"
#include "memflow/generators.hpp"
#include "memflow/io.hpp"
#include "test_helpers.hpp"

using namespace memflow;
namespace fs = std::filesystem;

TEST_CASE("OFF round trip reproduces coordinates exactly")
{
    const TwoPhaseSurfaceMesh mesh = gen_twocap(3, 0.7);
    const std::string path = (fs::temp_directory_path() / "memflow_rt.off").string();
    write_off(mesh, path);
    const TwoPhaseSurfaceMesh back = load_mesh(path);
    CHECK((back.vertices - mesh.vertices).norm() == 0.0);
    CHECK((back.topo->triangles - mesh.topo->triangles).norm() == 0);
    CHECK((back.topo->tri_phase - mesh.topo->tri_phase).norm() == 0);
    write_off(back, path + "2");
    const TwoPhaseSurfaceMesh back2 = load_mesh(path + "2");
    CHECK((back2.vertices - mesh.vertices).norm() == 0.0);
}

TEST_CASE("loader rejects inward orientation and malformed files")
{
    const std::string path = (fs::temp_directory_path() / "memflow_bad.off").string();
    {
        // inward-wound tetrahedron
        std::ofstream out(path);
        out << "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n"
               "3 0 1 2 1\n3 0 3 1 1\n3 1 3 2 1\n3 2 3 0 1\n";
    }
    CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains("inward"), std::invalid_argument);
    {
        std::ofstream out(path);
        out << "NOT_OFF\n";
    }
    CHECK_THROWS(load_mesh(path));
    {
        // quad face
        std::ofstream out(path);
        out << "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3 1\n";
    }
    CHECK_THROWS(load_mesh(path));
}

TEST_CASE("VTK snapshot structure")
{
    const TwoPhaseSurfaceMesh mesh = gen_twocap(2, 1.0);
    PhaseParams params;
    const DiscreteState st = initialize_state(mesh, build_operators(mesh, 0.0), params);
    const std::string path = (fs::temp_directory_path() / "memflow_snap.vtk").string();
    write_vtk(mesh, st, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# vtk DataFile Version 3.0");
    std::ostringstream all;
    all << in.rdbuf();
    const std::string body = all.str();
    CHECK(body.find("DATASET POLYDATA") != std::string::npos);
    CHECK(body.find("POINTS " + std::to_string(mesh.K()) + " double") != std::string::npos);
    CHECK(body.find("POLYGONS " + std::to_string(mesh.J())) != std::string::npos);
    CHECK(body.find("SCALARS kappa_scalar double 1") != std::string::npos);
    CHECK(body.find("SCALARS Y_norm double 1") != std::string::npos);
    CHECK(body.find("CELL_DATA " + std::to_string(mesh.J())) != std::string::npos);
}

TEST_CASE("CSV header matches the driver contract")
{
    CHECK(std::string(kCsvHeader) ==
          "step,time,energy,area1,area2,gamma_length,volume,lambdaV,lambdaA1,lambdaA2,"
          "krylov_iters,fp_passes");
    DiagnosticsRecord r;
    r.step = 3;
    r.energy = 1.5;
    const std::string path = (fs::temp_directory_path() / "memflow_diag.csv").string();
    write_csv({r}, path);
    append_csv(r, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("config: paper defaults from an empty file")
{
    const SimulationConfig cfg = parse_config_text("");
    CHECK(cfg.params.dt == 1e-3);
    CHECK(cfg.params.alpha[0] == 1.0);
    CHECK(cfg.params.alpha[1] == 1.0);
    CHECK(cfg.params.kappa_bar[0] == 0.0);
    CHECK(cfg.params.alphaG[0] == 0.0);
    CHECK(cfg.params.line_tension == 0.0);
    CHECK(cfg.params.theta == 0.0);
    CHECK(!cfg.params.c1);
    CHECK(cfg.params.conserve == ConserveMode::None);
}

TEST_CASE("config: errors and a full experiment file")
{
    CHECK_THROWS_WITH_AS(parse_config_text("theta = 1.5\n"), doctest::Contains("theta"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("no_such_key = 1\n"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("dt = fast\n"), doctest::Contains("number"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("mesh_file = /no/such/file.off\n"),
                         doctest::Contains("does not exist"), std::invalid_argument);

    const SimulationConfig cfg = parse_config_text(
        "[mesh]\n"
        "generator = twocap\nratio = 0.1\n"
        "[params]\n"
        "line_tension = 9\nrho = 4\ndt = 1e-4\nc1 = 1\n"
        "[constraints]\n"
        "conserve = volume+area\nmultiplier_mode = implicit\n");
    CHECK(cfg.params.line_tension == 9.0);
    CHECK(cfg.params.rho == 4.0);
    CHECK(cfg.params.dt == 1e-4);
    CHECK(cfg.params.c1);
    CHECK(cfg.params.conserve == ConserveMode::VolumeArea);
    CHECK(cfg.mesh.ratio == 0.1);
}

TEST_CASE("config serialization round trip is idempotent")
{
    SimulationConfig cfg = parse_config_text("");
    cfg.params.kappa_bar = {-2.0, -0.5};
    cfg.params.line_tension = 0.1;
    cfg.params.rho = 2.0;
    cfg.params.conserve = ConserveMode::Volume;
    cfg.steps = 100;
    cfg.mesh.generator = "dumbbell";
    cfg.solver.method = SolverMethod::GMRES;
    const std::string once = serialize_config(cfg);
    const std::string twice = serialize_config(parse_config_text(once));
    CHECK(once == twice);
}
