#include "memflow/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace memflow {

namespace {

std::string strip(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Next content line: comments (#) and blanks skipped.
bool next_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (!line.empty()) return true;
    }
    return false;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::tuple<MatX3d, MatX3i, VecXi> read_off(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_off: cannot open '" + path + "'");
    std::string line;
    if (!next_line(in, line) || line != "OFF")
        throw std::runtime_error("read_off: missing OFF header in '" + path + "'");
    if (!next_line(in, line)) throw std::runtime_error("read_off: missing counts line");
    Index nv = 0, nf = 0;
    long ne = 0;
    {
        std::istringstream is(line);
        if (!(is >> nv >> nf >> ne))
            throw std::runtime_error("read_off: malformed counts line '" + line + "'");
    }
    MatX3d V(nv, 3);
    for (Index k = 0; k < nv; ++k) {
        if (!next_line(in, line)) throw std::runtime_error("read_off: truncated vertex list");
        std::istringstream is(line);
        if (!(is >> V(k, 0) >> V(k, 1) >> V(k, 2)))
            throw std::runtime_error("read_off: bad vertex line '" + line + "'");
    }
    MatX3i F(nf, 3);
    VecXi phase(nf);
    for (Index j = 0; j < nf; ++j) {
        if (!next_line(in, line)) throw std::runtime_error("read_off: truncated face list");
        std::istringstream is(line);
        int n = 0;
        if (!(is >> n) || n != 3)
            throw std::runtime_error("read_off: only triangle faces are supported ('" + line +
                                     "')");
        if (!(is >> F(j, 0) >> F(j, 1) >> F(j, 2) >> phase[j]))
            throw std::runtime_error("read_off: face line needs 3 vertices and a phase ('" +
                                     line + "')");
    }
    return {std::move(V), std::move(F), std::move(phase)};
}

void write_off(const TwoPhaseSurfaceMesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_off: cannot open '" + path + "'");
    out << "OFF\n" << mesh.K() << " " << mesh.J() << " 0\n";
    for (Index k = 0; k < mesh.K(); ++k)
        out << fmt(mesh.vertices(k, 0)) << " " << fmt(mesh.vertices(k, 1)) << " "
            << fmt(mesh.vertices(k, 2)) << "\n";
    const MeshTopology& topo = *mesh.topo;
    for (Index j = 0; j < mesh.J(); ++j)
        out << "3 " << topo.triangles(j, 0) << " " << topo.triangles(j, 1) << " "
            << topo.triangles(j, 2) << " " << topo.tri_phase[j] << "\n";
    if (!out) throw std::runtime_error("write_off: write failed for '" + path + "'");
}

void write_vtk(const TwoPhaseSurfaceMesh& mesh, const DiscreteState& state,
               const std::string& path)
{
    const MeshTopology& topo = *mesh.topo;
    const VertexNormalField normals = vertex_normals(mesh);

    // Mass-weighted scalar curvature and multiplier magnitude per vertex.
    VecXd kappa_scalar = VecXd::Zero(topo.K());
    VecXd y_norm = VecXd::Zero(topo.K());
    VecXd weight = VecXd::Zero(topo.K());
    for (int i = 0; i < 2; ++i) {
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            const Vec3d w = normals.omega_phase[i].row(kl).normalized();
            kappa_scalar[k] += state.kappa[i].row(kl).dot(w);
            y_norm[k] += state.Y[i].row(kl).norm();
            weight[k] += 1.0;
        }
    }
    kappa_scalar.array() /= weight.array().max(1.0);
    y_norm.array() /= weight.array().max(1.0);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_vtk: cannot open '" + path + "'");
    out << "# vtk DataFile Version 3.0\n";
    out << "two-phase membrane snapshot\n";
    out << "ASCII\nDATASET POLYDATA\n";
    out << "POINTS " << topo.K() << " double\n";
    for (Index k = 0; k < topo.K(); ++k)
        out << fmt(mesh.vertices(k, 0)) << " " << fmt(mesh.vertices(k, 1)) << " "
            << fmt(mesh.vertices(k, 2)) << "\n";
    out << "POLYGONS " << topo.J() << " " << 4 * topo.J() << "\n";
    for (Index j = 0; j < topo.J(); ++j)
        out << "3 " << topo.triangles(j, 0) << " " << topo.triangles(j, 1) << " "
            << topo.triangles(j, 2) << "\n";
    out << "POINT_DATA " << topo.K() << "\n";
    out << "SCALARS kappa_scalar double 1\nLOOKUP_TABLE default\n";
    for (Index k = 0; k < topo.K(); ++k) out << fmt(kappa_scalar[k]) << "\n";
    out << "SCALARS Y_norm double 1\nLOOKUP_TABLE default\n";
    for (Index k = 0; k < topo.K(); ++k) out << fmt(y_norm[k]) << "\n";
    out << "SCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (Index k = 0; k < topo.K(); ++k) {
        int p = 0;
        if (!topo.vertex_on_gamma(k))
            p = topo.global_to_phase[0][k] >= 0 ? 1 : 2;
        out << p << "\n";
    }
    out << "CELL_DATA " << topo.J() << "\n";
    out << "SCALARS phase int 1\nLOOKUP_TABLE default\n";
    for (Index j = 0; j < topo.J(); ++j) out << topo.tri_phase[j] << "\n";
    if (!out) throw std::runtime_error("write_vtk: write failed for '" + path + "'");
}

const char* const kCsvHeader =
    "step,time,energy,area1,area2,gamma_length,volume,lambdaV,lambdaA1,lambdaA2,"
    "krylov_iters,fp_passes";

namespace {

void csv_row(std::ostream& out, const DiagnosticsRecord& r)
{
    out << r.step << "," << fmt(r.time) << "," << fmt(r.energy) << "," << fmt(r.area1) << ","
        << fmt(r.area2) << "," << fmt(r.gamma_length) << "," << fmt(r.volume) << ","
        << fmt(r.lambdaV) << "," << fmt(r.lambdaA1) << "," << fmt(r.lambdaA2) << ","
        << r.krylov_iters << "," << r.fp_passes << "\n";
}

} // namespace

void write_csv(const std::vector<DiagnosticsRecord>& records, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");
    out << kCsvHeader << "\n";
    for (const auto& r : records) csv_row(out, r);
}

void append_csv(const DiagnosticsRecord& record, const std::string& path)
{
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("append_csv: cannot open '" + path + "'");
    csv_row(out, record);
}

namespace {

struct KeyValue {
    std::string key, value;
    int line = 0;
};

std::vector<KeyValue> tokenize_config(const std::string& text)
{
    std::vector<KeyValue> kvs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            continue; // sections are grouping only; keys are global
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        kvs.push_back({strip(line.substr(0, eq)), strip(line.substr(eq + 1)), lineno});
    }
    return kvs;
}

double parse_num(const KeyValue& kv)
{
    size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(kv.value, &pos);
    } catch (...) {
        pos = 0;
    }
    if (pos != kv.value.size())
        throw std::invalid_argument("config line " + std::to_string(kv.line) + ": key '" +
                                    kv.key + "' needs a number, got '" + kv.value + "'");
    return v;
}

int parse_int(const KeyValue& kv)
{
    const double v = parse_num(kv);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config line " + std::to_string(kv.line) + ": key '" +
                                    kv.key + "' needs an integer");
    return i;
}

} // namespace

SimulationConfig parse_config_text(const std::string& text)
{
    SimulationConfig cfg;
    for (const KeyValue& kv : tokenize_config(text)) {
        const std::string& k = kv.key;
        if (k == "mesh_file") cfg.mesh.file = kv.value;
        else if (k == "generator") cfg.mesh.generator = kv.value;
        else if (k == "level") cfg.mesh.level = parse_int(kv);
        else if (k == "radius") cfg.mesh.radius = parse_num(kv);
        else if (k == "ratio") cfg.mesh.ratio = parse_num(kv);
        else if (k == "islands") cfg.mesh.islands = parse_int(kv);
        else if (k == "flatten") cfg.mesh.flatten = parse_num(kv);
        else if (k == "height") cfg.mesh.height = parse_num(kv);
        else if (k == "width") cfg.mesh.width = parse_num(kv);
        else if (k == "neck") cfg.mesh.neck = parse_num(kv);
        else if (k == "split_z") cfg.mesh.split_z = parse_num(kv);
        else if (k == "ring_radius") cfg.mesh.ring_radius = parse_num(kv);
        else if (k == "tube_radius") cfg.mesh.tube_radius = parse_num(kv);
        else if (k == "alpha1") cfg.params.alpha[0] = parse_num(kv);
        else if (k == "alpha2") cfg.params.alpha[1] = parse_num(kv);
        else if (k == "kappa_bar1") cfg.params.kappa_bar[0] = parse_num(kv);
        else if (k == "kappa_bar2") cfg.params.kappa_bar[1] = parse_num(kv);
        else if (k == "alphaG1") cfg.params.alphaG[0] = parse_num(kv);
        else if (k == "alphaG2") cfg.params.alphaG[1] = parse_num(kv);
        else if (k == "line_tension") cfg.params.line_tension = parse_num(kv);
        else if (k == "rho") cfg.params.rho = parse_num(kv);
        else if (k == "theta") cfg.params.theta = parse_num(kv);
        else if (k == "c1") cfg.params.c1 = parse_int(kv) != 0;
        else if (k == "conserve") cfg.params.conserve = conserve_from_string(kv.value);
        else if (k == "multiplier_mode")
            cfg.params.multiplier_mode = multiplier_from_string(kv.value);
        else if (k == "fixedpoint_tol") cfg.params.fixedpoint_tol = parse_num(kv);
        else if (k == "fixedpoint_maxit") cfg.params.fixedpoint_maxit = parse_int(kv);
        else if (k == "dt") cfg.params.dt = parse_num(kv);
        else if (k == "solver") cfg.solver.method = solver_method_from_string(kv.value);
        else if (k == "solver_tol") cfg.solver.tol = parse_num(kv);
        else if (k == "solver_maxit") cfg.solver.maxit = parse_int(kv);
        else if (k == "gmres_restart") cfg.solver.restart = parse_int(kv);
        else if (k == "steps") cfg.steps = parse_int(kv);
        else if (k == "stop_velocity") cfg.stop_velocity = parse_num(kv);
        else if (k == "out") cfg.out_dir = kv.value;
        else if (k == "name") cfg.name = kv.value;
        else if (k == "cadence") cfg.cadence = parse_int(kv);
        else if (k == "dump_system") cfg.dump_system_dir = kv.value;
        else
            throw std::invalid_argument("config line " + std::to_string(kv.line) +
                                        ": unknown key '" + k + "'");
    }
    cfg.params.check();
    cfg.solver.check();
    if (cfg.steps < 0) throw std::invalid_argument("config: steps must be >= 0");
    if (!cfg.mesh.file.empty() && !std::filesystem::exists(cfg.mesh.file))
        throw std::invalid_argument("config: mesh file '" + cfg.mesh.file + "' does not exist");
    return cfg;
}

SimulationConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const SimulationConfig& cfg)
{
    std::ostringstream os;
    os << "[mesh]\n";
    if (!cfg.mesh.file.empty()) os << "mesh_file = " << cfg.mesh.file << "\n";
    os << "generator = " << cfg.mesh.generator << "\n";
    os << "level = " << cfg.mesh.level << "\n";
    os << "radius = " << fmt(cfg.mesh.radius) << "\n";
    os << "ratio = " << fmt(cfg.mesh.ratio) << "\n";
    os << "islands = " << cfg.mesh.islands << "\n";
    os << "flatten = " << fmt(cfg.mesh.flatten) << "\n";
    os << "height = " << fmt(cfg.mesh.height) << "\n";
    os << "width = " << fmt(cfg.mesh.width) << "\n";
    os << "neck = " << fmt(cfg.mesh.neck) << "\n";
    os << "split_z = " << fmt(cfg.mesh.split_z) << "\n";
    os << "ring_radius = " << fmt(cfg.mesh.ring_radius) << "\n";
    os << "tube_radius = " << fmt(cfg.mesh.tube_radius) << "\n";
    os << "\n[params]\n";
    os << "alpha1 = " << fmt(cfg.params.alpha[0]) << "\n";
    os << "alpha2 = " << fmt(cfg.params.alpha[1]) << "\n";
    os << "kappa_bar1 = " << fmt(cfg.params.kappa_bar[0]) << "\n";
    os << "kappa_bar2 = " << fmt(cfg.params.kappa_bar[1]) << "\n";
    os << "alphaG1 = " << fmt(cfg.params.alphaG[0]) << "\n";
    os << "alphaG2 = " << fmt(cfg.params.alphaG[1]) << "\n";
    os << "line_tension = " << fmt(cfg.params.line_tension) << "\n";
    os << "rho = " << fmt(cfg.params.rho) << "\n";
    os << "theta = " << fmt(cfg.params.theta) << "\n";
    os << "c1 = " << (cfg.params.c1 ? 1 : 0) << "\n";
    os << "dt = " << fmt(cfg.params.dt) << "\n";
    os << "\n[constraints]\n";
    os << "conserve = " << to_string(cfg.params.conserve) << "\n";
    os << "multiplier_mode = " << to_string(cfg.params.multiplier_mode) << "\n";
    os << "fixedpoint_tol = " << fmt(cfg.params.fixedpoint_tol) << "\n";
    os << "fixedpoint_maxit = " << cfg.params.fixedpoint_maxit << "\n";
    os << "\n[solver]\n";
    os << "solver = " << to_string(cfg.solver.method) << "\n";
    os << "solver_tol = " << fmt(cfg.solver.tol) << "\n";
    os << "solver_maxit = " << cfg.solver.maxit << "\n";
    os << "gmres_restart = " << cfg.solver.restart << "\n";
    os << "\n[run]\n";
    os << "steps = " << cfg.steps << "\n";
    os << "stop_velocity = " << fmt(cfg.stop_velocity) << "\n";
    os << "out = " << cfg.out_dir << "\n";
    os << "name = " << cfg.name << "\n";
    os << "cadence = " << cfg.cadence << "\n";
    if (!cfg.dump_system_dir.empty()) os << "dump_system = " << cfg.dump_system_dir << "\n";
    return os.str();
}

} // namespace memflow
