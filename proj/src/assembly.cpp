#include "memflow/assembly.hpp"

#include <functional>
#include <stdexcept>

#include "memflow/geometry.hpp"

namespace memflow {

VecXd flatten(const MatX3d& field)
{
    VecXd v(3 * field.rows());
    for (Index k = 0; k < field.rows(); ++k)
        for (int c = 0; c < 3; ++c) v[3 * k + c] = field(k, c);
    return v;
}

MatX3d unflatten(const VecXd& v)
{
    MatX3d f(v.size() / 3, 3);
    for (Index k = 0; k < f.rows(); ++k)
        for (int c = 0; c < 3; ++c) f(k, c) = v[3 * k + c];
    return f;
}

DofMap DofMap::build(const MeshTopology& topo, bool c1)
{
    DofMap m;
    m.K1 = topo.K_phase(0);
    m.K2 = topo.K_phase(1);
    m.K = topo.K();
    m.Kg = topo.K_gamma();
    m.c1 = c1 && m.Kg > 0;

    Index o = 0;
    m.oY[0] = o; o += 3 * m.K1;
    m.oY[1] = o; o += 3 * m.K2;
    m.oX = o; o += 3 * m.K;
    m.oKG = o; o += 3 * m.Kg;
    m.oM[0] = o; o += 3 * m.Kg;
    m.oM[1] = o; o += 3 * m.Kg;
    m.oPhi = o;
    if (m.c1) o += 3 * m.Kg;
    m.n = o;

    Index r = 0;
    m.rFlow = r; r += 3 * m.K;
    m.rSide[0] = r; r += 3 * m.K1;
    m.rSide[1] = r; r += 3 * m.K2;
    m.rE[0] = r; r += 3 * m.Kg;
    m.rE[1] = r; r += 3 * m.Kg;
    m.rC = r; r += 3 * m.Kg;
    m.rD = r;
    if (m.c1) r += 3 * m.Kg;
    if (r != m.n) throw std::logic_error("DofMap: row/column count mismatch");
    return m;
}

namespace {

// Row/column resolvers used to scatter the same element entries both into
// the interface-reduced operator and into the stand-alone phase blocks.
// Equation codes: 'F' flow, 'S' side constraint, 'E' junction row.
// Variable codes: 'Y', 'X' (phase-local), 'x' (interface vertex, by gamma
// index), 'G' curve curvature, 'M' weak conormal.
struct EntrySink {
    std::vector<Triplet>* out;
    std::function<Index(char, Index, int)> row;
    std::function<Index(char, Index, int)> col;

    void add(char eq, Index en, char var, Index vn, const Mat3d& block) const
    {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double v = block(a, b);
                if (v != 0.0) out->emplace_back(row(eq, en, a), col(var, vn, b), v);
            }
    }
    void add_scalar(char eq, Index en, char var, Index vn, double v) const
    {
        if (v == 0.0) return;
        for (int c = 0; c < 3; ++c) out->emplace_back(row(eq, en, c), col(var, vn, c), v);
    }
};

// `curve_share` scales the interface line-tension and dissipation rows of
// this phase; half-and-half reproduces the stand-alone block splitting, the
// preconditioner uses mass-proportional shares instead.
void phase_matrix_entries(const SurfaceOperators& ops, const PhaseParams& params, int i,
                          double dt, const EntrySink& sink, const VecXd* curve_share = nullptr)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const double inv_alpha = 1.0 / params.alpha[i];
    const double alphaG = params.alphaG[i];
    auto share = [&](Index g) { return curve_share ? (*curve_share)[g] : 0.5; };

    // Surface stiffness: -A into the flow rows (column Y), +A into the side
    // rows (column X).
    for (int outer = 0; outer < ops.stiffness[i].outerSize(); ++outer)
        for (SpMat::InnerIterator it(ops.stiffness[i], outer); it; ++it) {
            const Index kl_r = topo.global_to_phase[i][it.row()];
            const Index kl_c = topo.global_to_phase[i][it.col()];
            sink.add_scalar('F', kl_r, 'Y', kl_c, -it.value());
            sink.add_scalar('S', kl_r, 'X', kl_c, it.value());
        }

    for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
        const double mass = ops.mass_phase[i][kl];
        sink.add('F', kl, 'X', kl, (mass / dt) * ops.Q[i].q_star[kl]);
        sink.add('S', kl, 'Y', kl, inv_alpha * mass * (ops.Q[i].q[kl] * ops.Q[i].q[kl]));
    }

    // Interface vertex couplings.
    for (Index g = 0; g < topo.K_gamma(); ++g) {
        const Index k = topo.gamma_vertices[g];
        const Index kl = topo.global_to_phase[i][k];
        const double mg = ops.gamma_mass[g];
        sink.add_scalar('S', kl, 'M', g, -mg);
        sink.add_scalar('E', g, 'Y', kl, mg);
        sink.add_scalar('E', g, 'G', g, alphaG * mg);
        if (params.rho > 0.0)
            sink.add_scalar('F', kl, 'x', g, share(g) * params.rho * mg / dt);
    }

    // Interface curve stiffness couplings into the flow rows.
    for (int outer = 0; outer < ops.gamma_stiffness.outerSize(); ++outer)
        for (SpMat::InnerIterator it(ops.gamma_stiffness, outer); it; ++it) {
            const Index g_r = static_cast<Index>(it.row());
            const Index g_c = static_cast<Index>(it.col());
            const Index kl_r = topo.global_to_phase[i][topo.gamma_vertices[g_r]];
            if (params.line_tension > 0.0)
                sink.add_scalar('F', kl_r, 'x', g_c,
                                share(g_r) * params.line_tension * it.value());
            if (alphaG != 0.0)
                sink.add_scalar('F', kl_r, 'M', g_c, alphaG * it.value());
        }
}

// Curve curvature rows (one copy per assembled operator).
void curve_matrix_entries(const SurfaceOperators& ops, const EntrySink& sink)
{
    const MeshTopology& topo = *ops.mesh->topo;
    for (Index g = 0; g < topo.K_gamma(); ++g)
        sink.add_scalar('C', g, 'G', g, ops.gamma_mass[g]);
    for (int outer = 0; outer < ops.gamma_stiffness.outerSize(); ++outer)
        for (SpMat::InnerIterator it(ops.gamma_stiffness, outer); it; ++it)
            sink.add_scalar('C', static_cast<Index>(it.row()), 'x',
                            static_cast<Index>(it.col()), it.value());
}

MatX3d gamma_positions(const SurfaceOperators& ops)
{
    const MeshTopology& topo = *ops.mesh->topo;
    MatX3d Xg(topo.K_gamma(), 3);
    for (Index g = 0; g < topo.K_gamma(); ++g)
        Xg.row(g) = ops.mesh->vertices.row(topo.gamma_vertices[g]);
    return Xg;
}

// Explicit forcing of the flow equation, phase share, phase-local rows.
VecXd phase_flow_forcing(const SurfaceOperators& ops, const PhaseParams& params,
                         const DiscreteState& state, int i)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const double alpha = params.alpha[i];
    const double kbar = params.kappa_bar[i];
    const double alphaG = params.alphaG[i];

    MatX3d f = MatX3d::Zero(topo.K_phase(i), 3);

    for (Index j = 0; j < topo.J(); ++j) {
        if (topo.tri_phase[j] != i + 1) continue;
        const double a = ops.face_area[j];
        const Vec3d nu = ops.face_normal.row(j);
        const Mat3d& grad = ops.face_grad[j];
        const Mat3d P = Mat3d::Identity() - nu * nu.transpose();

        Index kl[3];
        Vec3d Yk[3], kap[3], Gk[3], PY[3];
        double wk_sum = 0.0, ge_nu = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Index k = topo.triangles(j, c);
            kl[c] = topo.global_to_phase[i][k];
            Yk[c] = state.Y[i].row(kl[c]);
            kap[c] = state.kappa[i].row(kl[c]);
            PY[c] = P * Yk[c];
            const Vec3d omega = ops.normals.omega_phase[i].row(kl[c]);
            Gk[c] = g_operator(Yk[c], kap[c], omega);
            const double one_minus_theta = 1.0 - ops.theta.theta_h[k];
            const Vec3d dev = kap[c] - kbar * nu;
            wk_sum += alpha * dev.squaredNorm() - 2.0 * Yk[c].dot(ops.Q[i].q[kl[c]] * kap[c]);
            ge_nu += one_minus_theta * Gk[c].dot(nu);
        }
        const double divY = Yk[0].dot(grad.col(0)) + Yk[1].dot(grad.col(1)) +
                            Yk[2].dot(grad.col(2));

        for (int l = 0; l < 3; ++l) {
            const Vec3d gl = grad.col(l);
            Vec3d v = a * divY * gl;
            double kap_gl = 0.0, g_gl = 0.0;
            for (int c = 0; c < 3; ++c) {
                const Vec3d gk = grad.col(c);
                v -= a * (gl.dot(PY[c]) * gk + gk.dot(gl) * PY[c]);
                kap_gl += kap[c].dot(gl);
                const Index k = topo.triangles(j, c);
                g_gl += (1.0 - ops.theta.theta_h[k]) * Gk[c].dot(gl);
            }
            v -= (a / 6.0) * wk_sum * gl;
            v -= alpha * kbar * (a / 3.0) * kap_gl * nu;
            v += (a / 3.0) * ge_nu * gl;
            v -= (a / 3.0) * g_gl * nu;
            f.row(kl[l]) += v;
        }
    }

    // Interface curve terms: the Gaussian-rigidity forcing and the line
    // tension contribution evaluated at the old positions.
    if (topo.K_gamma() > 0) {
        MatX3d fc = MatX3d::Zero(topo.K_gamma(), 3);
        if (alphaG != 0.0) {
            for (size_t e = 0; e < topo.gamma_edges.size(); ++e) {
                const auto& ge = topo.gamma_edges[e];
                const double L = ops.edge_length[static_cast<Index>(e)];
                const Vec3d t = ops.edge_tangent.row(static_cast<Index>(e));
                const Mat3d IpP = 2.0 * Mat3d::Identity() - t * t.transpose();
                const Vec3d ma = state.m[i].row(ge.ga), mb = state.m[i].row(ge.gb);
                const Vec3d ka = state.kappa_gamma.row(ge.ga), kb = state.kappa_gamma.row(ge.gb);
                const double s = 0.5 * (ka.dot(ma) + kb.dot(mb));
                const Vec3d v = alphaG * (s * t + IpP * ((mb - ma) / L));
                fc.row(ge.gb) += v;
                fc.row(ge.ga) -= v;
            }
        }
        if (params.line_tension > 0.0) {
            const MatX3d AgXg = ops.gamma_stiffness * gamma_positions(ops);
            fc -= 0.5 * params.line_tension * AgXg;
        }
        for (Index g = 0; g < topo.K_gamma(); ++g)
            f.row(topo.global_to_phase[i][topo.gamma_vertices[g]]) += fc.row(g);
    }

    return flatten(f);
}

VecXd phase_side_rhs(const SurfaceOperators& ops, const PhaseParams& params,
                     const DiscreteState& state, int i)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const MatX3d AX = ops.stiffness[i] * state.X;
    MatX3d r(topo.K_phase(i), 3);
    for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
        const Index k = topo.phase_vertices[i][kl];
        r.row(kl) = -AX.row(k) - params.kappa_bar[i] * ops.mass_phase[i][kl] *
                                     ops.normals.omega_phase[i].row(kl);
    }
    return flatten(r);
}

VecXd phase_vol_vec(const SurfaceOperators& ops, int i)
{
    const MeshTopology& topo = *ops.mesh->topo;
    MatX3d v(topo.K_phase(i), 3);
    for (Index kl = 0; kl < topo.K_phase(i); ++kl)
        v.row(kl) = ops.mass_phase[i][kl] * ops.normals.omega_phase[i].row(kl);
    return flatten(v);
}

} // namespace

namespace {

SpMat phase_block_matrix(const SurfaceOperators& ops, const PhaseParams& params, int i,
                         double dt, const VecXd* curve_share)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const Index Ki = topo.K_phase(i);
    const Index Kg = topo.K_gamma();
    const Index oX = 3 * Ki, oKG = 6 * Ki, oM = 6 * Ki + 3 * Kg;

    std::vector<Triplet> trip;
    EntrySink sink;
    sink.out = &trip;
    sink.row = [&](char eq, Index n, int c) -> Index {
        switch (eq) {
        case 'F': return 3 * n + c;
        case 'S': return oX + 3 * n + c;
        case 'E': return oKG + 3 * n + c;
        case 'C': return oM + 3 * n + c;
        }
        throw std::logic_error("phase block: bad equation code");
    };
    sink.col = [&](char var, Index n, int c) -> Index {
        switch (var) {
        case 'Y': return 3 * n + c;
        case 'X': return oX + 3 * n + c;
        case 'x': return oX + 3 * topo.global_to_phase[i][topo.gamma_vertices[n]] + c;
        case 'G': return oKG + 3 * n + c;
        case 'M': return oM + 3 * n + c;
        }
        throw std::logic_error("phase block: bad variable code");
    };
    phase_matrix_entries(ops, params, i, dt, sink, curve_share);
    curve_matrix_entries(ops, sink);

    SpMat B(oM + 3 * Kg, oM + 3 * Kg);
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

SpMat join_blocks(const SurfaceOperators& ops, const std::array<SpMat, 2>& blocks,
                  const std::array<PhaseBlock, 2>& layout, Index Kg)
{
    const Index n1 = layout[0].size();
    const Index n2 = layout[1].size();
    std::vector<Triplet> ft;
    for (int i = 0; i < 2; ++i) {
        const Index base = (i == 0) ? 0 : n1;
        for (int outer = 0; outer < blocks[i].outerSize(); ++outer)
            for (SpMat::InnerIterator it(blocks[i], outer); it; ++it)
                ft.emplace_back(base + it.row(), base + it.col(), it.value());
        for (Index g = 0; g < Kg; ++g) {
            const double mg = ops.gamma_mass[g];
            for (int c = 0; c < 3; ++c) {
                ft.emplace_back(base + layout[i].oKG() + 3 * g + c, n1 + n2 + 3 * g + c, mg);
                ft.emplace_back(n1 + n2 + 3 * g + c, base + layout[i].oM() + 3 * g + c, mg);
            }
        }
    }
    SpMat full(n1 + n2 + 3 * Kg, n1 + n2 + 3 * Kg);
    full.setFromTriplets(ft.begin(), ft.end());
    return full;
}

} // namespace

PhaseBlock assemble_phase_block(const SurfaceOperators& ops, const PhaseParams& params,
                                const DiscreteState& state, int phase, double dt)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const int i = phase - 1;
    PhaseBlock blk;
    blk.Ki = topo.K_phase(i);
    blk.Kg = topo.K_gamma();
    blk.B = phase_block_matrix(ops, params, i, dt, nullptr);

    blk.g = VecXd::Zero(blk.size());
    blk.g.segment(0, 3 * blk.Ki) = phase_flow_forcing(ops, params, state, i);
    blk.g.segment(blk.oX(), 3 * blk.Ki) = phase_side_rhs(ops, params, state, i);
    if (blk.Kg > 0)
        blk.g.segment(blk.oM(), 3 * blk.Kg) = -flatten(ops.gamma_stiffness * gamma_positions(ops));
    return blk;
}

BlockSystem assemble_coupled_system(const SurfaceOperators& ops, const PhaseParams& params,
                                    const DiscreteState& state, double dt)
{
    const MeshTopology& topo = *ops.mesh->topo;
    BlockSystem sys;
    sys.ops = &ops;
    sys.params = &params;
    sys.dt = dt;
    sys.map = DofMap::build(topo, params.c1);
    const DofMap& map = sys.map;

    std::vector<Triplet> trip;
    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) continue;
        EntrySink sink;
        sink.out = &trip;
        sink.row = [&, i](char eq, Index n, int c) -> Index {
            switch (eq) {
            case 'F': return map.row_flow(topo.phase_vertices[i][n], c);
            case 'S': return map.row_side(i, n, c);
            case 'E': return map.row_e(i, n, c);
            }
            throw std::logic_error("coupled system: bad equation code");
        };
        sink.col = [&, i](char var, Index n, int c) -> Index {
            switch (var) {
            case 'Y': return map.y(i, n, c);
            case 'X': return map.x(topo.phase_vertices[i][n], c);
            case 'x': return map.x(topo.gamma_vertices[n], c);
            case 'G': return map.kg(n, c);
            case 'M': return map.m(i, n, c);
            }
            throw std::logic_error("coupled system: bad variable code");
        };
        phase_matrix_entries(ops, params, i, dt, sink);
    }

    // Curve curvature rows, assembled once.
    {
        EntrySink sink;
        sink.out = &trip;
        sink.row = [&](char, Index n, int c) -> Index { return map.row_c(n, c); };
        sink.col = [&](char var, Index n, int c) -> Index {
            switch (var) {
            case 'G': return map.kg(n, c);
            case 'x': return map.x(topo.gamma_vertices[n], c);
            }
            throw std::logic_error("curve rows: bad variable code");
        };
        curve_matrix_entries(ops, sink);
    }

    if (map.c1) {
        for (Index g = 0; g < map.Kg; ++g) {
            const double mg = ops.gamma_mass[g];
            for (int c = 0; c < 3; ++c) {
                // Junction multiplier column into both junction rows, and the
                // conormal matching rows.
                trip.emplace_back(map.row_e(0, g, c), map.phi(g, c), mg);
                trip.emplace_back(map.row_e(1, g, c), map.phi(g, c), mg);
                trip.emplace_back(map.row_d(g, c), map.m(0, g, c), mg);
                trip.emplace_back(map.row_d(g, c), map.m(1, g, c), mg);
            }
        }
    }

    sys.reduced.resize(map.n, map.n);
    sys.reduced.setFromTriplets(trip.begin(), trip.end());

    sys.flow_forcing = VecXd::Zero(3 * map.K);
    sys.vol_vec = VecXd::Zero(3 * map.K);
    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) {
            sys.flow_forcing_phase[i] = VecXd();
            sys.side_rhs[i] = VecXd();
            sys.vol_vec_phase[i] = VecXd();
            continue;
        }
        sys.flow_forcing_phase[i] = phase_flow_forcing(ops, params, state, i);
        sys.side_rhs[i] = phase_side_rhs(ops, params, state, i);
        sys.vol_vec_phase[i] = phase_vol_vec(ops, i);
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            sys.flow_forcing.segment<3>(3 * k) +=
                sys.flow_forcing_phase[i].segment<3>(3 * kl);
            sys.vol_vec.segment<3>(3 * k) += sys.vol_vec_phase[i].segment<3>(3 * kl);
        }
    }
    sys.curve_rhs = map.Kg > 0 ? VecXd(-flatten(ops.gamma_stiffness * gamma_positions(ops)))
                               : VecXd();

    for (int i = 0; i < 2; ++i)
        if (topo.K_phase(i) > 0)
            sys.phase[i] = assemble_phase_block(ops, params, state, i + 1, dt);

    // Preconditioner blocks with mass-proportional interface shares.
    std::array<VecXd, 2> shares;
    if (map.Kg > 0) {
        for (int i = 0; i < 2; ++i) shares[i] = VecXd::Zero(map.Kg);
        for (Index g = 0; g < map.Kg; ++g) {
            const Index k = topo.gamma_vertices[g];
            const double m0 = ops.mass_phase[0][topo.global_to_phase[0][k]];
            const double m1 = ops.mass_phase[1][topo.global_to_phase[1][k]];
            shares[0][g] = m0 / (m0 + m1);
            shares[1][g] = m1 / (m0 + m1);
        }
    }
    const bool halves_only = params.line_tension == 0.0 && params.rho == 0.0;
    for (int i = 0; i < 2; ++i)
        if (topo.K_phase(i) > 0)
            sys.precond_phase[i] =
                (halves_only || map.Kg == 0)
                    ? sys.phase[i].B
                    : phase_block_matrix(ops, params, i, dt, &shares[i]);

    if (map.c1) {
        std::array<SpMat, 2> halves = {sys.phase[0].B, sys.phase[1].B};
        sys.full_block = join_blocks(ops, halves, sys.phase, map.Kg);
        sys.precond_full = join_blocks(ops, sys.precond_phase, sys.phase, map.Kg);
    }

    return sys;
}

VecXd compose_rhs(const BlockSystem& sys, const Vec3d& lambda, const MatX3d& X_area)
{
    const DofMap& map = sys.map;
    const SurfaceOperators& ops = *sys.ops;
    VecXd r = VecXd::Zero(map.n);

    VecXd flow = sys.flow_forcing - lambda[0] * sys.vol_vec;
    for (int i = 0; i < 2; ++i) {
        if (lambda[1 + i] == 0.0 || ops.mesh->topo->K_phase(i) == 0) continue;
        flow -= lambda[1 + i] * flatten(ops.stiffness[i] * X_area);
    }
    r.segment(map.rFlow, 3 * map.K) = flow;
    for (int i = 0; i < 2; ++i)
        if (sys.side_rhs[i].size() > 0)
            r.segment(map.rSide[i], sys.side_rhs[i].size()) = sys.side_rhs[i];
    if (map.Kg > 0) r.segment(map.rC, 3 * map.Kg) = sys.curve_rhs;
    return r;
}

StepSolution split_solution(const BlockSystem& sys, const VecXd& u)
{
    const DofMap& map = sys.map;
    StepSolution s;
    s.dX = unflatten(u.segment(map.oX, 3 * map.K));
    for (int i = 0; i < 2; ++i)
        s.Y[i] = unflatten(u.segment(map.oY[i], 3 * (i == 0 ? map.K1 : map.K2)));
    s.kappa_gamma = map.Kg > 0 ? MatX3d(unflatten(u.segment(map.oKG, 3 * map.Kg)))
                               : MatX3d(0, 3);
    for (int i = 0; i < 2; ++i)
        s.m[i] = map.Kg > 0 ? MatX3d(unflatten(u.segment(map.oM[i], 3 * map.Kg)))
                            : MatX3d(0, 3);
    s.Phi = map.c1 ? MatX3d(unflatten(u.segment(map.oPhi, 3 * map.Kg)))
                   : MatX3d::Zero(map.Kg, 3);
    return s;
}

} // namespace memflow
