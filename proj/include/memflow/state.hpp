#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "memflow/types.hpp"

namespace memflow {

enum class ConserveMode { None, Volume, Area, VolumeArea };
enum class MultiplierMode { Explicit, Implicit };

std::string to_string(ConserveMode m);
std::string to_string(MultiplierMode m);
ConserveMode conserve_from_string(const std::string& s);
MultiplierMode multiplier_from_string(const std::string& s);

/// All physical and numerical constants of a run.
struct PhaseParams {
    std::array<double, 2> alpha{1.0, 1.0};      ///< bending rigidities, > 0
    std::array<double, 2> kappa_bar{0.0, 0.0};  ///< spontaneous curvatures
    std::array<double, 2> alphaG{0.0, 0.0};     ///< Gaussian bending rigidities
    double line_tension = 0.0;                  ///< energy per interface length, >= 0
    double rho = 0.0;                           ///< interface dissipation weight, >= 0
    double theta = 0.0;                         ///< in [0,1]
    bool c1 = false;                            ///< junction: false C0, true C1
    double dt = 1e-3;
    ConserveMode conserve = ConserveMode::None;
    MultiplierMode multiplier_mode = MultiplierMode::Implicit;
    double fixedpoint_tol = 1e-8;
    int fixedpoint_maxit = 100;

    void check() const
    {
        if (!(alpha[0] > 0.0) || !(alpha[1] > 0.0))
            throw std::invalid_argument("params: alpha must be positive");
        if (line_tension < 0.0 || rho < 0.0)
            throw std::invalid_argument("params: line_tension and rho must be >= 0");
        if (theta < 0.0 || theta > 1.0)
            throw std::invalid_argument("params: theta outside [0,1]");
        if (!(dt > 0.0)) throw std::invalid_argument("params: dt must be positive");
        if (!(fixedpoint_tol > 0.0))
            throw std::invalid_argument("params: fixedpoint_tol must be positive");
    }
};

/// All nodal unknowns at one time level. Vector fields are stored row-wise:
/// Y[i] and kappa[i] over the phase-i vertex list, the interface fields over
/// the gamma vertex list.
struct DiscreteState {
    MatX3d X;                      ///< vertex positions (K x 3)
    std::array<MatX3d, 2> Y;       ///< side-constraint multiplier per phase
    std::array<MatX3d, 2> kappa;   ///< nodal curvature vectors per phase
    std::array<MatX3d, 2> m;       ///< weak conormals on gamma
    MatX3d kappa_gamma;            ///< curve curvature vectors on gamma
    MatX3d Phi;                    ///< C1 coupling multiplier on gamma
    Vec3d lambda = Vec3d::Zero();  ///< (lambda^V, lambda^A_1, lambda^A_2)
    MatX3d velocity_prev;          ///< (X^m - X^{m-1})/dt, zero at the first step
    double time = 0.0;
    int step = 0;

    bool finite() const;
};

/// One row of the diagnostics log.
struct DiagnosticsRecord {
    int step = 0;
    double time = 0.0;
    double energy = 0.0;
    double area1 = 0.0, area2 = 0.0;
    double gamma_length = 0.0;
    double volume = 0.0;
    double lambdaV = 0.0, lambdaA1 = 0.0, lambdaA2 = 0.0;
    int krylov_iters = 0;
    int fp_passes = 0;
};

} // namespace memflow
