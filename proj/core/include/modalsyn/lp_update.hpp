#pragma once

// Design-variable update: the linear program in x that raises the
// secondary stiffness under primary-stiffness caps.

#include "modalsyn/base_solver.hpp"
#include "modalsyn/frame_model.hpp"
#include "modalsyn/simplex.hpp"

namespace modalsyn {

struct Bounds {
    Vector lower;
    Vector upper;
};

/// lower = max(x_lower, x - nu), upper = min(x_upper, x + nu).
Bounds update_move_limits(const Vector& x, double nu, double x_lower, double x_upper);

struct LpSettings {
    double mu = 0.0;        ///< cap on every primary stiffness
    double volume = 0.0;    ///< V, budget on sum(x)
    double x_lower = 1e-8;
    double x_upper = 1.0;
    double nu = 1e-3;       ///< move limit
    Index n_guard = 0;      ///< stabilizing undesired modes; 0 selects q - m
    double eq_band = 0.0;   ///< |phi_i^T K phi_j| <= eq_band for i != j
};

/// Row layout of the program returned by build_lp.
struct LpLayout {
    Index caps = 0;    ///< m rows phi_i^T K phi_i <= mu
    Index guards = 0;  ///< n_guard - 1 rows psi_1^T K psi_1 - psi_k^T K psi_k <= 0
    Index volume_row = 0;
    Index orthogonality = 0;  ///< C(m, 2) equality rows
};

/// Requires an expanded base. Throws InvalidArgument on an empty bound
/// interval or an n_guard outside [1, q - m].
LinearProgram build_lp(const GroundStructure& ground, const OrthonormalBase& base, const LpSettings& settings,
                       const Vector& x_current, LpLayout* layout = nullptr);

}  // namespace modalsyn
