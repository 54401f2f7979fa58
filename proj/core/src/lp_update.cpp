#include "modalsyn/lp_update.hpp"

#include <algorithm>
#include <string>

#include "modalsyn/errors.hpp"

namespace modalsyn {

Bounds update_move_limits(const Vector& x, double nu, double x_lower, double x_upper) {
    if (!(nu > 0.0)) throw InvalidArgument("move limit nu must be positive");
    Bounds out;
    out.lower = (x.array() - nu).max(x_lower).matrix();
    out.upper = (x.array() + nu).min(x_upper).matrix();
    return out;
}

LinearProgram build_lp(const GroundStructure& ground, const OrthonormalBase& base, const LpSettings& settings,
                       const Vector& x_current, LpLayout* layout) {
    const Index r = ground.element_count();
    const Index m = base.m();
    const Index n_undesired = base.undesired.cols();
    if (!base.expanded()) throw InvalidArgument("build_lp: orthonormal base is not expanded");
    if (x_current.size() != r) throw InvalidArgument("build_lp: design vector length differs from element count");
    if (n_undesired < 1) throw InvalidArgument("build_lp: no undesired mode available for the objective");
    const Index n_guard = settings.n_guard == 0 ? n_undesired : settings.n_guard;
    if (n_guard < 1 || n_guard > n_undesired) {
        throw InvalidArgument("build_lp: n_guard must lie in [1, " + std::to_string(n_undesired) + "]");
    }

    const Index n_eq = m * (m - 1) / 2;
    const Index n_ineq = m + (n_guard - 1) + 1;

    LinearProgram lp;
    const Vector psi1 = base.expanded_undesired.col(0);
    const Vector psi1_forms = ground.element_quadratic_forms(psi1);
    lp.objective = psi1_forms;

    lp.a_ineq.resize(n_ineq, r);
    lp.b_ineq.resize(n_ineq);
    Index row = 0;
    for (Index i = 0; i < m; ++i, ++row) {
        lp.a_ineq.row(row) = ground.element_quadratic_forms(base.expanded_desired.col(i)).transpose();
        lp.b_ineq[row] = settings.mu;
    }
    for (Index k = 1; k < n_guard; ++k, ++row) {
        lp.a_ineq.row(row) =
            (psi1_forms - ground.element_quadratic_forms(base.expanded_undesired.col(k))).transpose();
        lp.b_ineq[row] = 0.0;
    }
    const Index volume_row = row;
    lp.a_ineq.row(row).setOnes();
    lp.b_ineq[row] = settings.volume;

    lp.a_eq.resize(n_eq, r);
    lp.b_eq = Vector::Zero(n_eq);
    row = 0;
    for (Index i = 0; i < m; ++i) {
        for (Index j = i + 1; j < m; ++j, ++row) {
            lp.a_eq.row(row) =
                ground.element_bilinear_forms(base.expanded_desired.col(i), base.expanded_desired.col(j)).transpose();
        }
    }
    lp.eq_band = settings.eq_band;

    Bounds b = update_move_limits(x_current, settings.nu, settings.x_lower, settings.x_upper);
    for (Index j = 0; j < r; ++j) {
        if (b.lower[j] > b.upper[j]) {
            throw InvalidArgument("build_lp: empty bound interval for variable " + std::to_string(j));
        }
    }
    lp.lower = std::move(b.lower);
    lp.upper = std::move(b.upper);

    if (layout != nullptr) {
        layout->caps = m;
        layout->guards = n_guard - 1;
        layout->volume_row = volume_row;
        layout->orthogonality = n_eq;
    }
    return lp;
}

}  // namespace modalsyn
