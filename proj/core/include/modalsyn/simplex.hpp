#pragma once

// Dense bounded-variable revised simplex for LPs with few rows and many
// boxed columns, the shape of the design-update problem.

#include <iosfwd>
#include <string_view>

#include "modalsyn/types.hpp"

namespace modalsyn {

/// maximize c^T x  s.t.  A x <= b,  |A_eq x - b_eq| <= eq_band,  l <= x <= u
struct LinearProgram {
    Vector objective;
    Matrix a_ineq;
    Vector b_ineq;
    Matrix a_eq;
    Vector b_eq;
    double eq_band = 0.0;
    Vector lower;
    Vector upper;

    Index variables() const { return objective.size(); }
    /// Throws InvalidArgument on inconsistent shapes or lower > upper.
    void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    Vector x;
    double objective = 0.0;
    int iterations = 0;
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;   ///< on row-scaled constraints
    double optimality_tol = 1e-9;    ///< on scaled reduced costs
    int refactor_interval = 50;
    int degenerate_before_bland = 30;  ///< consecutive degenerate pivots
    int max_iterations = 0;            ///< 0 selects 20 * (rows + columns)
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

/// Largest violation of rows and bounds, each row measured relative to
/// max(1, |b_i|).
double max_violation(const LinearProgram& lp, const Vector& x);

/// Sum of row violations weighted by the inverse row infinity norm. Bounds
/// are not included.
double weighted_row_violation(const LinearProgram& lp, const Vector& x);

/// Elastic companion of `lp`: same bounds, every general row gets a
/// nonnegative slack that absorbs violation, and the objective minimizes the
/// weighted slack sum. Always feasible when the bounds are.
LinearProgram restoration_program(const LinearProgram& lp);

/// CPLEX LP text format, for cross-checking with external solvers.
void write_cplex_lp(std::ostream& out, const LinearProgram& lp);

}  // namespace modalsyn
