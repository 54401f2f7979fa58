#include <sstream>

#include <gtest/gtest.h>

#include "modalsyn/base_solver.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/lp_update.hpp"
#include "modalsyn/simplex.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace modalsyn {
namespace {

using test::Rng;

using test::enumerate_vertices;
using test::random_lp;

TEST(Simplex, TrivialBoxedInstance) {
    LinearProgram lp;
    lp.objective = Vector::Ones(2);
    lp.a_ineq = Matrix::Ones(1, 2);
    lp.b_ineq = Vector::Ones(1);
    lp.a_eq.resize(0, 2);
    lp.b_eq.resize(0);
    lp.lower = Vector::Zero(2);
    lp.upper = Vector::Ones(2);
    const auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_NEAR(sol.objective, 1.0, 1e-12);
}

TEST(Simplex, MatchesVertexEnumerationOnSmallInstances) {
    Rng rng(1);
    int feasible = 0, infeasible = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const LinearProgram lp = random_lp(rng);
        const auto ref = enumerate_vertices(lp);
        const auto sol = solve_lp(lp);
        if (!ref.feasible) {
            ++infeasible;
            EXPECT_EQ(sol.status, LpStatus::infeasible) << "trial " << trial;
            continue;
        }
        ++feasible;
        ASSERT_EQ(sol.status, LpStatus::optimal) << "trial " << trial;
        EXPECT_NEAR(sol.objective, ref.objective, 1e-9 * std::max(1.0, std::abs(ref.objective))) << "trial " << trial;
        EXPECT_NEAR(sol.objective, lp.objective.dot(sol.x), 1e-12 * std::max(1.0, std::abs(sol.objective)));
        EXPECT_LE(max_violation(lp, sol.x), 1e-8) << "trial " << trial;
    }
    EXPECT_GT(feasible, 500);
    EXPECT_GT(infeasible, 50);
}

TEST(Simplex, ContradictoryRowsAreInfeasible) {
    LinearProgram lp;
    lp.objective = Vector::Ones(1);
    lp.a_ineq = Matrix(2, 1);
    lp.a_ineq << 1, -1;
    lp.b_ineq = Vector{{0.2, -0.5}};
    lp.a_eq.resize(0, 1);
    lp.b_eq.resize(0);
    lp.lower = Vector::Zero(1);
    lp.upper = Vector::Ones(1);
    EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);

    const auto elastic = solve_lp(restoration_program(lp));
    ASSERT_EQ(elastic.status, LpStatus::optimal);
    EXPECT_GT(weighted_row_violation(lp, elastic.x.head(1)), 0.29);
}

TEST(Simplex, ValidateRejectsInconsistentInput) {
    LinearProgram lp;
    lp.objective = Vector::Ones(2);
    lp.a_ineq = Matrix::Ones(1, 3);
    lp.b_ineq = Vector::Ones(1);
    lp.a_eq.resize(0, 2);
    lp.b_eq.resize(0);
    lp.lower = Vector::Zero(2);
    lp.upper = Vector::Ones(2);
    EXPECT_THROW(lp.validate(), InvalidArgument);
    lp.a_ineq = Matrix::Ones(1, 2);
    lp.lower[0] = 2.0;
    EXPECT_THROW(lp.validate(), InvalidArgument);
}

TEST(Simplex, LargeBoxedInstanceReturnsAFeasibleOptimum) {
    // Shape of the design update: few rows, many boxed columns.
    Rng rng(2);
    const Index n = 400;
    LinearProgram lp;
    lp.objective = rng.vector(n, 0, 1);
    lp.a_ineq = rng.matrix(5, n).cwiseAbs();
    lp.b_ineq = Vector::Constant(5, 0.3 * n * 0.25);
    lp.a_eq = rng.matrix(1, n);
    lp.b_eq = Vector::Zero(1);
    lp.eq_band = 1e-6;
    lp.lower = Vector::Zero(n);
    lp.upper = Vector::Ones(n);
    const auto sol = solve_lp(lp);
    ASSERT_EQ(sol.status, LpStatus::optimal);
    EXPECT_LE(max_violation(lp, sol.x), 1e-8);
}

TEST(Simplex, WritesCplexText) {
    LinearProgram lp;
    lp.objective = Vector{{1, 2}};
    lp.a_ineq = Matrix::Ones(1, 2);
    lp.b_ineq = Vector::Ones(1);
    lp.a_eq = Matrix::Ones(1, 2);
    lp.b_eq = Vector::Zero(1);
    lp.lower = Vector::Zero(2);
    lp.upper = Vector::Ones(2);
    std::ostringstream out;
    write_cplex_lp(out, lp);
    EXPECT_NE(out.str().find("Maximize"), std::string::npos);
    EXPECT_NE(out.str().find("Bounds"), std::string::npos);
}

TEST(MoveLimits, Examples) {
    auto b = update_move_limits(Vector::Constant(1, 0.5), 0.001, 1e-8, 1.0);
    EXPECT_NEAR(b.lower[0], 0.499, 1e-15);
    EXPECT_NEAR(b.upper[0], 0.501, 1e-15);
    b = update_move_limits(Vector::Constant(1, 1e-8), 0.001, 1e-8, 1.0);
    EXPECT_EQ(b.lower[0], 1e-8);
    b = update_move_limits(Vector::Constant(1, 1.0), 0.001, 1e-8, 1.0);
    EXPECT_EQ(b.upper[0], 1.0);
    EXPECT_THROW(update_move_limits(Vector::Ones(1), 0.0, 1e-8, 1.0), InvalidArgument);
}

// One horizontal beam, root clamped; tip (x, y) active and the axial mode desired.
struct SingleBeam {
    GroundStructure ground;
    CondensedSystem system;
    OrthonormalBase base;
};

SingleBeam single_beam() {
    auto layout = build_grid(10, 0, 10, 1);
    std::vector<Index> root{layout.grid.node_at(0, 0)};
    GroundStructure g(layout.grid, layout.elements, {test::kSection}, clamp_nodes(root));
    const Index tip = layout.grid.node_at(1, 0);
    const auto act = test::xy_dofs(g, {tip});
    auto system = condense(assemble(g, Vector::Ones(1)), DofPartition(g.dof_count(), act));
    auto base = expand_base(solve_constrained_base(system.kbar, Matrix::Identity(2, 1)), system);
    return {std::move(g), std::move(system), std::move(base)};
}

TEST(BuildLp, SingleElementReducesToTheSmallestCap) {
    const auto s = single_beam();
    const double ea = test::kSection.elastic_modulus * test::kSection.area / 10.0;
    const double bend = 3 * test::kSection.elastic_modulus * test::kSection.second_moment / 1000.0;
    struct Case {
        double mu, volume, expected;
    };
    for (const auto& c : {Case{0.4 * ea, 1.0, 0.4}, Case{2 * ea, 0.3, 0.3}, Case{2 * ea, 5.0, 1.0}}) {
        LpSettings settings{c.mu, c.volume, 1e-8, 1.0, 10.0, 0, 0.0};
        LpLayout layout;
        const auto lp = build_lp(s.ground, s.base, settings, Vector::Constant(1, 0.1), &layout);
        EXPECT_EQ(layout.caps, 1);
        EXPECT_EQ(layout.guards, 0);
        EXPECT_EQ(layout.orthogonality, 0);
        EXPECT_NEAR(lp.objective[0], bend, 1e-9 * bend);
        EXPECT_NEAR(lp.a_ineq(0, 0), ea, 1e-9 * ea);
        const auto sol = solve_lp(lp);
        ASSERT_EQ(sol.status, LpStatus::optimal);
        EXPECT_NEAR(sol.x[0], c.expected, 1e-12);
    }
}

TEST(BuildLp, CoefficientsMatchQuadraticFormsRecomputedFromScratch) {
    GroundStructure g = test::clamped_grid(3, 3);
    const auto& grid = g.grid();
    const auto act = test::xy_dofs(g, {grid.node_at(0, 2), grid.node_at(2, 2), grid.node_at(1, 1)});
    DofPartition dofs(g.dof_count(), act);
    Rng rng(3);
    const Vector x = rng.vector(g.element_count(), 0.05, 1.0);
    const auto system = condense(assemble(g, x), dofs);
    const Matrix phibar = rng.orthogonal(6).leftCols(3);
    const auto base = expand_base(solve_constrained_base(system.kbar, phibar), system);
    const LpSettings settings{500.0, 10.0, 1e-8, 1.0, 0.01, 3, 1e-6};
    LpLayout layout;
    const auto lp = build_lp(g, base, settings, x, &layout);
    ASSERT_EQ(layout.caps, 3);
    ASSERT_EQ(layout.guards, 2);
    ASSERT_EQ(layout.orthogonality, 3);
    EXPECT_EQ(lp.b_ineq[layout.volume_row], 10.0);
    EXPECT_EQ(lp.eq_band, 1e-6);
    const Matrix& phi = base.expanded_desired;
    const Matrix& psi = base.expanded_undesired;
    for (Index e = 0; e < g.element_count(); ++e) {
        const Matrix ke = test::dense(assemble(g, Vector(Vector::Unit(g.element_count(), e))));
        const double tol = 1e-10 * ke.norm();
        EXPECT_NEAR(lp.objective[e], psi.col(0).dot(ke * psi.col(0)), tol);
        for (Index i = 0; i < 3; ++i) EXPECT_NEAR(lp.a_ineq(i, e), phi.col(i).dot(ke * phi.col(i)), tol);
        for (Index k = 1; k < 3; ++k) {
            EXPECT_NEAR(lp.a_ineq(3 + k - 1, e), psi.col(0).dot(ke * psi.col(0)) - psi.col(k).dot(ke * psi.col(k)), tol);
        }
        EXPECT_EQ(lp.a_ineq(layout.volume_row, e), 1.0);
        EXPECT_NEAR(lp.a_eq(0, e), phi.col(0).dot(ke * phi.col(1)), tol);
        EXPECT_NEAR(lp.a_eq(1, e), phi.col(0).dot(ke * phi.col(2)), tol);
        EXPECT_NEAR(lp.a_eq(2, e), phi.col(1).dot(ke * phi.col(2)), tol);
        EXPECT_GE(lp.objective[e], 0.0);
        EXPECT_NEAR(lp.lower[e], std::max(1e-8, x[e] - 0.01), 1e-15);
        EXPECT_NEAR(lp.upper[e], std::min(1.0, x[e] + 0.01), 1e-15);
    }
    const auto sol = solve_lp(lp);
    if (sol.status == LpStatus::optimal) {
        EXPECT_LE((sol.x - x).cwiseAbs().maxCoeff(), 0.01 + 1e-15);
        EXPECT_LE(max_violation(lp, sol.x), 1e-8);
    }
}

TEST(BuildLp, QuadraticFormsAreLinearInTheDesign) {
    GroundStructure g = test::clamped_grid(5, 4);
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = rng.vector(g.element_count(), 1e-8, 1.0);
        const Vector v = rng.vector(g.dof_count());
        const Matrix k = test::dense(assemble(g, x));
        const double direct = v.dot(k * v);
        const double summed = g.element_quadratic_forms(v).dot(x);
        EXPECT_NEAR(summed, direct, 1e-10 * std::abs(direct));
    }
}

TEST(BuildLp, RejectsBadGuardCountsAndUnexpandedBases) {
    const auto s = single_beam();
    LpSettings settings{1.0, 1.0, 1e-8, 1.0, 0.1, 2, 0.0};
    EXPECT_THROW(build_lp(s.ground, s.base, settings, Vector::Constant(1, 0.5)), InvalidArgument);
    settings.n_guard = 0;
    const auto bare = solve_constrained_base(s.system.kbar, Matrix::Identity(2, 1));
    EXPECT_THROW(build_lp(s.ground, bare, settings, Vector::Constant(1, 0.5)), InvalidArgument);
}

}  // namespace
}  // namespace modalsyn
