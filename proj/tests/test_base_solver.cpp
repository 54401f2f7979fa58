#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "modalsyn/base_solver.hpp"
#include "modalsyn/errors.hpp"
#include "modalsyn/spectra.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace modalsyn {
namespace {

using test::Rng;
using test::svd_null_space;

double quotient(const Matrix& k, const Vector& v) { return v.dot(k * v) / v.squaredNorm(); }

// Minimum of v^T K v over unit v in span(Z), Z with three columns, by a
// latitude/longitude grid refined around the best cell.
double sphere_search(const Matrix& k, const Matrix& z) {
    double best = std::numeric_limits<double>::infinity();
    double t0 = 0, t1 = std::numbers::pi, p0 = 0, p1 = 2 * std::numbers::pi;
    for (int level = 0; level < 6; ++level) {
        const int n = 120;
        double bt = 0, bp = 0;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const double t = t0 + (t1 - t0) * i / n, p = p0 + (p1 - p0) * j / n;
                const Eigen::Vector3d y(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
                const double q = quotient(k, z * y);
                if (q < best) {
                    best = q;
                    bt = t;
                    bp = p;
                }
            }
        }
        const double ht = 4 * (t1 - t0) / n, hp = 4 * (p1 - p0) / n;
        t0 = bt - ht;
        t1 = bt + ht;
        p0 = bp - hp;
        p1 = bp + hp;
    }
    return best;
}

void expect_constraints(const Matrix& kbar, const OrthonormalBase& base, double tol) {
    const Index q = kbar.rows(), m = base.m();
    const Matrix& phi = base.desired;
    const Matrix& psi = base.undesired;
    ASSERT_EQ(psi.cols(), q - m);
    const double scale = kbar.norm();
    // Unit length and mutual orthogonality.
    EXPECT_LE((psi.transpose() * psi - Matrix::Identity(q - m, q - m)).cwiseAbs().maxCoeff(), tol);
    // K-orthogonal to every desired mode.
    EXPECT_LE((psi.transpose() * kbar * phi).cwiseAbs().maxCoeff(), tol * scale);
    // K-orthogonal to each other.
    Matrix kk = psi.transpose() * kbar * psi;
    for (Index j = 0; j < q - m; ++j) EXPECT_NEAR(kk(j, j), base.quotients[j], tol * scale);
    kk.diagonal().setZero();
    EXPECT_LE(kk.cwiseAbs().maxCoeff(), tol * scale);
    for (Index j = 1; j < q - m; ++j) EXPECT_LE(base.quotients[j - 1], base.quotients[j]);
}

TEST(ConstrainedBase, NoDesiredModesGivesTheEigenmodes) {
    Rng rng(1);
    const Matrix k = rng.spd(5);
    const auto base = solve_constrained_base(k, Matrix(5, 0));
    const auto modal = eigen(k);
    EXPECT_LE((base.quotients - modal.eigenvalues).norm(), 1e-10);
    for (Index j = 0; j < 5; ++j) {
        EXPECT_NEAR(std::abs(base.undesired.col(j).dot(modal.eigenmodes.col(j))), 1.0, 1e-10);
    }
}

TEST(ConstrainedBase, DiagonalCaseDropsTheConstrainedDirection) {
    Matrix k = Matrix::Zero(3, 3);
    k.diagonal() << 1, 2, 3;
    const auto base = solve_constrained_base(k, Matrix::Identity(3, 1));
    EXPECT_NEAR(base.quotients[0], 2, 1e-14);
    EXPECT_NEAR(base.quotients[1], 3, 1e-14);
    EXPECT_NEAR(std::abs(base.undesired(1, 0)), 1, 1e-14);
    EXPECT_NEAR(std::abs(base.undesired(2, 1)), 1, 1e-14);
}

TEST(ConstrainedBase, SatisfiesAllConstraints) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Index q = rng.integer(3, 12), m = rng.integer(1, static_cast<int>(q) - 1);
        const Matrix k = rng.spd(q, 1, 1e4);
        const Matrix phi = rng.orthogonal(q).leftCols(m);
        expect_constraints(k, solve_constrained_base(k, phi), 1e-10);
    }
}

TEST(ConstrainedBase, FirstQuotientMatchesBruteForceOnTheConstrainedSphere) {
    Rng rng(3);
    const Matrix k = rng.spd(5, 1, 10);
    const Matrix phi = rng.orthogonal(5).leftCols(2);
    const auto base = solve_constrained_base(k, phi);
    const double brute = sphere_search(k, svd_null_space(Matrix(k * phi)));
    EXPECT_NEAR(base.quotients[0], brute, 1e-4 * brute);
    EXPECT_LE(base.quotients[0], brute + 1e-12);
}

TEST(ConstrainedBase, FirstQuotientBeatsRandomFeasibleVectors) {
    Rng rng(4);
    const Matrix k = rng.spd(8, 1, 100);
    const Matrix phi = rng.orthogonal(8).leftCols(3);
    const auto base = solve_constrained_base(k, phi);
    const Matrix z = svd_null_space(Matrix(k * phi));
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector v = z * rng.vector(z.cols());
        EXPECT_GE(quotient(k, v), base.quotients[0] * (1 - 1e-12));
    }
}

TEST(ConstrainedBase, RejectsBadShapes) {
    Rng rng(5);
    const Matrix k = rng.spd(4);
    EXPECT_THROW(solve_constrained_base(k, Matrix::Identity(3, 1)), InvalidArgument);
    Matrix dependent(4, 2);
    dependent.col(0) = Vector::Unit(4, 0);
    dependent.col(1) = Vector::Unit(4, 0);
    EXPECT_THROW(solve_constrained_base(k, dependent), InvalidArgument);
}

class ExpandedBase : public ::testing::Test {
protected:
    void SetUp() override {
        ground = std::make_unique<GroundStructure>(test::clamped_grid(4, 4));
        const auto& grid = ground->grid();
        const auto act = test::xy_dofs(*ground, {grid.node_at(0, 3), grid.node_at(3, 3), grid.node_at(1, 2)});
        dofs = DofPartition(ground->dof_count(), act);
        Rng rng(6);
        x = rng.vector(ground->element_count(), 1e-3, 1.0);
        k = test::dense(assemble(*ground, x));
        system = condense(assemble(*ground, x), dofs);
        phibar = rng.orthogonal(6).leftCols(2);
    }
    std::unique_ptr<GroundStructure> ground;
    DofPartition dofs;
    Vector x;
    Matrix k;
    CondensedSystem system;
    Matrix phibar;
};

TEST_F(ExpandedBase, FullQuadraticFormsEqualCondensedOnes) {
    const auto base = expand_base(solve_constrained_base(system.kbar, phibar), system);
    ASSERT_TRUE(base.expanded());
    const Matrix& phi = base.expanded_desired;
    const Matrix& psi = base.expanded_undesired;
    const Matrix full_phi = phi.transpose() * k * phi, red_phi = phibar.transpose() * system.kbar * phibar;
    EXPECT_LE((full_phi - red_phi).cwiseAbs().maxCoeff(), 1e-9 * red_phi.cwiseAbs().maxCoeff());
    for (Index j = 0; j < psi.cols(); ++j) {
        const double full = psi.col(j).dot(k * psi.col(j));
        EXPECT_NEAR(full, base.quotients[j], 1e-9 * base.quotients[j]);
    }
}

TEST(ExpandBase, NoPassiveDofsLeavesVectorsUnchanged) {
    Rng rng(7);
    const Matrix k = rng.spd(4);
    const std::vector<Index> act{0, 1, 2, 3};
    const auto sys = condense(Matrix(k).sparseView(), DofPartition(4, act));
    const auto base = expand_base(solve_constrained_base(k, Matrix::Identity(4, 1)), sys);
    EXPECT_LE((base.expanded_desired - base.desired).norm(), 1e-15);
    EXPECT_LE((base.expanded_undesired - base.undesired).norm(), 1e-15);
}

}  // namespace
}  // namespace modalsyn
