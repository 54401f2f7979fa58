#pragma once

// Shared fixtures for the unit tests: seeded random matrices and a few
// small ground structures with known structure.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "modalsyn/frame_model.hpp"
#include "modalsyn/mode_spec.hpp"
#include "modalsyn/reduction.hpp"
#include "modalsyn/synthesis.hpp"

namespace modalsyn::test {

inline const SectionProperties kSection{20.0, 210000.0, 6.66};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    Vector vector(Index n, double lo = -1.0, double hi = 1.0) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }
    Matrix matrix(Index rows, Index cols) {
        Matrix a(rows, cols);
        for (Index j = 0; j < cols; ++j) a.col(j) = vector(rows);
        return a;
    }
    /// Random orthogonal matrix from the QR of a Gaussian matrix.
    Matrix orthogonal(Index n) {
        Matrix a(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) a(i, j) = normal();
        Eigen::HouseholderQR<Matrix> qr(a);
        return qr.householderQ() * Matrix::Identity(n, n);
    }
    /// Symmetric positive definite with eigenvalues in [lo, hi].
    Matrix spd(Index n, double lo = 1.0, double hi = 10.0) {
        const Matrix q = orthogonal(n);
        const Vector d = vector(n, lo, hi);
        return q * d.asDiagonal() * q.transpose();
    }

private:
    std::mt19937_64 engine_;
};

/// Rectangular lattice clamped along its bottom row.
inline GroundStructure clamped_grid(int columns, int rows, double pitch = 10.0) {
    auto layout = build_grid((columns - 1) * pitch, (rows - 1) * pitch, pitch, 1);
    std::vector<Index> bottom;
    for (int c = 0; c < columns; ++c) bottom.push_back(layout.grid.node_at(c, 0));
    return GroundStructure(layout.grid, layout.elements, {kSection}, clamp_nodes(bottom));
}

/// (x, y) free-DoF indices of the listed nodes, node-major.
inline std::vector<Index> xy_dofs(const GroundStructure& g, const std::vector<Index>& nodes) {
    std::vector<Index> out;
    for (Index n : nodes) {
        out.push_back(g.free_dof(n, NodeDof::x));
        out.push_back(g.free_dof(n, NodeDof::y));
    }
    return out;
}

/// Example-1 layout: 13 x 17 nodes at pitch 10, bottom clamped, two top
/// points carrying the rotation/translation modes.
inline SynthesisProblem example1_problem() {
    GroundStructure g = clamped_grid(13, 17);
    const auto& grid = g.grid();
    const auto act = xy_dofs(g, {grid.node_at(2, 16), grid.node_at(10, 16)});
    DofPartition dofs(g.dof_count(), act);
    return SynthesisProblem{std::move(g), std::move(dofs), rotation_translation_modes()};
}

/// Example-1 settings that reach the targets within a few hundred steps.
inline SynthesisConfig example1_config(double mu) {
    SynthesisConfig c;
    c.mu = mu;
    c.volume = 636.8;
    c.seed = 7;
    c.nu = 0.02;
    c.nu_schedule = NuSchedule::geometric;
    c.nu_decay = 0.998;
    c.nu_min = 0.001;
    return c;
}

/// Dense copy of a sparse matrix.
inline Matrix dense(const SparseMatrix& k) { return Matrix(k); }

}  // namespace modalsyn::test
