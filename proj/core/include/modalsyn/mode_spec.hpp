#pragma once

// Desired deformation modes on the active DoFs.

#include <span>

#include "modalsyn/types.hpp"

namespace modalsyn {

/// Orthonormal basis of the desired deformation subspace (q x m).
struct DesiredModeSet {
    Matrix phibar;

    Index m() const { return phibar.cols(); }
    Index active_count() const { return phibar.rows(); }
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. Column order is
/// preserved, so the first output column is parallel to the first input.
/// Throws InvalidArgument when the columns are (numerically) dependent.
DesiredModeSet orthonormalize(const Matrix& raw_modes);

/// True when phibar^T phibar equals the identity within `tol`.
bool is_orthonormal(const Matrix& modes, double tol = 1e-10);

/// Two points with (x, y) active each, laid out [x1, y1, x2, y2].
/// Mode 1 moves both points along x, mode 2 moves them vertically in
/// opposite directions.
DesiredModeSet rotation_translation_modes(Index active_count = 4);

/// Rigid translation of a platform of `node_count` nodes with (x, y) active
/// each: mode 1 uniform x, mode 2 uniform y.
DesiredModeSet platform_translation_modes(Index node_count);

/// Shape functions over the normalized contour parameter t in [0, 1].
struct ContourShapes {
    double sine_periods = 1.0;  ///< transverse sin(2 pi periods t)
    double sine_phase = 0.0;    ///< [rad]
    /// Transverse parabola 4 t (1 - t); the vertex sits at t = 0.5.
    bool parabola_vanishes_at_ends = true;

    friend bool operator==(const ContourShapes&, const ContourShapes&) = default;
};

/// Raw (un-orthonormalized) contour modes in generator order: parabola,
/// sine, tangential translation. Nodes are ordered along the contour and
/// carry (x, y) active DoFs each. Throws on fewer than 4 nodes.
Matrix raw_contour_modes(std::span<const Point2> contour, const ContourShapes& shapes = {});

/// raw_contour_modes followed by Gram-Schmidt in the same order.
DesiredModeSet contour_modes(std::span<const Point2> contour, const ContourShapes& shapes = {});

}  // namespace modalsyn
