#pragma once

// Eigen-analysis of the condensed stiffness matrix: kinematic/parasitic split,
// primary and secondary stiffnesses, selectivity.

#include "modalsyn/types.hpp"

namespace modalsyn {

struct ModalResult {
    Vector eigenvalues;  ///< ascending
    Matrix eigenmodes;   ///< unit-norm columns, largest-magnitude entry positive
    Index m = 0;         ///< pseudo-mobility used for the split

    Index size() const { return eigenvalues.size(); }
    /// First m eigenmodes.
    Matrix kinematic() const { return eigenmodes.leftCols(m); }
    /// Remaining q - m eigenmodes.
    Matrix parasitic() const { return eigenmodes.rightCols(eigenmodes.cols() - m); }
};

struct StiffnessSummary {
    Vector primary;          ///< lambda_1 .. lambda_m
    double secondary = 0.0;  ///< lambda_{m+1}
    double selectivity = 0.0;
};

struct ModalCoordinates {
    Vector alpha;
    double residual = 0.0;
};

/// Full symmetric eigendecomposition. Throws InvalidArgument when `kbar` is
/// not square or not symmetric to 1e-10 relative.
ModalResult eigen(const Matrix& kbar, Index m = 0);

/// Flip each column so its largest-magnitude entry is positive.
void fix_signs(Matrix& modes);

/// Throws InvalidArgument when m is not in [1, q).
StiffnessSummary summarize(const ModalResult& modal, Index m);

/// Projection of a deformation onto the first m kinematic eigenmodes.
ModalCoordinates modal_coordinates(const ModalResult& modal, const Vector& u);

}  // namespace modalsyn
