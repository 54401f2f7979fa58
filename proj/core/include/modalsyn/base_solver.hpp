#pragma once

// Variable part of the orthonormal base: undesired modes that minimize the
// quadratic form of K_bar while staying K_bar-orthogonal to the desired
// modes and to each other.

#include "modalsyn/reduction.hpp"
#include "modalsyn/types.hpp"

namespace modalsyn {

struct OrthonormalBase {
    Matrix desired;    ///< phibar, q x m
    Matrix undesired;  ///< psibar, q x (q - m), Rayleigh quotients ascending
    Vector quotients;  ///< psibar_j^T K_bar psibar_j
    Matrix expanded_desired;    ///< phi on all structural DoFs (p x m)
    Matrix expanded_undesired;  ///< psi on all structural DoFs (p x (q - m))

    Index m() const { return desired.cols(); }
    bool expanded() const { return expanded_desired.size() > 0 || expanded_undesired.size() > 0; }
};

/// Solves all q - m constrained minimizations at once: with N = K_bar phibar
/// and Z an orthonormal basis of null(N^T), the undesired modes are Z y_j for
/// the eigenvectors y_j of Z^T K_bar Z. Throws InvalidArgument on shape
/// errors and when K_bar phibar is rank deficient.
OrthonormalBase solve_constrained_base(const Matrix& kbar, const Matrix& phibar);

/// Expands desired and undesired modes to all structural DoFs.
OrthonormalBase expand_base(OrthonormalBase base, const CondensedSystem& system);

}  // namespace modalsyn
