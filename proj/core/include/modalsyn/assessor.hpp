#pragma once

// Design assessment: least-squares recombination of kinematic eigenmodes,
// extended cosine similarity between subspaces, and load-case response.

#include "modalsyn/reduction.hpp"
#include "modalsyn/spectra.hpp"
#include "modalsyn/types.hpp"

namespace modalsyn {

struct SimilarityReport {
    Matrix alpha;           ///< alpha(i, j): weight of kinematic mode j in the fit of desired mode i
    Matrix approximations;  ///< column i is phibar'_i
    Vector residuals;       ///< ||phibar_i - phibar'_i||
    double delta_e = 0.0;
    Vector beta;  ///< eigenvalues of Phi^T X_d X_d^T Phi, ascending
    Matrix b;     ///< matching eigenvectors
};

/// Least-squares fit of each desired mode by the kinematic eigenmodes.
SimilarityReport least_squares_fit(const Matrix& phibar, const Matrix& kinematic);

/// sqrt of the smallest eigenvalue of Phi^T X X^T Phi. Both arguments must
/// have orthonormal columns (1e-8), otherwise InvalidArgument.
double extended_cosine(const Matrix& phibar, const Matrix& kinematic);

/// least_squares_fit plus the extended cosine similarity and its eigen data.
SimilarityReport assess_similarity(const Matrix& phibar, const Matrix& kinematic);

struct LoadCase {
    Vector forces;             ///< f_a on the active DoFs
    Vector displacement;       ///< u_a
    Vector full_displacement;  ///< u on all free DoFs
    Vector alpha;              ///< kinematic modal coordinates of u_a
    double parasitic_residual = 0.0;
    /// ||projection onto kinematic modes|| / ||u_a|| (1 when u_a = 0).
    double kinematic_fraction = 1.0;
};

/// Solves K_bar u_a = f_a, expands it and splits the response into its
/// kinematic and parasitic parts. Throws SingularSystem for a singular K_bar.
LoadCase simulate(const CondensedSystem& system, const ModalResult& modal, const Vector& forces);

}  // namespace modalsyn
