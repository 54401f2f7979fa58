#include "modalsyn/assessor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "modalsyn/errors.hpp"

namespace modalsyn {

namespace {

void require_orthonormal(const Matrix& v, const char* what) {
    const Matrix gram = v.transpose() * v;
    const double err = (gram - Matrix::Identity(v.cols(), v.cols())).cwiseAbs().maxCoeff();
    if (!(err <= 1e-8)) {
        throw InvalidArgument(std::string("extended_cosine: ") + what + " columns are not orthonormal");
    }
}

}  // namespace

SimilarityReport least_squares_fit(const Matrix& phibar, const Matrix& kinematic) {
    if (phibar.rows() != kinematic.rows()) {
        throw InvalidArgument("least_squares_fit: mode sets live on different DoF counts");
    }
    SimilarityReport out;
    const Matrix coeffs = kinematic.colPivHouseholderQr().solve(phibar);
    out.alpha = coeffs.transpose();
    out.approximations = kinematic * coeffs;
    out.residuals = (phibar - out.approximations).colwise().norm().transpose();
    return out;
}

double extended_cosine(const Matrix& phibar, const Matrix& kinematic) {
    if (phibar.rows() != kinematic.rows()) {
        throw InvalidArgument("extended_cosine: mode sets live on different DoF counts");
    }
    require_orthonormal(phibar, "desired");
    require_orthonormal(kinematic, "kinematic");
    if (phibar.cols() == 1 && kinematic.cols() == 1) {
        return std::min(1.0, std::abs(phibar.col(0).dot(kinematic.col(0))));
    }
    const Matrix cross = kinematic.transpose() * phibar;
    const Matrix gram = cross.transpose() * cross;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
    const double beta1 = solver.eigenvalues()[0];
    return std::sqrt(std::clamp(beta1, 0.0, 1.0));
}

SimilarityReport assess_similarity(const Matrix& phibar, const Matrix& kinematic) {
    SimilarityReport out = least_squares_fit(phibar, kinematic);
    out.delta_e = extended_cosine(phibar, kinematic);
    const Matrix cross = kinematic.transpose() * phibar;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(cross.transpose() * cross);
    out.beta = solver.eigenvalues();
    out.b = solver.eigenvectors();
    return out;
}

LoadCase simulate(const CondensedSystem& system, const ModalResult& modal, const Vector& forces) {
    if (forces.size() != system.active_count()) {
        throw InvalidArgument("simulate: force vector length differs from the active DoF count");
    }
    LoadCase out;
    out.forces = forces;
    Eigen::LDLT<Matrix> ldlt(system.kbar);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * ldlt.vectorD().cwiseAbs().maxCoeff()) {
        throw SingularSystem("simulate: condensed stiffness matrix is singular");
    }
    out.displacement = ldlt.solve(forces);
    out.full_displacement = expand(out.displacement, system);
    const ModalCoordinates coords = modal_coordinates(modal, out.displacement);
    out.alpha = coords.alpha;
    out.parasitic_residual = coords.residual;
    const double norm = out.displacement.norm();
    out.kinematic_fraction = norm > 0.0 ? coords.alpha.norm() / norm : 1.0;
    return out;
}

}  // namespace modalsyn
