#include "modalsyn/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "modalsyn/errors.hpp"

namespace modalsyn {

void fix_signs(Matrix& modes) {
    for (Index j = 0; j < modes.cols(); ++j) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < modes.rows(); ++i) {
            // Ties resolved towards the first entry, with slack for round-off.
            const double mag = std::abs(modes(i, j));
            if (mag > best * (1.0 + 1e-12)) {
                best = mag;
                arg = i;
            }
        }
        if (modes.rows() > 0 && modes(arg, j) < 0.0) modes.col(j) *= -1.0;
    }
}

ModalResult eigen(const Matrix& kbar, Index m) {
    if (kbar.rows() != kbar.cols()) throw InvalidArgument("eigen: matrix is not square");
    const double scale = std::max(1.0, kbar.cwiseAbs().maxCoeff());
    if ((kbar - kbar.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidArgument("eigen: matrix is not symmetric");
    }
    if (m < 0 || m > kbar.rows()) throw InvalidArgument("eigen: pseudo-mobility out of range");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(kbar);
    if (solver.info() != Eigen::Success) throw Error("eigen: symmetric eigensolver did not converge");
    ModalResult out;
    out.eigenvalues = solver.eigenvalues();
    out.eigenmodes = solver.eigenvectors();
    out.eigenmodes.colwise().normalize();
    fix_signs(out.eigenmodes);
    out.m = m;
    return out;
}

StiffnessSummary summarize(const ModalResult& modal, Index m) {
    if (m < 1 || m >= modal.size()) {
        throw InvalidArgument("summarize: need 1 <= m < q (m=" + std::to_string(m) +
                              ", q=" + std::to_string(modal.size()) + ")");
    }
    StiffnessSummary out;
    out.primary = modal.eigenvalues.head(m);
    out.secondary = modal.eigenvalues[m];
    out.selectivity = modal.eigenvalues[m] / modal.eigenvalues[m - 1];
    return out;
}

ModalCoordinates modal_coordinates(const ModalResult& modal, const Vector& u) {
    if (u.size() != modal.eigenmodes.rows()) {
        throw InvalidArgument("modal_coordinates: vector length differs from q");
    }
    ModalCoordinates out;
    const Matrix kin = modal.kinematic();
    out.alpha = kin.transpose() * u;
    out.residual = (u - kin * out.alpha).norm();
    return out;
}

}  // namespace modalsyn
