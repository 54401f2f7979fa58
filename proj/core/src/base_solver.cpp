#include "modalsyn/base_solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <string>

#include "modalsyn/errors.hpp"
#include "modalsyn/spectra.hpp"

namespace modalsyn {

OrthonormalBase solve_constrained_base(const Matrix& kbar, const Matrix& phibar) {
    const Index q = kbar.rows();
    const Index m = phibar.cols();
    if (kbar.cols() != q) throw InvalidArgument("solve_constrained_base: K_bar is not square");
    if (phibar.rows() != q) {
        throw InvalidArgument("solve_constrained_base: desired modes have " + std::to_string(phibar.rows()) +
                              " rows, K_bar has " + std::to_string(q));
    }
    if (m >= q) throw InvalidArgument("solve_constrained_base: need m < q");

    OrthonormalBase out;
    out.desired = phibar;

    Matrix z;
    if (m == 0) {
        z = Matrix::Identity(q, q);
    } else {
        const Matrix n = kbar * phibar;
        Eigen::ColPivHouseholderQR<Matrix> qr(n);
        qr.setThreshold(1e-12);
        if (qr.rank() < m) {
            throw InvalidArgument("solve_constrained_base: constraint matrix K_bar phibar is rank deficient");
        }
        const Matrix full_q = qr.householderQ();
        z = full_q.rightCols(q - m);
    }

    const Matrix reduced = z.transpose() * kbar * z;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (reduced + reduced.transpose()));
    if (solver.info() != Eigen::Success) throw Error("solve_constrained_base: eigensolver failed");
    out.undesired = z * solver.eigenvectors();
    out.undesired.colwise().normalize();
    fix_signs(out.undesired);
    out.quotients = (out.undesired.transpose() * kbar * out.undesired).diagonal();
    return out;
}

OrthonormalBase expand_base(OrthonormalBase base, const CondensedSystem& system) {
    base.expanded_desired = expand(base.desired, system);
    base.expanded_undesired = expand(base.undesired, system);
    return base;
}

}  // namespace modalsyn
