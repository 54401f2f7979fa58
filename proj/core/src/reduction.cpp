#include "modalsyn/reduction.hpp"

#include <string>

#include "modalsyn/errors.hpp"

namespace modalsyn {

DofPartition::DofPartition(Index dof_count, std::span<const Index> active)
    : dof_count_(dof_count), active_(active.begin(), active.end()) {
    if (dof_count < 0) throw InvalidArgument("negative DoF count");
    slot_.assign(static_cast<std::size_t>(dof_count), 0);
    std::vector<bool> seen(static_cast<std::size_t>(dof_count), false);
    for (std::size_t k = 0; k < active_.size(); ++k) {
        const Index d = active_[k];
        if (d < 0 || d >= dof_count) {
            throw InvalidArgument("active DoF " + std::to_string(d) + " out of range [0, " +
                                  std::to_string(dof_count) + ")");
        }
        if (seen[static_cast<std::size_t>(d)]) {
            throw InvalidArgument("duplicate active DoF " + std::to_string(d));
        }
        seen[static_cast<std::size_t>(d)] = true;
        slot_[static_cast<std::size_t>(d)] = static_cast<Index>(k);
    }
    for (Index d = 0; d < dof_count; ++d) {
        if (seen[static_cast<std::size_t>(d)]) continue;
        slot_[static_cast<std::size_t>(d)] = -static_cast<Index>(passive_.size()) - 1;
        passive_.push_back(d);
    }
}

PartitionedMatrix partition(const SparseMatrix& k, const DofPartition& dofs) {
    if (k.rows() != dofs.dof_count() || k.cols() != dofs.dof_count()) {
        throw InvalidArgument("matrix size does not match the DoF partition");
    }
    const Index q = dofs.active_count();
    const Index c = dofs.passive_count();
    PartitionedMatrix out;
    out.aa = Matrix::Zero(q, q);
    std::vector<Eigen::Triplet<double>> ac, ca, cc;
    for (Index col = 0; col < k.outerSize(); ++col) {
        const Index sc = dofs.slot(col);
        for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
            const Index sr = dofs.slot(it.row());
            const double v = it.value();
            if (sr >= 0 && sc >= 0) {
                out.aa(sr, sc) += v;
            } else if (sr >= 0) {
                ac.emplace_back(sr, -sc - 1, v);
            } else if (sc >= 0) {
                ca.emplace_back(-sr - 1, sc, v);
            } else {
                cc.emplace_back(-sr - 1, -sc - 1, v);
            }
        }
    }
    out.ac.resize(q, c);
    out.ca.resize(c, q);
    out.cc.resize(c, c);
    out.ac.setFromTriplets(ac.begin(), ac.end());
    out.ca.setFromTriplets(ca.begin(), ca.end());
    out.cc.setFromTriplets(cc.begin(), cc.end());
    return out;
}

namespace {

void check_factorization(const Eigen::SimplicialLDLT<SparseMatrix>& ldlt) {
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystem("factorization of K_cc failed: insufficient support or vanished elements");
    }
    const Vector& d = ldlt.vectorD();
    if (d.size() == 0) return;
    const double scale = d.cwiseAbs().maxCoeff();
    if (!(d.minCoeff() > 1e-14 * scale)) {
        throw SingularSystem("K_cc is singular or indefinite: insufficient support or vanished elements");
    }
}

CondensedSystem finish(const PartitionedMatrix& blocks, const DofPartition& dofs,
                       Eigen::SimplicialLDLT<SparseMatrix>* ldlt) {
    CondensedSystem out;
    out.dofs = dofs;
    if (dofs.passive_count() == 0) {
        out.kbar = blocks.aa;
        out.recovery.resize(0, dofs.active_count());
    } else {
        const Matrix rhs = Matrix(blocks.ca);
        Matrix solved = ldlt->solve(rhs);
        if (ldlt->info() != Eigen::Success) throw SingularSystem("solve with K_cc failed");
        out.kbar = blocks.aa - blocks.ac * solved;
        out.recovery = -solved;
    }
    out.kbar = (0.5 * (out.kbar + out.kbar.transpose())).eval();
    return out;
}

}  // namespace

CondensedSystem condense(const PartitionedMatrix& blocks, const DofPartition& dofs) {
    if (dofs.passive_count() == 0) return finish(blocks, dofs, nullptr);
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(blocks.cc);
    check_factorization(ldlt);
    return finish(blocks, dofs, &ldlt);
}

CondensedSystem condense(const SparseMatrix& k, const DofPartition& dofs) {
    return condense(partition(k, dofs), dofs);
}

Matrix expand(const Matrix& vbar, const CondensedSystem& system) {
    const DofPartition& dofs = system.dofs;
    if (vbar.rows() != dofs.active_count()) {
        throw InvalidArgument("condensed vector length differs from the active DoF count");
    }
    Matrix out(dofs.dof_count(), vbar.cols());
    const Matrix passive = system.recovery * vbar;
    for (Index k = 0; k < dofs.active_count(); ++k) {
        out.row(dofs.active()[static_cast<std::size_t>(k)]) = vbar.row(k);
    }
    for (Index k = 0; k < dofs.passive_count(); ++k) {
        out.row(dofs.passive()[static_cast<std::size_t>(k)]) = passive.row(k);
    }
    return out;
}

Vector expand(const Vector& vbar, const CondensedSystem& system) {
    return expand(Matrix(vbar), system).col(0);
}

Condenser::Condenser(DofPartition dofs)
    : dofs_(std::move(dofs)), solver_(std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>()) {}

Condenser::Condenser(Condenser&&) noexcept = default;
Condenser& Condenser::operator=(Condenser&&) noexcept = default;
Condenser::~Condenser() = default;

CondensedSystem Condenser::operator()(const SparseMatrix& k) {
    PartitionedMatrix blocks = partition(k, dofs_);
    if (dofs_.passive_count() == 0) return finish(blocks, dofs_, nullptr);
    blocks.cc.makeCompressed();
    if (!analysed_ || blocks.cc.nonZeros() != pattern_nonzeros_) {
        solver_->analyzePattern(blocks.cc);
        analysed_ = true;
        pattern_nonzeros_ = blocks.cc.nonZeros();
    }
    solver_->factorize(blocks.cc);
    check_factorization(*solver_);
    return finish(blocks, dofs_, solver_.get());
}

}  // namespace modalsyn
