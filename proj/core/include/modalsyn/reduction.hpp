#pragma once

// Static condensation of the structural stiffness matrix onto the active DoFs
// and recovery of the passive DoFs for condensed vectors.

#include <Eigen/SparseCholesky>
#include <memory>
#include <span>
#include <vector>

#include "modalsyn/types.hpp"

namespace modalsyn {

/// Split of the p structural DoFs into q active and p - q passive ones.
/// `active` keeps the caller's order; `passive` is ascending.
class DofPartition {
public:
    DofPartition() = default;
    /// Throws InvalidArgument on out-of-range or duplicate indices.
    DofPartition(Index dof_count, std::span<const Index> active);

    Index dof_count() const { return dof_count_; }
    Index active_count() const { return static_cast<Index>(active_.size()); }
    Index passive_count() const { return static_cast<Index>(passive_.size()); }
    const std::vector<Index>& active() const { return active_; }
    const std::vector<Index>& passive() const { return passive_; }

    /// Position of a structural DoF inside its block: >= 0 for active,
    /// -(k + 1) for the k-th passive DoF.
    Index slot(Index dof) const { return slot_[static_cast<std::size_t>(dof)]; }

private:
    Index dof_count_ = 0;
    std::vector<Index> active_;
    std::vector<Index> passive_;
    std::vector<Index> slot_;
};

struct PartitionedMatrix {
    Matrix aa;        ///< K_aa, dense q x q
    SparseMatrix ac;  ///< K_ac, q x (p - q)
    SparseMatrix ca;  ///< K_ca, (p - q) x q
    SparseMatrix cc;  ///< K_cc, (p - q) x (p - q)
};

PartitionedMatrix partition(const SparseMatrix& k, const DofPartition& dofs);

/// Condensed stiffness K_bar = K_aa - K_ac K_cc^-1 K_ca together with the
/// recovery operator R = -K_cc^-1 K_ca that maps condensed vectors to the
/// passive DoFs.
struct CondensedSystem {
    Matrix kbar;
    DofPartition dofs;
    Matrix recovery;

    Index active_count() const { return dofs.active_count(); }
    Index dof_count() const { return dofs.dof_count(); }
};

/// Throws SingularSystem when K_cc cannot be factorized as positive definite.
CondensedSystem condense(const PartitionedMatrix& blocks, const DofPartition& dofs);
CondensedSystem condense(const SparseMatrix& k, const DofPartition& dofs);

/// Lift a condensed vector to all structural DoFs: active entries are copied,
/// passive entries follow from u_c = -K_cc^-1 K_ca v_bar.
Vector expand(const Vector& vbar, const CondensedSystem& system);
Matrix expand(const Matrix& vbar, const CondensedSystem& system);

/// Reusable condensation for a fixed partition and sparsity pattern. The
/// symbolic factorization of K_cc is computed once and reused.
class Condenser {
public:
    explicit Condenser(DofPartition dofs);
    Condenser(const Condenser&) = delete;
    Condenser& operator=(const Condenser&) = delete;
    Condenser(Condenser&&) noexcept;
    Condenser& operator=(Condenser&&) noexcept;
    ~Condenser();

    const DofPartition& dofs() const { return dofs_; }
    CondensedSystem operator()(const SparseMatrix& k);

private:
    DofPartition dofs_;
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> solver_;
    bool analysed_ = false;
    Index pattern_nonzeros_ = 0;
};

}  // namespace modalsyn
