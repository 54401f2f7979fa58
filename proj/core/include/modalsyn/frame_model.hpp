#pragma once

// Ground structure of planar Euler-Bernoulli frame elements and the
// design-dependent stiffness matrix K(x) = sum_i x_i K_i.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "modalsyn/types.hpp"

namespace modalsyn {

/// Per-node degrees of freedom, in storage order.
enum class NodeDof : int { x = 0, y = 1, rotation = 2 };

inline constexpr int kDofsPerNode = 3;

struct SectionProperties {
    double area = 0.0;             ///< A [mm^2]
    double elastic_modulus = 0.0;  ///< E [MPa]
    double second_moment = 0.0;    ///< I [mm^4]

    void validate() const;
    friend bool operator==(const SectionProperties&, const SectionProperties&) = default;
};

/// Axis-aligned rectangle in model coordinates [mm].
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    bool contains_strictly(const Point2& p, double tol) const {
        return p.x > x0 + tol && p.x < x1 - tol && p.y > y0 + tol && p.y < y1 - tol;
    }
    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Lattice description. `connectivity_radius` is a Chebyshev distance in
/// lattice steps: 1 links the 8-neighbourhood, 2 adds the (2,1) offsets.
struct GridSpec {
    double width = 0.0;
    double height = 0.0;
    double pitch = 0.0;
    int connectivity_radius = 1;
    std::vector<Rect> cutouts;  ///< nodes strictly inside are removed

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct NodeGrid {
    std::vector<Point2> positions;
    /// Lattice coordinates (column, row) of each node.
    std::vector<std::array<int, 2>> lattice;
    double spacing = 0.0;
    double width = 0.0;
    double height = 0.0;
    int columns = 0;
    int rows = 0;

    std::size_t size() const { return positions.size(); }
    /// Node index at lattice (column, row), or -1 if absent.
    Index node_at(int column, int row) const;

    std::vector<Index> lattice_to_node;  ///< row-major, -1 where removed
};

struct BeamElement {
    Index node_a = 0;
    Index node_b = 0;
    double length = 0.0;  ///< [mm]
    double angle = 0.0;   ///< [rad], measured from the global x axis
    std::size_t section = 0;
};

struct GridLayout {
    NodeGrid grid;
    std::vector<BeamElement> elements;
};

/// Rectangular lattice with candidate beams between every node pair within
/// the connectivity radius. Beams that would pass through an intermediate
/// lattice point are excluded so no two candidates overlap.
GridLayout build_grid(const GridSpec& spec);
GridLayout build_grid(double width, double height, double pitch, int connectivity_radius);

/// Local-to-global 6x6 stiffness of a plane frame element (u, v, theta per node).
Matrix6 element_stiffness(const BeamElement& element, const SectionProperties& section);
Matrix6 element_stiffness(double length, double angle, const SectionProperties& section);

/// Immutable ground structure: geometry, supports and per-element stiffness
/// blocks expressed on the free (structural) DoFs.
class GroundStructure {
public:
    /// `supports` holds node-DoF indices (3 * node + dof) that are fixed.
    GroundStructure(NodeGrid grid, std::vector<BeamElement> elements,
                    std::vector<SectionProperties> sections, std::vector<Index> supports);

    const NodeGrid& grid() const { return grid_; }
    const std::vector<BeamElement>& elements() const { return elements_; }
    const std::vector<SectionProperties>& sections() const { return sections_; }
    const std::vector<Index>& supports() const { return supports_; }

    /// Number of candidate elements r.
    Index element_count() const { return static_cast<Index>(elements_.size()); }
    /// Number of free (unsupported) DoFs p on which K(x) is assembled.
    Index dof_count() const { return free_count_; }
    /// All node DoFs, supported ones included (3 per node).
    Index structural_dof_count() const { return static_cast<Index>(grid_.size()) * kDofsPerNode; }

    /// Free DoF index of node-DoF `3 * node + dof`, or -1 when supported.
    Index free_dof(Index node, NodeDof dof) const;
    const std::vector<Index>& node_dof_to_free() const { return node_dof_to_free_; }

    const Matrix6& element_matrix(Index e) const { return element_matrices_[static_cast<std::size_t>(e)]; }
    /// Free DoF indices of the element's six local DoFs (-1 when supported).
    const std::array<Index, 6>& element_dofs(Index e) const {
        return element_dofs_[static_cast<std::size_t>(e)];
    }

    /// Quadratic forms v_e^T K_i v_e of every element for a free-DoF vector v.
    Vector element_quadratic_forms(const Vector& v) const;
    /// Bilinear forms u_e^T K_i v_e of every element.
    Vector element_bilinear_forms(const Vector& u, const Vector& v) const;

private:
    NodeGrid grid_;
    std::vector<BeamElement> elements_;
    std::vector<SectionProperties> sections_;
    std::vector<Index> supports_;
    std::vector<Index> node_dof_to_free_;
    Index free_count_ = 0;
    std::vector<Matrix6> element_matrices_;
    std::vector<std::array<Index, 6>> element_dofs_;
};

/// K(x) on the structural DoFs. Throws InvalidArgument on a length mismatch
/// or a negative / non-finite design variable.
SparseMatrix assemble(const GroundStructure& ground, std::span<const double> x);
SparseMatrix assemble(const GroundStructure& ground, const Vector& x);

/// Supports given as whole nodes: every DoF of each listed node is fixed.
std::vector<Index> clamp_nodes(std::span<const Index> nodes);

}  // namespace modalsyn
